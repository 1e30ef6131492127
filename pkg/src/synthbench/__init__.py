"""Synthetic outlier-detection benchmarks built from generative models of real data."""
from .dataset import LabeledDataset, load_csv, preprocess
from .detectors import DETECTORS, ScoreVector, run_detector
from .generators import PAIR_IDS, GeneratorPair, fit_pair
from .ideal import IdealScores, ideal_scores
from .metrics import MetricReport, auc_pr_adjusted, auc_roc, cohens_kappa, kendall_tau_b

__version__ = "0.1.0"

__all__ = [
    "DETECTORS", "PAIR_IDS", "GeneratorPair", "IdealScores", "LabeledDataset", "MetricReport",
    "ScoreVector", "auc_pr_adjusted", "auc_roc", "cohens_kappa", "fit_pair", "ideal_scores",
    "kendall_tau_b", "load_csv", "preprocess", "run_detector",
]
