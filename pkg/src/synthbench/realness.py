"""How realistic are synthetic instances? Train a classifier on them, test on genuine data."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import LabeledDataset, jitter_matrix, stratified_split
from .forest import rf_predict, rf_train
from .generators import GeneratorPair, fit_pair, fit_regular
from .metrics import cohens_kappa

PROBLEMS = ("Real", "SynthRegular", "SynthOutliers", "Synth")
OUTLIER_VARIANTS = ("characterizable", "fitted")
TRAIN_FRACTION = 0.7
NTREES = 100


@dataclass(frozen=True)
class RealnessResult:
    problem: str
    generator_id: str
    kappa: float
    kappa_drop: float
    seed: int
    status: str = "ok"
    reason: str = ""
    outlier_variant: str = "characterizable"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _seeds(seed: int) -> dict:
    names = ("split", "forest", "jitter", "fit", "gen_regular", "gen_outlier", "guess")
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {k: int(c.generate_state(1)[0]) for k, c in zip(names, children)}


def training_set(train: LabeledDataset, problem: str, pair: GeneratorPair | None,
                 seeds: dict, outlier_variant: str = "characterizable"):
    """Training matrix and labels for one problem; class counts stay those of ``train``."""
    reg, out = train.regulars, train.outliers
    if problem == "Real":
        return train.instances, train.labels
    fit_input = jitter_matrix(reg, seeds["jitter"])
    fitted = fit_pair(pair, fit_input, seeds["fit"])
    if problem in ("SynthRegular", "Synth"):
        reg = fitted.gen_regular(len(reg), seeds["gen_regular"])
    if problem in ("SynthOutliers", "Synth"):
        if outlier_variant == "characterizable":
            out = fitted.gen_outlier(len(out), seeds["gen_outlier"])
        else:
            model = fit_regular(pair.regular_model, jitter_matrix(out, seeds["jitter"] + 1), seeds["fit"])
            out = model.gen(len(out), seeds["gen_outlier"])
    X = np.vstack([reg, out])
    y = np.r_[np.zeros(len(reg), bool), np.ones(len(out), bool)]
    return X, y


def _kappa(X, y, test: LabeledDataset, seed: int, ntrees: int) -> float:
    forest = rf_train(X, y, ntrees=ntrees, seed=seed)
    return cohens_kappa(rf_predict(forest, test.instances), test.labels)


def classify_protocol(data: LabeledDataset, problem: str, generator_pair: GeneratorPair | None,
                      seed: int, outlier_variant: str = "characterizable",
                      ntrees: int = NTREES, kappa_real: float | None = None) -> RealnessResult:
    """Kappa of a forest trained on a (partly) synthetic 70% split, tested on the genuine 30%.

    The split, forest seed and test rows depend only on ``seed``, so the
    problems differ in their training data alone. ``kappa_real`` may be
    passed to avoid retraining the reference forest.
    """
    if problem not in PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}")
    if outlier_variant not in OUTLIER_VARIANTS:
        raise ValueError(f"unknown outlier variant {outlier_variant!r}")
    if problem != "Real" and generator_pair is None:
        raise ValueError(f"{problem} needs a generator pair")
    gid = generator_pair.id if generator_pair is not None else "none"
    seeds = _seeds(seed)
    split = stratified_split(data, TRAIN_FRACTION, seeds["split"])
    if kappa_real is None:
        kappa_real = _kappa(split.train.instances, split.train.labels, split.test,
                            seeds["forest"], ntrees)
    if problem == "Real":
        return RealnessResult(problem, gid, kappa_real, 0.0, seed, outlier_variant=outlier_variant)
    try:
        X, y = training_set(split.train, problem, generator_pair, seeds, outlier_variant)
    except (ValueError, RuntimeError) as exc:
        return RealnessResult(problem, gid, math.nan, math.nan, seed, "failed",
                              f"{type(exc).__name__}: {exc}", outlier_variant)
    kappa = _kappa(X, y, split.test, seeds["forest"], ntrees)
    return RealnessResult(problem, gid, kappa, kappa_real - kappa, seed,
                          outlier_variant=outlier_variant)


def random_guess_kappa(data: LabeledDataset, seed: int) -> float:
    """Kappa of guessing each test label from the training outlier frequency."""
    seeds = _seeds(seed)
    split = stratified_split(data, TRAIN_FRACTION, seeds["split"])
    rng = np.random.default_rng(seeds["guess"])
    pred = rng.random(split.test.n) < split.train.labels.mean()
    return cohens_kappa(pred, split.test.labels)
