"""Seeded stand-ins for real labelled datasets, used by tests and demos."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from scipy import stats

from .dataset import LabeledDataset, preprocess


def _mixture_params(rng, d, n_clusters, spread, scale_range, concentration):
    centers = rng.uniform(-spread, spread, size=(n_clusters, d))
    scales = np.exp(rng.uniform(*np.log(scale_range), size=(n_clusters, d)))
    weights = rng.dirichlet(np.full(n_clusters, concentration))
    return centers, scales, weights


def _counts(n, outlier_fraction):
    n_out = max(2, int(round(outlier_fraction * n)))
    return n - n_out, n_out


def clustered(seed: int, n: int = 1000, d: int = 4, n_clusters: int = 3,
              outlier_fraction: float = 0.05, spread: float = 6.0,
              scale_range: tuple = (0.5, 1.5), concentration: float = 5.0) -> LabeledDataset:
    """Regulars from a diagonal Gaussian mixture, outliers scattered over an enlarged box."""
    rng = np.random.default_rng(seed)
    n_reg, n_out = _counts(n, outlier_fraction)
    centers, scales, weights = _mixture_params(rng, d, n_clusters, spread, scale_range,
                                               concentration)
    comp = rng.choice(n_clusters, size=n_reg, p=weights)
    reg = centers[comp] + scales[comp] * rng.standard_normal((n_reg, d))
    lo, hi = reg.min(axis=0), reg.max(axis=0)
    pad = 0.2 * (hi - lo)
    out = rng.uniform(lo - pad, hi + pad, size=(n_out, d))
    return _finish(reg, out, {"fixture": "clustered", "seed": seed})


def mixture(seed: int, n: int = 1000, d: int = 4, n_clusters: int = 3,
            outlier_fraction: float = 0.05, inflation: float = 3.0, spread: float = 6.0,
            scale_range: tuple = (0.5, 1.5), concentration: float = 5.0) -> LabeledDataset:
    """Both classes from one diagonal Gaussian mixture; outliers have scales times ``inflation``."""
    rng = np.random.default_rng(seed)
    n_reg, n_out = _counts(n, outlier_fraction)
    centers, scales, weights = _mixture_params(rng, d, n_clusters, spread, scale_range,
                                               concentration)
    comp = rng.choice(n_clusters, size=n_reg, p=weights)
    reg = centers[comp] + scales[comp] * rng.standard_normal((n_reg, d))
    comp = rng.choice(n_clusters, size=n_out, p=weights)
    out = centers[comp] + inflation * scales[comp] * rng.standard_normal((n_out, d))
    return _finish(reg, out, {"fixture": "mixture", "seed": seed})


def dependent(seed: int, n: int = 1000, d: int = 3, rho: float = 0.8,
              outlier_fraction: float = 0.05) -> LabeledDataset:
    """Gaussian-copula regulars with skewed marginals; outliers break the dependence."""
    rng = np.random.default_rng(seed)
    n_reg, n_out = _counts(n, outlier_fraction)
    corr = np.full((d, d), rho)
    np.fill_diagonal(corr, 1.0)
    z = rng.multivariate_normal(np.zeros(d), corr, size=n_reg)
    reg = _skew(stats.norm.cdf(z))
    out = _skew(rng.uniform(size=(n_out, d)))
    return _finish(reg, out, {"fixture": "dependent", "seed": seed})


def _skew(u: np.ndarray) -> np.ndarray:
    cols = [stats.gamma.ppf(u[:, j], a=2.0 + j) for j in range(u.shape[1])]
    return np.column_stack(cols)


def _finish(reg, out, provenance) -> LabeledDataset:
    data = LabeledDataset.from_parts(reg, out, provenance={"source": "fixture", **provenance})
    return preprocess(data)


def write_csv(data: LabeledDataset, path, label_column: str = "label") -> Path:
    """Write ``data`` with an ``outlier``/``regular`` label column."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*data.attribute_names, label_column])
        for row, flag in zip(data.instances, data.labels):
            w.writerow([repr(float(v)) for v in row] + ["outlier" if flag else "regular"])
    return path
