"""Ranking and agreement measures used to evaluate detectors and classifiers."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .detectors import ScoreVector


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class MetricReport:
    auc_pr_adjusted: float
    auc_pr_raw: float
    auc_roc: float
    prevalence: float


def _labels(labels, n: int) -> np.ndarray:
    y = np.asarray(labels).astype(bool).ravel()
    if y.size != n:
        raise MetricError(f"{n} scores but {y.size} labels")
    if y.all() or not y.any():
        raise MetricError("labels must contain both classes")
    return y


def _aligned(scores) -> np.ndarray:
    if isinstance(scores, ScoreVector):
        return scores.aligned()
    return np.asarray(scores, dtype=float).ravel()


def auc_pr(scores, labels) -> float:
    """Step-wise area under the precision-recall curve, tied scores grouped."""
    s = _aligned(scores)
    y = _labels(labels, s.size)
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    tp = np.cumsum(y)
    # last index of each block of equal scores; inf == inf groups sentinels
    ends = np.flatnonzero(np.append(s[1:] != s[:-1], True))
    tp_at = tp[ends]
    precision = tp_at / (ends + 1)
    recall = tp_at / tp[-1]
    gain = np.diff(np.concatenate(([0.0], recall)))
    return float(np.sum(gain * precision))


def auc_pr_adjusted(scores, labels, subtraction_only: bool = False) -> MetricReport:
    """AUC PR rescaled so that random ranking scores 0 and perfect ranking 1.

    ``subtraction_only`` reports ``raw - prevalence`` without the rescaling.
    """
    s = _aligned(scores)
    y = _labels(labels, s.size)
    prevalence = float(y.mean())
    raw = auc_pr(s, y)
    adj = raw - prevalence
    if not subtraction_only:
        adj /= 1.0 - prevalence
    return MetricReport(float(adj), raw, auc_roc(s, y), prevalence)


def auc_roc(scores, labels) -> float:
    """Mann-Whitney probability that an outlier outscores a regular, ties counted half."""
    s = _aligned(scores)
    y = _labels(labels, s.size)
    ranks = rankdata(s)  # average ranks; +-inf rank like any other value
    n_out = int(y.sum())
    n_reg = y.size - n_out
    u = ranks[y].sum() - n_out * (n_out + 1) / 2.0
    return float(u / (n_out * n_reg))


def _sign(a: np.ndarray) -> np.ndarray:
    return (a > 0).astype(np.int8) - (a < 0).astype(np.int8)


def kendall_tau_b(a, b, chunk: int = 1024) -> float:
    """Kendall tau-b by exact pair enumeration; NaN when either side is fully tied."""
    x = np.asarray(a, dtype=float).ravel()
    y = np.asarray(b, dtype=float).ravel()
    if x.size != y.size:
        raise MetricError("vectors must have equal length")
    n = x.size
    if n < 2:
        raise MetricError("need at least 2 observations")
    if np.any(np.isnan(x)) or np.any(np.isnan(y)):
        raise MetricError("NaN in input")
    s = 0
    tied_x = tied_y = 0
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        # (a > b) - (a < b) keeps inf - inf out of the picture
        dx = (x[start:stop, None] > x[None, :]).astype(np.int8) - (x[start:stop, None] < x[None, :])
        dy = (y[start:stop, None] > y[None, :]).astype(np.int8) - (y[start:stop, None] < y[None, :])
        upper = np.arange(start, stop)[:, None] < np.arange(n)[None, :]
        s += int(np.sum((dx.astype(np.int64) * dy)[upper]))
        tied_x += int(np.sum((dx == 0) & upper))
        tied_y += int(np.sum((dy == 0) & upper))
    n0 = n * (n - 1) // 2
    denom = math.sqrt(float(n0 - tied_x) * float(n0 - tied_y))
    if denom == 0.0:
        return math.nan
    return s / denom


def cohens_kappa(pred, truth) -> float:
    """Chance-corrected agreement of two binary labelings.

    Computed from integer contingency counts with a single final division, so
    the result is the correctly rounded exact value. When both labelings are
    the same constant the expected agreement is 1 and the result is 1.
    """
    p = np.asarray(pred).astype(bool).ravel()
    t = np.asarray(truth).astype(bool).ravel()
    if p.size != t.size:
        raise MetricError("pred and truth must have equal length")
    if p.size == 0:
        raise MetricError("empty input")
    both = int(np.sum(p & t))
    only_p = int(np.sum(p & ~t))
    only_t = int(np.sum(~p & t))
    neither = p.size - both - only_p - only_t
    num = 2 * (both * neither - only_p * only_t)
    den = (both + only_p) * (only_p + neither) + (both + only_t) * (only_t + neither)
    if den == 0:
        return 1.0
    return num / den
