"""Ideal outlier scorings computed from the true generating log-densities."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detectors import HIGHER_IS_OUTLIER, LOWER_IS_OUTLIER, ScoreVector


@dataclass(frozen=True)
class IdealScores:
    logdens_reg: np.ndarray
    logdens_out: np.ndarray
    xi: float
    rd: ScoreVector
    od: ScoreVector
    c: ScoreVector

    def by_name(self) -> dict:
        return {"rd": self.rd, "od": self.od, "c": self.c}


def ideal_scores(logdens_reg, logdens_out, xi: float) -> IdealScores:
    """Regular density, overall mixture density and outlier/regular posterior ratio.

    All three are log-valued. A point outside the regular support gets
    ``c = +inf``; one outside both supports gets ``c = -inf`` only when the
    outlier density is also zero and the regular density is positive.
    """
    lr = np.array(logdens_reg, dtype=float).ravel()
    lo = np.array(logdens_out, dtype=float).ravel()
    if lr.shape != lo.shape:
        raise ValueError(f"length mismatch: {lr.size} regular vs {lo.size} outlier densities")
    if not 0.0 < xi < 1.0:
        raise ValueError("xi must lie in (0, 1)")
    if np.any(np.isnan(lr)) or np.any(np.isnan(lo)) or np.any(lr == np.inf) or np.any(lo == np.inf):
        raise ValueError("log-densities must be finite or -inf")
    a = math.log(xi) + lo
    b = math.log1p(-xi) + lr
    od = np.logaddexp(a, b)
    with np.errstate(invalid="ignore"):
        c = a - b
    # both densities zero: the instance is outside every support
    c = np.where(np.isnan(c), np.inf, c)
    for arr in (lr, lo):
        arr.setflags(write=False)
    return IdealScores(
        logdens_reg=lr,
        logdens_out=lo,
        xi=float(xi),
        rd=_sv(lr, LOWER_IS_OUTLIER, "ideal_rd"),
        od=_sv(od, LOWER_IS_OUTLIER, "ideal_od"),
        c=_sv(c, HIGHER_IS_OUTLIER, "ideal_c"),
    )


def _sv(values, orientation, name) -> ScoreVector:
    return ScoreVector(values, orientation, name)
