"""Univariate Gaussian kernel density estimates used as vine marginals."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, ndtr

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_CHUNK = 2048
BRACKET_WIDTHS = 10.0


def normal_reference_bandwidth(x, floor: float = 0.0) -> float:
    """Silverman's normal reference rule ``1.06 * s * n**(-1/5)``."""
    x = np.asarray(x, dtype=float)
    s = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    return max(1.06 * s * x.size ** -0.2, floor)


@dataclass(frozen=True)
class MarginalKde:
    support_points: np.ndarray
    bandwidth: float

    def __post_init__(self):
        pts = np.sort(np.asarray(self.support_points, dtype=float).ravel())
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")
        pts.setflags(write=False)
        object.__setattr__(self, "support_points", pts)
        object.__setattr__(self, "bandwidth", float(self.bandwidth))

    @property
    def n(self) -> int:
        return self.support_points.size

    def _reduce(self, x, fn, mean=True):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty(flat.size)
        h = self.bandwidth
        for start in range(0, flat.size, _CHUNK):
            z = (flat[start:start + _CHUNK, None] - self.support_points[None, :]) / h
            vals = fn(z)
            out[start:start + _CHUNK] = vals.mean(axis=1) if mean else vals[:, 0]
        return out.reshape(x.shape)

    def pdf(self, x):
        return self._reduce(x, lambda z: np.exp(-0.5 * z * z)) / (_SQRT_2PI * self.bandwidth)

    def logpdf(self, x):
        norm = math.log(_SQRT_2PI * self.bandwidth * self.n)
        return self._reduce(x, lambda z: logsumexp(-0.5 * z * z, axis=1, keepdims=True),
                            mean=False) - norm

    def cdf(self, x):
        return self._reduce(x, ndtr)

    def quantile(self, u):
        return marginal_quantile(self, u)

    def to_dict(self) -> dict:
        return {"support_points": self.support_points.tolist(), "bandwidth": self.bandwidth}

    @classmethod
    def from_dict(cls, d: dict) -> "MarginalKde":
        return cls(np.array(d["support_points"]), d["bandwidth"])


def kde_marginal_fit(column) -> MarginalKde:
    x = np.asarray(column, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("kde_marginal_fit needs at least 2 observations")
    h = normal_reference_bandwidth(x)
    if not h > 0:
        raise ValueError("zero-variance column")
    return MarginalKde(x, h)


def marginal_cdf(m: MarginalKde, x):
    """KDE cdf, kept strictly inside (0, 1)."""
    return np.clip(m.cdf(x), 1e-300, 1.0 - 2.0 ** -53)


def marginal_quantile(m: MarginalKde, u, tol: float = 1e-12, max_iter: int = 100):
    """Invert the KDE cdf with a bracketed Newton iteration.

    The bracket starts at ``[min - 10h, max + 10h]``; Newton steps that leave
    the current bracket are replaced by bisection.
    """
    u = np.asarray(u, dtype=float)
    if np.any(~(u > 0.0)) or np.any(~(u < 1.0)):
        raise ValueError("probabilities must lie in (0, 1)")
    flat = u.ravel()
    h = m.bandwidth
    lo = np.full(flat.size, m.support_points[0] - BRACKET_WIDTHS * h)
    hi = np.full(flat.size, m.support_points[-1] + BRACKET_WIDTHS * h)
    # linear start inside the bracket from the empirical quantile
    x = np.quantile(m.support_points, flat)
    active = np.ones(flat.size, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        xa = x[idx]
        resid = m.cdf(xa) - flat[idx]
        f = m.pdf(xa)
        below = resid < 0
        lo[idx] = np.where(below, xa, lo[idx])
        hi[idx] = np.where(below, hi[idx], xa)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = resid / f
        converged = (resid == 0) | (np.abs(step) < tol)
        cand = xa - step
        bad = ~np.isfinite(cand) | (cand < lo[idx]) | (cand > hi[idx])
        cand = np.where(bad, 0.5 * (lo[idx] + hi[idx]), cand)
        x[idx] = np.where(converged & ~bad, cand, np.where(converged, xa, cand))
        stuck = hi[idx] - lo[idx] <= 4 * np.spacing(np.maximum(np.abs(lo[idx]), np.abs(hi[idx])))
        active[idx[converged | stuck]] = False
    return x.reshape(u.shape)
