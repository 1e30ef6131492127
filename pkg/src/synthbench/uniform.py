"""Axis-aligned uniform box model and its outward expansion for global outliers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class UniformModel:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float).ravel()
        hi = np.array(self.upper, dtype=float).ravel()
        if lo.shape != hi.shape or lo.size == 0:
            raise ValueError("lower and upper must be non-empty vectors of equal length")
        if not np.all(lo < hi):
            raise ValueError("every lower bound must be below its upper bound")
        if not np.isfinite(self._log_volume(lo, hi)):
            raise ValueError("box volume must be finite and positive")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @staticmethod
    def _log_volume(lo, hi) -> float:
        return float(np.sum(np.log(hi - lo)))

    @property
    def d(self) -> int:
        return self.lower.size

    @property
    def log_volume(self) -> float:
        return self._log_volume(self.lower, self.upper)

    def contains(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        return np.all((X >= self.lower) & (X <= self.upper), axis=1)

    def gen(self, n: int, seed: int) -> np.ndarray:
        return uniform_gen(self, n, seed)

    def logdens(self, X) -> np.ndarray:
        return uniform_logdens(self, X)

    def to_dict(self) -> dict:
        return {"family": "uniform", "lower": self.lower.tolist(), "upper": self.upper.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "UniformModel":
        return cls(np.array(d["lower"]), np.array(d["upper"]))


def uniform_fit(data) -> UniformModel:
    X = np.atleast_2d(np.asarray(data, dtype=float))
    if X.shape[0] < 2:
        raise ValueError("uniform_fit needs at least 2 rows")
    lo, hi = X.min(axis=0), X.max(axis=0)
    if np.any(lo == hi):
        raise ValueError("constant attribute: cannot fit a box")
    return UniformModel(lo, hi)


def uniform_gen(model: UniformModel, n: int, seed: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    return rng.uniform(model.lower, model.upper, size=(n, model.d))


def uniform_logdens(model: UniformModel, data) -> np.ndarray:
    """``-log volume`` inside the box, ``-inf`` outside."""
    X = np.atleast_2d(np.asarray(data, dtype=float))
    if X.shape[1] != model.d:
        raise ValueError(f"expected {model.d} columns, got {X.shape[1]}")
    return np.where(model.contains(X), -model.log_volume, -np.inf)


def uniform_modify_expand(model: UniformModel, expansion: float = 0.10) -> UniformModel:
    """Widen each bound outward by ``expansion`` times the attribute range."""
    if not expansion > 0:
        raise ValueError("expansion must be positive")
    r = model.upper - model.lower
    return UniformModel(model.lower - expansion * r, model.upper + expansion * r)
