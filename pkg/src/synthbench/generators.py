"""Regular/outlier model pairs: fit on regulars, derive the outlier model, sample, score."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gmm, uniform, vine

REGULAR_KINDS = ("gauss", "vine", "unif")
PAIR_IDS = ("gauss_gauss", "vine_vine", "gauss_unif", "vine_unif", "unif_unif")
DEFAULT_ALPHA = 5.0
DEFAULT_EXPANSION = 0.10


@dataclass(frozen=True)
class GeneratorPair:
    regular_model: str
    outlier_model: str
    alpha: float = DEFAULT_ALPHA
    expansion: float = DEFAULT_EXPANSION

    def __post_init__(self):
        if self.id not in PAIR_IDS:
            raise ValueError(f"unsupported generator pair {self.id!r}; choose from {PAIR_IDS}")

    @property
    def id(self) -> str:
        return f"{self.regular_model}_{self.outlier_model}"

    @classmethod
    def parse(cls, pair_id: str, alpha: float = DEFAULT_ALPHA,
              expansion: float = DEFAULT_EXPANSION) -> "GeneratorPair":
        reg, _, out = pair_id.partition("_")
        return cls(reg, out, alpha, expansion)


@dataclass(frozen=True)
class FittedPair:
    pair: GeneratorPair
    regular: object
    outlier: object

    def gen_regular(self, n: int, seed: int) -> np.ndarray:
        return self.regular.gen(n, seed)

    def gen_outlier(self, n: int, seed: int) -> np.ndarray:
        return self.outlier.gen(n, seed)

    def logdens_regular(self, X) -> np.ndarray:
        return self.regular.logdens(X)

    def logdens_outlier(self, X) -> np.ndarray:
        return self.outlier.logdens(X)

    def to_dict(self) -> dict:
        return {"pair": self.pair.id, "regular": self.regular.to_dict(),
                "outlier": self.outlier.to_dict()}


def fit_regular(kind: str, X, seed: int):
    """Fit one regular-instance model of the given kind."""
    if kind == "gauss":
        return gmm.gmm_fit(X, seed=seed)
    if kind == "vine":
        return vine.vine_fit(X, seed=seed)
    if kind == "unif":
        return uniform.uniform_fit(X)
    raise ValueError(f"unknown model kind {kind!r}")


def fit_pair(pair: GeneratorPair, X, seed: int) -> FittedPair:
    X = np.asarray(X, dtype=float)
    reg = fit_regular(pair.regular_model, X, seed)
    if pair.outlier_model == "gauss":
        out = gmm.gmm_modify_local(reg, pair.alpha)
    elif pair.outlier_model == "vine":
        out = vine.vine_modify_independence(reg)
    else:
        box = reg if pair.regular_model == "unif" else uniform.uniform_fit(X)
        out = uniform.uniform_modify_expand(box, pair.expansion)
    return FittedPair(pair, reg, out)
