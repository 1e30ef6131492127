"""Unsupervised outlier detectors: LOF, weighted kNN, Isolation Forest, KDE."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import digamma, logsumexp

from .marginals import normal_reference_bandwidth

HIGHER_IS_OUTLIER = "higher-is-outlier"
LOWER_IS_OUTLIER = "lower-is-outlier"
REACH_FLOOR = 1e-12
KDE_BANDWIDTH_FLOOR = 1e-6
_EULER = 0.5772156649015329


@dataclass(frozen=True)
class ScoreVector:
    scores: np.ndarray
    orientation: str
    method_id: str

    def __post_init__(self):
        s = np.array(self.scores, dtype=float).ravel()
        if self.orientation not in (HIGHER_IS_OUTLIER, LOWER_IS_OUTLIER):
            raise ValueError(f"unknown orientation {self.orientation!r}")
        if np.any(np.isnan(s)):
            raise ValueError("scores contain NaN")
        s.setflags(write=False)
        object.__setattr__(self, "scores", s)

    def __len__(self) -> int:
        return self.scores.size

    def aligned(self) -> np.ndarray:
        """Scores oriented so that larger means more outlying."""
        return self.scores if self.orientation == HIGHER_IS_OUTLIER else -self.scores


def _distances(X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return cdist(X, X)


def lof_scores(data, min_pts: int) -> ScoreVector:
    """Local Outlier Factor with exact k-distance neighbourhoods (ties included)."""
    D = _distances(data)
    n = D.shape[0]
    if not 1 <= min_pts < n:
        raise ValueError("need n > min_pts >= 1")
    np.fill_diagonal(D, np.inf)
    kdist = np.partition(D, min_pts - 1, axis=1)[:, min_pts - 1]
    neigh = D <= kdist[:, None]
    reach = np.maximum(D, kdist[None, :])
    mean_reach = np.where(neigh, reach, 0.0).sum(axis=1) / neigh.sum(axis=1)
    lrd = 1.0 / np.maximum(mean_reach, REACH_FLOOR)
    lof = (neigh @ lrd) / neigh.sum(axis=1) / lrd
    return ScoreVector(lof, HIGHER_IS_OUTLIER, f"lof_{min_pts}")


def wknn_scores(data, k: int) -> ScoreVector:
    """Sum of the distances to the k nearest neighbours."""
    D = _distances(data)
    n = D.shape[0]
    if not 1 <= k < n:
        raise ValueError("need n > k >= 1")
    np.fill_diagonal(D, np.inf)
    nearest = np.partition(D, k - 1, axis=1)[:, :k]
    return ScoreVector(nearest.sum(axis=1), HIGHER_IS_OUTLIER, f"wknn_{k}")


def average_path_length(m):
    """``c(m) = 2 H(m-1) - 2 (m-1) / m``, the mean unsuccessful BST search length."""
    m = np.asarray(m, dtype=float)
    out = np.zeros_like(m)
    big = m > 1
    mb = m[big]
    harmonic = digamma(mb) + _EULER  # H(m-1)
    out[big] = 2.0 * harmonic - 2.0 * (mb - 1.0) / mb
    return out if out.ndim else float(out)


def iforest_anomaly_score(mean_path, psi: int):
    """``2 ** (-E[h(x)] / c(psi))``."""
    return np.power(2.0, -np.asarray(mean_path, dtype=float) / average_path_length(psi))


class _IsolationTree:
    __slots__ = ("feature", "threshold", "left", "right", "size")

    def __init__(self, X, rng, height_limit):
        self.feature, self.threshold, self.left, self.right, self.size = [], [], [], [], []
        stack = [(self._new(), np.arange(X.shape[0]), 0)]
        while stack:
            node, rows, depth = stack.pop()
            self.size[node] = rows.size
            if depth >= height_limit or rows.size <= 1:
                continue
            sub = X[rows]
            lo, hi = sub.min(axis=0), sub.max(axis=0)
            splittable = np.flatnonzero(hi > lo)
            if splittable.size == 0:
                continue
            f = int(rng.choice(splittable))
            p = rng.uniform(lo[f], hi[f])
            go_left = sub[:, f] < p
            left, right = self._new(), self._new()
            self.feature[node], self.threshold[node] = f, p
            self.left[node], self.right[node] = left, right
            stack.append((left, rows[go_left], depth + 1))
            stack.append((right, rows[~go_left], depth + 1))
        self.feature = np.array(self.feature)
        self.threshold = np.array(self.threshold)
        self.left = np.array(self.left)
        self.right = np.array(self.right)
        self.size = np.array(self.size)

    def _new(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.size.append(0)
        return len(self.feature) - 1

    def path_length(self, X) -> np.ndarray:
        n = X.shape[0]
        node = np.zeros(n, dtype=int)
        depth = np.zeros(n)
        while True:
            internal = self.feature[node] >= 0
            if not internal.any():
                break
            idx = np.flatnonzero(internal)
            cur = node[idx]
            go_left = X[idx, self.feature[cur]] < self.threshold[cur]
            node[idx] = np.where(go_left, self.left[cur], self.right[cur])
            depth[idx] += 1
        return depth + average_path_length(self.size[node])


def iforest_scores(data, psi: int = 256, t: int = 100, seed: int = 0) -> ScoreVector:
    """Isolation Forest anomaly scores in (0, 1]."""
    X = np.atleast_2d(np.asarray(data, dtype=float))
    n = X.shape[0]
    if n < 2:
        raise ValueError("iforest needs at least 2 instances")
    psi = min(psi, n)
    height_limit = math.ceil(math.log2(psi))
    rng = np.random.default_rng(seed)
    total = np.zeros(n)
    for _ in range(t):
        rows = rng.choice(n, size=psi, replace=False)
        tree = _IsolationTree(X[rows], rng, height_limit)
        total += tree.path_length(X)
    return ScoreVector(iforest_anomaly_score(total / t, psi), HIGHER_IS_OUTLIER, "iforest")


def kde_scores(data, chunk: int = 512) -> ScoreVector:
    """Leave-one-out product Gaussian kernel log-density (low means outlying)."""
    X = np.atleast_2d(np.asarray(data, dtype=float))
    n, d = X.shape
    if n < 2:
        raise ValueError("kde needs at least 2 instances")
    h = np.array([normal_reference_bandwidth(X[:, j], floor=KDE_BANDWIDTH_FLOOR) for j in range(d)])
    Z = X / h
    log_norm = math.log(n - 1) + np.sum(np.log(h)) + 0.5 * d * math.log(2.0 * math.pi)
    sq = np.sum(Z * Z, axis=1)
    out = np.empty(n)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * Z[start:stop] @ Z.T
        d2 = np.maximum(d2, 0.0)
        d2[np.arange(stop - start), np.arange(start, stop)] = np.inf
        out[start:stop] = logsumexp(-0.5 * d2, axis=1)
    return ScoreVector(out - log_norm, LOWER_IS_OUTLIER, "kde")


DETECTORS = {
    "lof_5": lambda X, seed: lof_scores(X, 5),
    "lof_100": lambda X, seed: lof_scores(X, 100),
    "wknn_5": lambda X, seed: wknn_scores(X, 5),
    "wknn_100": lambda X, seed: wknn_scores(X, 100),
    "iforest": lambda X, seed: iforest_scores(X, 256, 100, seed),
    "kde": lambda X, seed: kde_scores(X),
}


def run_detector(method_id: str, data, seed: int = 0) -> ScoreVector:
    try:
        fn = DETECTORS[method_id]
    except KeyError:
        raise ValueError(f"unknown detector {method_id!r}; known: {sorted(DETECTORS)}") from None
    return fn(np.asarray(data, dtype=float), seed)
