"""Binary random forest: bagged Gini trees grown to purity."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Tree:
    feature: np.ndarray     # -1 marks a leaf
    threshold: np.ndarray   # go left when x <= threshold
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray      # (n_nodes, 2): regular, outlier

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    def leaves(self, X) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=int)
        while True:
            idx = np.flatnonzero(self.feature[node] >= 0)
            if idx.size == 0:
                return node
            cur = node[idx]
            go_left = X[idx, self.feature[cur]] <= self.threshold[cur]
            node[idx] = np.where(go_left, self.left[cur], self.right[cur])

    def vote(self, X) -> np.ndarray:
        c = self.counts[self.leaves(X)]
        return c[:, 1] > c[:, 0]


@dataclass(frozen=True)
class Forest:
    trees: tuple
    ntrees: int
    mtry: int
    seed: int
    d: int
    oob_error: float = math.nan
    stats: dict = field(default_factory=dict)


def _best_split(x, y):
    """Minimum weighted Gini split of one feature; None if the feature is constant."""
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    cut = np.flatnonzero(xs[1:] > xs[:-1])
    if cut.size == 0:
        return None
    n = xs.size
    pos = np.cumsum(ys)[cut]
    n_left = cut + 1.0
    n_right = n - n_left
    pos_right = ys.sum() - pos
    # n * Gini = 2 * pos * neg / n, summed over both sides
    impurity = pos * (n_left - pos) / n_left + pos_right * (n_right - pos_right) / n_right
    i = int(np.argmin(impurity))
    a, b = xs[cut[i]], xs[cut[i] + 1]
    thr = a + (b - a) / 2.0
    if not a <= thr < b:
        thr = a
    return float(impurity[i]), float(thr)


def _grow(X, y, rng, mtry) -> Tree:
    feature, threshold, left, right, counts = [], [], [], [], []

    def new(rows):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        pos = int(y[rows].sum())
        counts.append((rows.size - pos, pos))
        return len(feature) - 1

    d = X.shape[1]
    stack = [(new(np.arange(X.shape[0])), np.arange(X.shape[0]))]
    while stack:
        node, rows = stack.pop()
        neg, pos = counts[node]
        if neg == 0 or pos == 0:
            continue
        perm = rng.permutation(d)
        best = None
        # fall back to the unsampled features only if none of the sampled ones splits
        for group in (perm[:mtry], perm[mtry:]):
            for f in group:
                found = _best_split(X[rows, f], y[rows])
                if found is not None and (best is None or found[0] < best[0]):
                    best = (found[0], found[1], int(f))
            if best is not None:
                break
        if best is None:
            continue
        _, thr, f = best
        go_left = X[rows, f] <= thr
        lrows, rrows = rows[go_left], rows[~go_left]
        feature[node], threshold[node] = f, thr
        left[node], right[node] = new(lrows), new(rrows)
        stack.append((left[node], lrows))
        stack.append((right[node], rrows))
    return Tree(np.array(feature), np.array(threshold), np.array(left), np.array(right),
                np.array(counts, dtype=np.int64).reshape(-1, 2))


def rf_train(X, y, ntrees: int = 100, seed: int = 0, mtry: int | None = None) -> Forest:
    """Bootstrap ``ntrees`` trees, sampling ``ceil(sqrt(d))`` features per split."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y).astype(bool).ravel()
    n, d = X.shape
    if y.size != n:
        raise ValueError("labels must have one entry per row")
    if y.all() or not y.any():
        raise ValueError("training data must contain both classes")
    if ntrees < 1:
        raise ValueError("ntrees must be positive")
    mtry = mtry or math.ceil(math.sqrt(d))
    rng = np.random.default_rng(seed)
    yi = y.astype(np.int64)
    trees = []
    oob_votes = np.zeros((n, 2), dtype=np.int64)
    for _ in range(ntrees):
        boot = rng.integers(0, n, size=n)
        tree = _grow(X[boot], yi[boot], rng, mtry)
        trees.append(tree)
        oob = np.ones(n, dtype=bool)
        oob[boot] = False
        if oob.any():
            v = tree.vote(X[oob])
            np.add.at(oob_votes, (np.flatnonzero(oob), v.astype(int)), 1)
    seen = oob_votes.sum(axis=1) > 0
    oob_pred = oob_votes[:, 1] > oob_votes[:, 0]
    oob_error = float(np.mean(oob_pred[seen] != y[seen])) if seen.any() else math.nan
    return Forest(tuple(trees), ntrees, mtry, seed, d, oob_error)


def rf_predict(forest: Forest, X) -> np.ndarray:
    """Majority vote over trees; an even split predicts regular."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != forest.d:
        raise ValueError(f"expected {forest.d} columns, got {X.shape[1]}")
    votes = np.zeros(X.shape[0], dtype=np.int64)
    for tree in forest.trees:
        votes += tree.vote(X)
    return 2 * votes > len(forest.trees)
