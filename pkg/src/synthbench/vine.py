"""Regular vine copula with KDE marginals.

Structure is selected tree by tree as a maximum spanning tree on absolute
Kendall's tau (Dissmann's construction). Every edge carries a pair copula
chosen by BIC. Conditional pseudo-observations are tracked in a dictionary
keyed by ``(variable, conditioning set)`` so density evaluation, the
Rosenblatt transform and sampling share one bookkeeping scheme.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import kendalltau, rankdata

from .copulas import FAMILIES, PairCopula, clamp, select_pair_copula
from .marginals import MarginalKde, kde_marginal_fit, marginal_cdf, marginal_quantile

MAX_DIM = 30
MIN_ROWS = 30


class VineError(ValueError):
    pass


@dataclass(frozen=True)
class VineEdge:
    """Edge ``a,b | D`` of a vine tree; the copula's first argument is ``a``."""

    conditioned: tuple[int, int]
    conditioning: frozenset
    copula: PairCopula
    nodes: tuple[int, int]

    @property
    def full(self) -> frozenset:
        return frozenset(self.conditioned) | self.conditioning

    def to_dict(self) -> dict:
        return {"conditioned": list(self.conditioned),
                "conditioning": sorted(self.conditioning),
                "nodes": list(self.nodes), "copula": self.copula.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "VineEdge":
        return cls(tuple(d["conditioned"]), frozenset(d["conditioning"]),
                   PairCopula.from_dict(d["copula"]), tuple(d["nodes"]))


@dataclass(frozen=True)
class VineModel:
    marginals: tuple[MarginalKde, ...]
    trees: tuple[tuple[VineEdge, ...], ...]
    fit_stats: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        d = len(self.marginals)
        object.__setattr__(self, "marginals", tuple(self.marginals))
        object.__setattr__(self, "trees", tuple(tuple(t) for t in self.trees))
        if d < 2:
            raise VineError("a vine needs at least 2 variables")
        if len(self.trees) != d - 1:
            raise VineError(f"expected {d - 1} trees, got {len(self.trees)}")
        for k, tree in enumerate(self.trees):
            if len(tree) != d - 1 - k:
                raise VineError(f"tree {k + 1} must have {d - 1 - k} edges")
            for e in tree:
                if len(e.conditioning) != k:
                    raise VineError(f"tree {k + 1} edge has conditioning set of size "
                                    f"{len(e.conditioning)}")
        object.__setattr__(self, "_order", _sampling_order(self.trees, d))

    @property
    def d(self) -> int:
        return len(self.marginals)

    @property
    def edges(self) -> list[VineEdge]:
        return [e for tree in self.trees for e in tree]

    def gen(self, n: int, seed: int) -> np.ndarray:
        return vine_gen(self, n, seed)

    def logdens(self, X) -> np.ndarray:
        return vine_logdens(self, X)

    def to_dict(self) -> dict:
        return {"family": "vine",
                "marginals": [m.to_dict() for m in self.marginals],
                "trees": [[e.to_dict() for e in tree] for tree in self.trees]}

    @classmethod
    def from_dict(cls, d: dict) -> "VineModel":
        return cls(tuple(MarginalKde.from_dict(m) for m in d["marginals"]),
                   tuple(tuple(VineEdge.from_dict(e) for e in t) for t in d["trees"]))


def _key(var, cond) -> tuple:
    return (var, frozenset(cond))


def _edge_outputs(edge: VineEdge, ua, ub):
    """Conditional values ``u_{a|D,b}`` and ``u_{b|D,a}`` produced by an edge."""
    a, b = edge.conditioned
    pc = edge.copula
    return {_key(a, edge.conditioning | {b}): pc.hfunc1(ua, ub),
            _key(b, edge.conditioning | {a}): pc.hfunc2(ua, ub)}


def _kruskal(n_nodes: int, candidates):
    """Maximum spanning tree. ``candidates`` are (weight, tiebreak, i, j, payload)."""
    parent = list(range(n_nodes))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    chosen = []
    for c in sorted(candidates, key=lambda c: (-c[0], c[1])):
        ri, rj = find(c[2]), find(c[3])
        if ri != rj:
            parent[ri] = rj
            chosen.append(c)
            if len(chosen) == n_nodes - 1:
                break
    if len(chosen) != n_nodes - 1:
        raise VineError("proximity condition leaves the tree disconnected")
    return chosen


def _abs_tau(x, y) -> float:
    t = kendalltau(x, y).statistic
    return abs(float(t)) if np.isfinite(t) else 0.0


def vine_fit(data, family_set=FAMILIES, seed: int = 0) -> VineModel:
    """Fit KDE marginals and a regular vine copula to ``data``.

    ``seed`` is accepted for interface symmetry; the fit is deterministic.
    """
    X = np.asarray(data, dtype=float)
    if X.ndim != 2:
        raise VineError("data must be a 2-d matrix")
    n, d = X.shape
    if d < 2:
        raise VineError("vine_fit needs d >= 2")
    if d > MAX_DIM:
        raise VineError(f"vine_fit rejects d > {MAX_DIM} (got {d})")
    if n < MIN_ROWS:
        raise VineError(f"vine_fit needs at least {MIN_ROWS} rows")

    marginals = tuple(kde_marginal_fit(X[:, j]) for j in range(d))
    U = rankdata(X, axis=0) / (n + 1.0)
    cond = {_key(j, ()): U[:, j] for j in range(d)}

    trees: list[tuple[VineEdge, ...]] = []
    # nodes of tree 1 are the variables; later trees use previous edges
    prev_edges: list[VineEdge] | None = None
    for level in range(d - 1):
        cands = []
        if prev_edges is None:
            for i, j in itertools.combinations(range(d), 2):
                w = _abs_tau(cond[_key(i, ())], cond[_key(j, ())])
                cands.append((w, (i, j), i, j, ((i, j), frozenset())))
            n_nodes = d
        else:
            n_nodes = len(prev_edges)
            for i, j in itertools.combinations(range(n_nodes), 2):
                ei, ej = prev_edges[i], prev_edges[j]
                if not set(ei.nodes) & set(ej.nodes):
                    continue
                D = ei.full & ej.full
                a_set, b_set = ei.full - D, ej.full - D
                if len(a_set) != 1 or len(b_set) != 1:
                    continue
                a, b = next(iter(a_set)), next(iter(b_set))
                if a > b:
                    a, b = b, a
                w = _abs_tau(cond[_key(a, D)], cond[_key(b, D)])
                cands.append((w, (a, b, *sorted(D)), i, j, ((a, b), D)))
        chosen = _kruskal(n_nodes, cands)

        tree = []
        for _, _, i, j, (pair, D) in sorted(chosen, key=lambda c: c[1]):
            a, b = pair
            ua, ub = cond[_key(a, D)], cond[_key(b, D)]
            pc, _ = select_pair_copula(ua, ub, family_set)
            edge = VineEdge((a, b), frozenset(D), pc, (i, j))
            cond.update(_edge_outputs(edge, ua, ub))
            tree.append(edge)
        trees.append(tuple(tree))
        prev_edges = tree

    stats = {"n": n, "family_set": list(family_set)}
    return VineModel(marginals, tuple(trees), stats)


def _sampling_order(trees, d):
    """Elimination order for inverse-Rosenblatt sampling.

    Returns a list of ``(variable, chain)`` in sampling order, where ``chain``
    lists, for trees 1..k, the unique edge holding the variable in its
    conditioned set within the sub-vine of already sampled variables.
    """
    remaining = [list(t) for t in trees]
    eliminated = []
    for top in range(d - 2, -1, -1):
        assert len(remaining[top]) == 1
        found = None
        for v in sorted(remaining[top][0].conditioned, reverse=True):
            chain = []
            ok = True
            for level in range(top + 1):
                hits = [e for e in remaining[level] if v in e.conditioned]
                if len(hits) != 1 or any(v in e.conditioning for e in remaining[level]):
                    ok = False
                    break
                chain.append(hits[0])
            if ok:
                found = (v, chain)
                break
        if found is None:
            raise VineError("tree sequence is not a regular vine")
        v, chain = found
        for level, e in enumerate(chain):
            remaining[level].remove(e)
        eliminated.append((v, tuple(chain)))
    first = set(range(d)) - {v for v, _ in eliminated}
    order = [(first.pop(), ())]
    order.extend(reversed(eliminated))
    return order


def _partner(edge: VineEdge, v: int) -> int:
    a, b = edge.conditioned
    return b if v == a else a


def vine_inverse_rosenblatt(model: VineModel, W) -> np.ndarray:
    """Map independent uniforms to the copula scale of the vine."""
    W = clamp(np.atleast_2d(W))
    n = W.shape[0]
    cond: dict = {}
    for v, chain in model._order:
        u = W[:, v]
        vals = [None] * (len(chain) + 1)
        vals[len(chain)] = u
        for level in range(len(chain) - 1, -1, -1):
            e = chain[level]
            y = _partner(e, v)
            uy = cond[_key(y, e.conditioning)]
            if v == e.conditioned[0]:
                u = e.copula.hinv1(u, uy)
            else:
                u = e.copula.hinv2(u, uy)
            vals[level] = u
        cond[_key(v, ())] = vals[0]
        for level, e in enumerate(chain):
            a, b = e.conditioned
            uv = vals[level]
            uy = cond[_key(_partner(e, v), e.conditioning)]
            ua, ub = (uv, uy) if v == a else (uy, uv)
            cond.update(_edge_outputs(e, ua, ub))
    return np.column_stack([cond[_key(j, ())] for j in range(model.d)]).reshape(n, model.d)


def _forward(model: VineModel, U):
    """Propagate copula-scale data through all trees; returns (cond, log c)."""
    U = clamp(np.atleast_2d(U))
    cond = {_key(j, ()): U[:, j] for j in range(model.d)}
    logc = np.zeros(U.shape[0])
    for tree in model.trees:
        for e in tree:
            a, b = e.conditioned
            ua, ub = cond[_key(a, e.conditioning)], cond[_key(b, e.conditioning)]
            if e.copula.family != "independence":
                logc += e.copula.logpdf(ua, ub)
            cond.update(_edge_outputs(e, ua, ub))
    return cond, logc


def vine_rosenblatt(model: VineModel, U) -> np.ndarray:
    """Forward Rosenblatt transform on the copula scale (inverse of sampling)."""
    U = np.atleast_2d(U)
    cond, _ = _forward(model, U)
    W = np.empty_like(U, dtype=float)
    for v, chain in model._order:
        if chain:
            e = chain[-1]
            W[:, v] = cond[_key(v, e.conditioning | {_partner(e, v)})]
        else:
            W[:, v] = cond[_key(v, ())]
    return W


def vine_copula_logpdf(model: VineModel, U) -> np.ndarray:
    return _forward(model, U)[1]


def vine_gen(model: VineModel, n: int, seed: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    W = rng.uniform(size=(n, model.d))
    U = vine_inverse_rosenblatt(model, W)
    return np.column_stack([marginal_quantile(m, clamp(U[:, j]))
                            for j, m in enumerate(model.marginals)])


def to_copula_scale(model: VineModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.column_stack([marginal_cdf(m, X[:, j]) for j, m in enumerate(model.marginals)])


def vine_logdens(model: VineModel, data) -> np.ndarray:
    """``sum_i ln f_i(x_i) + sum_edges ln c_e`` with ``u_i = F_i(x_i)``."""
    X = np.atleast_2d(np.asarray(data, dtype=float))
    if X.shape[1] != model.d:
        raise ValueError(f"expected {model.d} columns, got {X.shape[1]}")
    logf = np.zeros(X.shape[0])
    for j, m in enumerate(model.marginals):
        logf += m.logpdf(X[:, j])
    return logf + vine_copula_logpdf(model, to_copula_scale(model, X))


def vine_modify_independence(model: VineModel) -> VineModel:
    """Keep marginals and tree structure, set every pair copula to independence."""
    indep = PairCopula()
    trees = tuple(tuple(replace(e, copula=indep) for e in tree) for tree in model.trees)
    return VineModel(model.marginals, trees, {"modified_from": "independence"})
