"""Gaussian mixtures with diagonal covariance configurations, fitted by EM.

Four covariance configurations are supported (mclust names in brackets):

* ``spherical-equal`` (EII): one variance shared by all components
* ``spherical-varying`` (VII): one variance per component
* ``diagonal-varying`` (VVI): free diagonal per component
* ``diagonal-equal-shape`` (VEI): ``Sigma_k = lambda_k * A`` with a shared
  diagonal shape ``A`` of unit determinant

The number of components is chosen by BIC.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import logsumexp

CONFIGS = ("spherical-equal", "spherical-varying", "diagonal-varying", "diagonal-equal-shape")
ALIASES = {"EII": "spherical-equal", "VII": "spherical-varying",
           "VVI": "diagonal-varying", "VEI": "diagonal-equal-shape"}
DEFAULT_CONFIGS = ("diagonal-equal-shape",)
DEFAULT_G_RANGE = tuple(range(1, 10))

TOL = 1e-8
MAX_ITER = 500
N_RESTARTS = 3
VAR_FLOOR = 1e-6
MAX_FLOOR_HITS = 3
SHAPE_TOL = 1e-6
SHAPE_MAX_ITER = 20

_LOG_2PI = math.log(2.0 * math.pi)


class GmmDegenerateError(RuntimeError):
    pass


def canonical_config(config: str) -> str:
    config = ALIASES.get(config, config)
    if config not in CONFIGS:
        raise ValueError(f"unknown covariance configuration {config!r}")
    return config


@dataclass(frozen=True)
class GmmModel:
    """Fitted mixture. ``variances`` holds the covariance diagonals, shape (G, d)."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    config: str = "diagonal-equal-shape"
    fit_stats: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        mu = np.atleast_2d(np.array(self.means, dtype=float))
        var = np.atleast_2d(np.array(self.variances, dtype=float))
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must be a non-empty vector")
        if mu.shape != (w.size, mu.shape[1]) or var.shape != mu.shape:
            raise ValueError("means and variances must have shape (G, d)")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be non-negative and sum to 1")
        if np.any(var < 1e-9):
            raise ValueError("variances must be at least 1e-9")
        canonical_config(self.config)
        for a in (w, mu, var):
            a.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "variances", var)
        object.__setattr__(self, "config", canonical_config(self.config))

    @property
    def G(self) -> int:
        return self.weights.size

    @property
    def d(self) -> int:
        return self.means.shape[1]

    @property
    def covariances(self) -> np.ndarray:
        return np.stack([np.diag(v) for v in self.variances])

    def gen(self, n: int, seed: int) -> np.ndarray:
        return gmm_gen(self, n, seed)

    def logdens(self, X) -> np.ndarray:
        return gmm_logdens(self, X)

    def to_dict(self) -> dict:
        return {"family": "gmm", "config": self.config, "weights": self.weights.tolist(),
                "means": self.means.tolist(), "variances": self.variances.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "GmmModel":
        return cls(np.array(d["weights"]), np.array(d["means"]), np.array(d["variances"]),
                   d.get("config", "diagonal-equal-shape"))


def n_free_params(G: int, d: int, config: str) -> int:
    config = canonical_config(config)
    base = (G - 1) + G * d
    return base + {
        "spherical-equal": 1,
        "spherical-varying": G,
        "diagonal-varying": G * d,
        "diagonal-equal-shape": G + (d - 1),
    }[config]


def _component_logpdf_t(XT, means, variances):
    """(G, n) matrix of ln N(x_i; mu_k, diag(var_k)) from the (d, n) transposed data."""
    quad = np.zeros((means.shape[0], XT.shape[1]))
    # (G, n) layout: per-component rows stay contiguous for the reductions
    for j in range(XT.shape[0]):
        diff = XT[j][None, :] - means[:, j, None]
        quad += diff * diff / variances[:, j, None]
    logdet = np.sum(np.log(variances), axis=1)
    return -0.5 * (XT.shape[0] * _LOG_2PI + logdet[:, None] + quad)


def _component_logpdf(X, means, variances):
    """(n, G) matrix of ln N(x_i; mu_k, diag(var_k))."""
    return _component_logpdf_t(np.ascontiguousarray(X.T), means, variances).T


def _estep(XT, weights, means, variances):
    """Responsibilities as a (G, n) matrix and the total log-likelihood."""
    with np.errstate(divide="ignore"):
        logw = np.log(weights)
    joint = _component_logpdf_t(XT, means, variances) + logw[:, None]
    top = joint.max(axis=0)
    resp = np.exp(joint - top)
    total = resp.sum(axis=0)
    resp /= total
    return resp, float(np.sum(top + np.log(total)))


class _Floor:
    def __init__(self):
        self.hit = False

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        if np.any(v < VAR_FLOOR):
            self.hit = True
            return np.maximum(v, VAR_FLOOR)
        return v


def _mstep(XT, resp, config, shape, floor):
    """Exact (coordinate-wise) maximisation of the expected complete log-likelihood.

    ``resp`` is (G, n). Returns weights, means, variances and the updated
    shared shape (VEI only).
    """
    d, n = XT.shape
    nk = resp.sum(axis=1)
    weights = nk / n
    means = (resp @ XT.T) / nk[:, None]
    # weighted scatter per component and coordinate, shape (G, d)
    W = np.empty_like(means)
    for j in range(d):
        diff = XT[j][None, :] - means[:, j, None]
        W[:, j] = np.einsum("ki,ki->k", resp, diff * diff)
    G = nk.size

    if config == "spherical-equal":
        s2 = floor(W.sum() / (n * d))
        variances = np.full((G, d), float(s2))
    elif config == "spherical-varying":
        s2 = floor(W.sum(axis=1) / (nk * d))
        variances = np.repeat(s2[:, None], d, axis=1)
    elif config == "diagonal-varying":
        variances = floor(W / nk[:, None])
    else:
        A = shape.copy()
        for _ in range(SHAPE_MAX_ITER):
            lam = np.sum(W / A[None, :], axis=1) / (d * nk)
            B = np.sum(W / lam[:, None], axis=0)
            A_new = B / math.exp(np.mean(np.log(B)))
            delta = np.max(np.abs(A_new - A) / A)
            A = A_new
            if delta < SHAPE_TOL:
                break
        lam = np.sum(W / A[None, :], axis=1) / (d * nk)
        variances = lam[:, None] * A[None, :]
        if np.any(variances < VAR_FLOOR):
            floor.hit = True
            variances = np.maximum(variances, VAR_FLOOR)
        shape = A
    return weights, means, variances, shape


def _kmeanspp(X, G, rng):
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for _ in range(1, G):
        total = d2.sum()
        if not total > 0:
            raise GmmDegenerateError("fewer distinct points than components")
        idx = rng.choice(n, p=d2 / total)
        centers.append(X[idx])
        d2 = np.minimum(d2, np.sum((X - X[idx]) ** 2, axis=1))
    return np.array(centers)


def _run_em(X, G, config, rng, tol=TOL, max_iter=MAX_ITER):
    n, d = X.shape
    centers = _kmeanspp(X, G, rng)
    dist = np.sum((X[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    resp = np.zeros((G, n))
    resp[np.argmin(dist, axis=1), np.arange(n)] = 1.0
    XT = np.ascontiguousarray(X.T)

    min_weight = 2.0 / n
    shape = np.ones(d)
    history: list[float] = []
    floor_hits = 0
    loglik = -np.inf
    for it in range(max_iter):
        if np.any(resp.sum(axis=1) < min_weight * n):
            raise GmmDegenerateError(f"component weight below 2/n (G={G}, {config})")
        floor = _Floor()
        weights, means, variances, shape = _mstep(XT, resp, config, shape, floor)
        if floor.hit:
            floor_hits += 1
            if floor_hits >= MAX_FLOOR_HITS:
                raise GmmDegenerateError(f"variance floor hit repeatedly (G={G}, {config})")
        resp, new_loglik = _estep(XT, weights, means, variances)
        history.append(new_loglik)
        converged = abs(new_loglik - loglik) < tol * abs(new_loglik)
        loglik = new_loglik
        if converged:
            break
    if not np.isfinite(loglik):
        raise GmmDegenerateError("non-finite log-likelihood")
    return weights, means, variances, loglik, history


def gmm_fit_fixed(X, G: int, config: str = "diagonal-equal-shape", seed: int = 0,
                  n_restarts: int = N_RESTARTS, tol: float = TOL,
                  max_iter: int = MAX_ITER) -> GmmModel:
    """EM for a single (G, configuration) candidate; best of ``n_restarts`` runs."""
    X = np.asarray(X, dtype=float)
    config = canonical_config(config)
    rng = np.random.default_rng(seed)
    best = None
    errors = []
    for _ in range(n_restarts):
        try:
            res = _run_em(X, G, config, rng, tol, max_iter)
        except GmmDegenerateError as exc:
            errors.append(str(exc))
            continue
        if best is None or res[3] > best[3]:
            best = res
    if best is None:
        raise GmmDegenerateError("; ".join(sorted(set(errors))))
    weights, means, variances, loglik, history = best
    n, d = X.shape
    p = n_free_params(G, d, config)
    stats = {"loglik": loglik, "bic": -2.0 * loglik + p * math.log(n),
             "n_params": p, "n_iter": len(history), "loglik_history": history}
    return GmmModel(weights / weights.sum(), means, variances, config, stats)


def gmm_fit(data, G_range=DEFAULT_G_RANGE, configs=DEFAULT_CONFIGS, seed: int = 0) -> GmmModel:
    """Fit every (G, configuration) candidate and return the one with minimal BIC.

    BIC is ``-2 * loglik + p * ln(n)``. Degenerate candidates are skipped; if
    all of them degenerate, :class:`GmmDegenerateError` is raised.
    """
    X = np.asarray(data, dtype=float)
    if X.ndim != 2:
        raise ValueError("data must be a 2-d matrix")
    n, d = X.shape
    if n <= d:
        raise ValueError("gmm_fit needs more rows than columns")
    if not np.all(np.isfinite(X)):
        raise ValueError("data must be finite")

    seeds = np.random.SeedSequence(seed)
    candidates = []
    failures = {}
    best = None
    for config in configs:
        config = canonical_config(config)
        for G, ss in zip(G_range, seeds.spawn(len(G_range))):
            key = f"{config}:{G}"
            try:
                model = gmm_fit_fixed(X, G, config, seed=int(ss.generate_state(1)[0]))
            except GmmDegenerateError as exc:
                failures[key] = str(exc)
                continue
            candidates.append({"G": G, "config": config, "bic": model.fit_stats["bic"],
                               "loglik": model.fit_stats["loglik"]})
            if best is None or model.fit_stats["bic"] < best.fit_stats["bic"]:
                best = model
    if best is None:
        raise GmmDegenerateError(f"all mixture candidates degenerate: {failures}")
    stats = dict(best.fit_stats, candidates=candidates, failures=failures)
    return replace(best, fit_stats=stats)


def gmm_gen(model: GmmModel, n: int, seed: int, return_components: bool = False):
    """Draw ``n`` rows: component index from the weights, then a normal draw."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    comp = rng.choice(model.G, size=n, p=model.weights)
    z = rng.standard_normal((n, model.d))
    X = model.means[comp] + np.sqrt(model.variances[comp]) * z
    if return_components:
        return X, comp
    return X


def gmm_logdens(model: GmmModel, data) -> np.ndarray:
    X = np.atleast_2d(np.asarray(data, dtype=float))
    if X.shape[1] != model.d:
        raise ValueError(f"expected {model.d} columns, got {X.shape[1]}")
    with np.errstate(divide="ignore"):
        logw = np.log(model.weights)
    return logsumexp(_component_logpdf(X, model.means, model.variances) + logw, axis=1)


def gmm_modify_local(model: GmmModel, alpha: float = 5.0) -> GmmModel:
    """Same mixture with every covariance scaled by ``alpha``."""
    if not alpha > 1.0:
        raise ValueError("alpha must exceed 1")
    return GmmModel(model.weights, model.means, model.variances * alpha, model.config,
                    {"modified_from": "local", "alpha": alpha})
