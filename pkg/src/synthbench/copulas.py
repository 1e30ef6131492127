"""One-parameter bivariate copula families with rotations.

Conventions: for a copula ``C(u, v)``

* ``hfunc1(u, v) = dC/dv = P(U <= u | V = v)``
* ``hfunc2(u, v) = dC/du = P(V <= v | U = u)``

Base families are exchangeable, so only ``H(u, v) = dC/dv`` is coded per
family. Rotations by 90/180/270 degrees follow the usual survival
constructions; 90 and 270 model negative dependence for Clayton and Gumbel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize
from scipy.special import ndtr, ndtri
from scipy.stats import kendalltau

FAMILIES = ("independence", "gaussian", "clayton", "gumbel", "frank")
ROTATIONS = (0, 90, 180, 270)
EPS = 1e-10

BOUNDS = {
    "gaussian": (-0.999, 0.999),
    "clayton": (1e-4, 28.0),
    "gumbel": (1.0, 17.0),
    "frank": (-35.0, 35.0),
}
_BISECT_ITERS = 64


def clamp(u):
    return np.clip(np.asarray(u, dtype=float), EPS, 1.0 - EPS)


# --- base families: log density and H(u, v) = dC/dv ---------------------------

def _gauss_logpdf(u, v, rho):
    x, y = ndtri(u), ndtri(v)
    r2 = 1.0 - rho * rho
    return -0.5 * math.log(r2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2)


def _gauss_h(u, v, rho):
    return ndtr((ndtri(u) - rho * ndtri(v)) / math.sqrt(1.0 - rho * rho))


def _gauss_hinv(w, v, rho):
    return ndtr(ndtri(w) * math.sqrt(1.0 - rho * rho) + rho * ndtri(v))


def _clayton_logs(u, v, th):
    a = -th * np.log(u)
    b = -th * np.log(v)
    m = np.maximum(a, b)
    # log(u^-th + v^-th - 1), stable for large exponents
    return m + np.log(np.exp(a - m) + np.exp(b - m) - np.exp(-m))


def _clayton_logpdf(u, v, th):
    logs = _clayton_logs(u, v, th)
    return math.log1p(th) - (1.0 + th) * (np.log(u) + np.log(v)) - (2.0 + 1.0 / th) * logs


def _clayton_h(u, v, th):
    logs = _clayton_logs(u, v, th)
    return np.exp(-(th + 1.0) * np.log(v) - (1.0 + 1.0 / th) * logs)


def _gumbel_parts(u, v, th):
    x, y = -np.log(u), -np.log(v)
    lx, ly = np.log(x), np.log(y)
    logS = np.logaddexp(th * lx, th * ly)
    A = np.exp(logS / th)
    return x, y, lx, ly, logS, A


def _gumbel_logpdf(u, v, th):
    x, y, lx, ly, logS, A = _gumbel_parts(u, v, th)
    return (-A + x + y + (th - 1.0) * (lx + ly) + (1.0 / th - 2.0) * logS
            + np.log(A + th - 1.0))


def _gumbel_h(u, v, th):
    x, y, lx, ly, logS, A = _gumbel_parts(u, v, th)
    return np.exp(-A + y + (th - 1.0) * ly + (1.0 / th - 1.0) * logS)


def _frank_logpdf(u, v, th):
    em = np.expm1(-th)
    num = math.log(abs(th * -em)) - th * (u + v)
    den = -em - np.expm1(-th * u) * np.expm1(-th * v)
    return num - 2.0 * np.log(np.abs(den))


def _frank_h(u, v, th):
    a = np.expm1(-th * u)
    b = np.expm1(-th * v)
    return np.exp(-th * v) * a / (np.expm1(-th) + a * b)


_BASE = {
    "gaussian": (_gauss_logpdf, _gauss_h),
    "clayton": (_clayton_logpdf, _clayton_h),
    "gumbel": (_gumbel_logpdf, _gumbel_h),
    "frank": (_frank_logpdf, _frank_h),
}


# --- Kendall's tau <-> parameter -----------------------------------------------

def _debye1(th: float) -> float:
    if th == 0:
        return 1.0
    val, _ = integrate.quad(lambda t: t / math.expm1(t) if t != 0 else 1.0, 0.0, th)
    return val / th


def tau_of(family: str, theta: float | None) -> float:
    """Kendall's tau of an unrotated family."""
    if family == "independence":
        return 0.0
    if family == "gaussian":
        return 2.0 / math.pi * math.asin(theta)
    if family == "clayton":
        return theta / (theta + 2.0)
    if family == "gumbel":
        return 1.0 - 1.0 / theta
    if family == "frank":
        return 1.0 - 4.0 / theta * (1.0 - _debye1(theta))
    raise ValueError(family)


@lru_cache(maxsize=4096)
def _frank_theta(tau: float) -> float:
    if tau == 0:
        return 0.0
    lo, hi = BOUNDS["frank"]
    t_lo, t_hi = tau_of("frank", lo), tau_of("frank", hi)
    if tau <= t_lo:
        return lo
    if tau >= t_hi:
        return hi
    return optimize.brentq(lambda t: tau_of("frank", t) - tau, lo, hi, xtol=1e-12)


def theta_from_tau(family: str, tau: float) -> float | None:
    """Invert Kendall's tau for an unrotated family, clipped to admissible bounds."""
    if family == "independence":
        return None
    lo, hi = BOUNDS[family]
    if family == "gaussian":
        th = math.sin(math.pi * tau / 2.0)
    elif family == "clayton":
        th = 2.0 * tau / (1.0 - tau) if tau < 1 else hi
    elif family == "gumbel":
        th = 1.0 / (1.0 - tau) if tau < 1 else hi
    else:
        th = _frank_theta(round(float(tau), 12))
    return float(min(max(th, lo), hi))


# --- rotated pair copula ---------------------------------------------------------

@dataclass(frozen=True)
class PairCopula:
    family: str = "independence"
    rotation: int = 0
    theta: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.rotation not in ROTATIONS:
            raise ValueError(f"rotation must be one of {ROTATIONS}")
        if self.family == "independence":
            if self.theta is not None:
                raise ValueError("independence copula takes no parameter")
            if self.rotation:
                raise ValueError("independence copula has no rotation")
            return
        if self.theta is None or not np.isfinite(self.theta):
            raise ValueError(f"{self.family} copula needs a finite parameter")
        th = float(self.theta)
        object.__setattr__(self, "theta", th)
        if self.family in ("gaussian", "frank") and self.rotation:
            raise ValueError(f"{self.family} copula is not rotated")
        if self.family == "gaussian" and not -1.0 < th < 1.0:
            raise ValueError("gaussian copula needs rho in (-1, 1)")
        if self.family == "clayton" and not th > 0:
            raise ValueError("clayton copula needs theta > 0")
        if self.family == "gumbel" and not th >= 1:
            raise ValueError("gumbel copula needs theta >= 1")
        if self.family == "frank" and th == 0:
            raise ValueError("frank copula needs theta != 0")

    @property
    def n_params(self) -> int:
        return 0 if self.family == "independence" else 1

    @property
    def tau(self) -> float:
        t = tau_of(self.family, self.theta)
        return -t if self.rotation in (90, 270) else t

    def logpdf(self, u, v):
        u, v = clamp(u), clamp(v)
        if self.family == "independence":
            return np.zeros(np.broadcast(u, v).shape)
        lp, _ = _BASE[self.family]
        r, th = self.rotation, self.theta
        if r == 0:
            return lp(u, v, th)
        if r == 90:
            return lp(1.0 - u, v, th)
        if r == 180:
            return lp(1.0 - u, 1.0 - v, th)
        return lp(u, 1.0 - v, th)

    def pdf(self, u, v):
        return np.exp(self.logpdf(u, v))

    def hfunc1(self, u, v):
        """P(U <= u | V = v)."""
        u, v = clamp(u), clamp(v)
        if self.family == "independence":
            return np.broadcast_to(u, np.broadcast(u, v).shape).copy()
        _, H = _BASE[self.family]
        r, th = self.rotation, self.theta
        if r == 0:
            out = H(u, v, th)
        elif r == 90:
            out = 1.0 - H(1.0 - u, v, th)
        elif r == 180:
            out = 1.0 - H(1.0 - u, 1.0 - v, th)
        else:
            out = H(u, 1.0 - v, th)
        return clamp(out)

    def hfunc2(self, u, v):
        """P(V <= v | U = u)."""
        u, v = clamp(u), clamp(v)
        if self.family == "independence":
            return np.broadcast_to(v, np.broadcast(u, v).shape).copy()
        _, H = _BASE[self.family]
        r, th = self.rotation, self.theta
        if r == 0:
            out = H(v, u, th)
        elif r == 90:
            out = H(v, 1.0 - u, th)
        elif r == 180:
            out = 1.0 - H(1.0 - v, 1.0 - u, th)
        else:
            out = 1.0 - H(1.0 - v, u, th)
        return clamp(out)

    def hinv1(self, w, v):
        """Solve ``hfunc1(u, v) = w`` for u."""
        w, v = clamp(w), clamp(v)
        if self.family == "independence":
            return np.broadcast_to(w, np.broadcast(w, v).shape).copy()
        if self.family == "gaussian":
            return clamp(_gauss_hinv(w, v, self.theta))
        return _bisect(lambda u: self.hfunc1(u, v), w)

    def hinv2(self, w, u):
        """Solve ``hfunc2(u, v) = w`` for v."""
        w, u = clamp(w), clamp(u)
        if self.family == "independence":
            return np.broadcast_to(w, np.broadcast(w, u).shape).copy()
        if self.family == "gaussian":
            return clamp(_gauss_hinv(w, u, self.theta))
        return _bisect(lambda v: self.hfunc2(u, v), w)

    def to_dict(self) -> dict:
        return {"family": self.family, "rotation": self.rotation, "theta": self.theta}

    @classmethod
    def from_dict(cls, d: dict) -> "PairCopula":
        return cls(d["family"], int(d.get("rotation", 0)), d.get("theta"))


def _bisect(fn, target):
    target = np.asarray(target, dtype=float)
    lo = np.zeros_like(target)
    hi = np.ones_like(target)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        below = fn(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return clamp(0.5 * (lo + hi))


def pair_copula_eval(pc: PairCopula, u, v):
    """Density, ``dC/dv`` and ``dC/du`` at (u, v)."""
    return pc.pdf(u, v), pc.hfunc1(u, v), pc.hfunc2(u, v)


# --- fitting ---------------------------------------------------------------------

def _candidates(tau: float):
    yield "gaussian", 0
    yield "frank", 0
    rots = (0, 180) if tau >= 0 else (90, 270)
    for fam in ("clayton", "gumbel"):
        for r in rots:
            yield fam, r


def _loglik(family, rotation, theta, u, v):
    try:
        pc = PairCopula(family, rotation, theta)
    except ValueError:
        return -np.inf
    ll = float(np.sum(pc.logpdf(u, v)))
    return ll if np.isfinite(ll) else -np.inf


def fit_family(family: str, rotation: int, u, v, tau: float, xatol: float = 1e-6):
    """Maximum likelihood estimate of one family/rotation.

    The Kendall-tau inversion gives the starting value; a bounded
    golden-section/parabolic search over the admissible range refines it.
    """
    abs_tau = abs(tau)
    lo, hi = BOUNDS[family]
    if family == "gaussian":
        start = theta_from_tau(family, tau)
    elif family == "frank":
        start = theta_from_tau(family, tau)
        if start == 0:
            start = 1e-3
        lo, hi = (1e-4, hi) if tau >= 0 else (lo, -1e-4)
    else:
        start = theta_from_tau(family, abs_tau)

    res = optimize.minimize_scalar(lambda t: -_loglik(family, rotation, t, u, v),
                                   bounds=(lo, hi), method="bounded",
                                   options={"xatol": xatol})
    theta, ll = float(res.x), -float(res.fun)
    ll_start = _loglik(family, rotation, start, u, v)
    if ll_start > ll:
        theta, ll = start, ll_start
    return PairCopula(family, rotation, theta), ll


def select_pair_copula(u, v, family_set=FAMILIES, tau: float | None = None):
    """Choose family and rotation by minimal BIC. Returns (copula, info)."""
    u, v = clamp(u), clamp(v)
    n = u.size
    if tau is None:
        tau = float(kendalltau(u, v).statistic)
        if not np.isfinite(tau):
            tau = 0.0
    log_n = math.log(n)
    best, best_bic = None, np.inf
    table = []
    if "independence" in family_set:
        best, best_bic = PairCopula(), 0.0
        table.append(("independence", 0, None, 0.0))
    for family, rotation in _candidates(tau):
        if family not in family_set:
            continue
        pc, ll = fit_family(family, rotation, u, v, tau)
        bic = -2.0 * ll + log_n * pc.n_params
        table.append((family, rotation, pc.theta, bic))
        if bic < best_bic:
            best, best_bic = pc, bic
    if best is None:
        raise ValueError("empty family set")
    return best, {"tau": tau, "bic": best_bic, "candidates": table}
