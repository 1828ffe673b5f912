"""Bi-s*-concavity machinery.

A distribution function F is bi-s*-concave for index s in (-1, inf],
s* = s/(1+s), when

* s < 0:  F^(s*) and (1-F)^(s*) are convex on J(F);
* s = 0:  log F and log(1-F) are concave on J(F);
* s > 0:  F^(s*) is concave on (inf J(F), inf) and (1-F)^(s*) is concave
  on (-inf, sup J(F)).

Three independent checkers certify the property on a quantile grid:

``check_condition_iv``
    The derivative corridor -(1-s*) f^2/(1-F) <= f' <= (1-s*) f^2/F.
``check_condition_iii``
    Monotonicity of the s*-hazard f/(1-F)^(1-s*) (non-decreasing) and the
    reverse s*-hazard f/F^(1-s*) (non-increasing).
``check_midpoint``
    The definition-level midpoint inequality F((x+y)/2) >= M_{s*}(F(x),
    F(y); 1/2), together with the same for 1-F, where M is the generalized
    (power) mean.  This checker is derivative-free and acts as the oracle
    for the other two.

``cr_report`` evaluates the Csorgo-Revesz functionals

    CR(x)     = F(x)(1-F(x)) f'(x)/f(x)^2
    CR_min(x) = min(F(x), 1-F(x)) f'(x)/f(x)^2

whose suprema (gamma and gamma-tilde) are bounded by 1/(1+s) on the
bi-s*-concave class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .catalog import Distribution
from .errors import BracketError, DomainError
from .numerics import bisect_boundary, maximize_scalar

__all__ = [
    "ConcavityIndex",
    "to_index",
    "from_star",
    "Grid",
    "make_grid",
    "Certificate",
    "CRReport",
    "generalized_mean",
    "cr",
    "cr_min",
    "cr_right",
    "cr_left",
    "cr_report",
    "s_star_hazard",
    "reverse_s_star_hazard",
    "check_condition_iv",
    "check_condition_iii",
    "check_midpoint",
    "max_s",
    "delta_threshold",
    "DEFAULT_GRID_POINTS",
    "DEFAULT_EPS",
    "DEFAULT_TOL",
]

DEFAULT_GRID_POINTS = 2000
DEFAULT_EPS = 1e-8
DEFAULT_TOL = 1e-9

_PAIR_BUDGET = 20000
_PAIR_SEED = 181181
_ALL_PAIRS_LIMIT = 200


@dataclass(frozen=True)
class ConcavityIndex:
    """The pair (s, s*) with s in (-1, inf] and s* = s/(1+s) in (-inf, 1]."""

    s: float
    s_star: float

    @property
    def one_minus_star(self) -> float:
        """1 - s* = 1/(1+s); the corridor width factor."""
        return 1.0 - self.s_star


def to_index(s: float) -> ConcavityIndex:
    """Build the index pair from s; s = inf maps to s* = 1."""
    if math.isnan(s) or s <= -1.0:
        raise DomainError("s must lie in (-1, inf]")
    if math.isinf(s):
        return ConcavityIndex(s=math.inf, s_star=1.0)
    if s > 1.0:
        # 1 - 1/(1+s) stays within ~half an ulp for large s, where the
        # direct quotient's rounding would be amplified by (1+s) on the
        # way back through from_star
        return ConcavityIndex(s=s, s_star=1.0 - 1.0 / (1.0 + s))
    return ConcavityIndex(s=s, s_star=s / (1.0 + s))


def from_star(s_star: float) -> ConcavityIndex:
    """Build the index pair from s*; s* = 1 maps to s = inf."""
    if math.isnan(s_star) or s_star > 1.0:
        raise DomainError("s_star must lie in (-inf, 1]")
    if s_star == 1.0:
        return ConcavityIndex(s=math.inf, s_star=1.0)
    return ConcavityIndex(s=s_star / (1.0 - s_star), s_star=s_star)


@dataclass(frozen=True)
class Grid:
    """Quantile-spaced evaluation abscissas strictly inside J(F).

    ``points`` are quantile(p_i) for p_i equispaced on [eps, 1-eps]; the two
    tails each exclude quantile mass eps.
    """

    points: np.ndarray
    eps: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 3:
            raise DomainError("grid needs at least 3 points")
        if not np.all(np.diff(pts) > 0.0):
            raise DomainError("grid points must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def count(self) -> int:
        return int(self.points.size)

    def to_dict(self) -> dict:
        return {"points": [float(v) for v in self.points],
                "eps": self.eps, "count": self.count}


def make_grid(d: Distribution, n: int = DEFAULT_GRID_POINTS,
              eps: float = DEFAULT_EPS) -> Grid:
    """Quantile-spaced grid of n points on [eps, 1-eps]."""
    if n < 3:
        raise DomainError("n must be >= 3")
    if not 0.0 < eps < 0.1:
        raise DomainError("eps must lie in (0, 0.1)")
    p = np.linspace(eps, 1.0 - eps, n)
    return Grid(points=d.quantile(p), eps=eps)


@dataclass(frozen=True)
class Certificate:
    """Verdict of a concavity check on a grid.

    ``margin`` is the worst signed slack in units of the local tolerance
    scale; negative means violation.  On failure ``witness`` is the
    offending abscissa (condition iv) or pair (conditions iii / midpoint),
    deterministic under ties (smallest abscissa).
    """

    verdict: str  # "pass" | "fail"
    condition: str  # "deriv_ineq_iv" | "hazard_mono_iii" | "midpoint_def"
    witness: float | tuple[float, float] | None
    margin: float
    grid: Grid
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        if self.witness is None:
            witness = None
        elif isinstance(self.witness, tuple):
            witness = [float(self.witness[0]), float(self.witness[1])]
        else:
            witness = float(self.witness)
        return {"verdict": self.verdict, "condition": self.condition,
                "witness": witness, "margin": float(self.margin),
                "grid": self.grid.to_dict(), "tolerance": self.tolerance}


@dataclass(frozen=True)
class CRReport:
    """Grid-refined suprema of |CR| and |CR_min| with the theoretical cap."""

    gamma: float
    gamma_tilde: float
    argmax_gamma: float
    theoretical_cap: float

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "gamma_tilde": self.gamma_tilde,
                "argmax_gamma": self.argmax_gamma,
                "theoretical_cap": self.theoretical_cap}


# -- generalized mean --------------------------------------------------------

def generalized_mean(a, b, theta: float, t: float):
    """Power mean M_t(a, b; theta) of non-negative inputs.

    Branches: ((1-theta) a^t + theta b^t)^(1/t) for finite non-zero t,
    the geometric mean a^(1-theta) b^theta for t = 0, max for t = +inf and
    min for t = -inf.  For t <= 0 with a zero input the limit convention
    M = 0 applies.  Continuous in t at 0 (evaluated via expm1/log1p).
    """
    if not 0.0 < theta < 1.0:
        raise DomainError("theta must lie in (0, 1)")
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    if np.any(a_arr < 0.0) or np.any(b_arr < 0.0):
        raise DomainError("a and b must be >= 0")
    scalar = np.ndim(a) == 0 and np.ndim(b) == 0
    a_arr, b_arr = np.broadcast_arrays(np.atleast_1d(a_arr), np.atleast_1d(b_arr))

    if math.isinf(t):
        out = np.maximum(a_arr, b_arr) if t > 0 else np.minimum(a_arr, b_arr)
        return float(out[0]) if scalar else out

    zero = (a_arr == 0.0) | (b_arr == 0.0)
    safe_a = np.where(zero, 1.0, a_arr)
    safe_b = np.where(zero, 1.0, b_arr)
    la = np.log(safe_a)
    lb = np.log(safe_b)

    if t == 0.0:
        out = np.exp((1.0 - theta) * la + theta * lb)
    else:
        mu = (1.0 - theta) * la + theta * lb
        da = t * (la - mu)
        db = t * (lb - mu)
        small = (np.abs(da) < 1.0) & (np.abs(db) < 1.0)
        out = np.empty_like(mu)
        # near-geometric regime: expm1/log1p keeps the t -> 0 limit exact
        m = (1.0 - theta) * np.expm1(np.where(small, da, 0.0)) \
            + theta * np.expm1(np.where(small, db, 0.0))
        out[small] = np.exp(mu + np.log1p(np.maximum(m, -1.0)) / t)[small]
        if np.any(~small):
            big = ~small
            hi = np.maximum(da, db)
            lse = hi + np.log((1.0 - theta) * np.exp(da - hi)
                              + theta * np.exp(db - hi))
            out[big] = np.exp(mu + lse / t)[big]

    if t > 0.0:
        # one zero input with t > 0 still averages the surviving mass
        surv = np.where(a_arr == 0.0, theta * b_arr ** t,
                        (1.0 - theta) * a_arr ** t)
        out = np.where(zero, surv ** (1.0 / t), out)
        out = np.where(zero & ~(a_arr + b_arr > 0.0), 0.0, out)
    else:
        out = np.where(zero, 0.0, out)
    return float(out[0]) if scalar else out


# -- Csorgo-Revesz functionals ------------------------------------------------

def _fields(d: Distribution, x):
    f = d.pdf(x)
    if np.any(np.asarray(f) <= 0.0):
        raise DomainError("density must be positive at the evaluation point")
    return f, d.pdf_deriv(x), d.cdf(x), d.sf(x)


def cr(d: Distribution, x):
    """F (1-F) f'/f^2, evaluated as (F/f)(f'/f)(1-F) to survive deep tails."""
    f, fp, F, S = _fields(d, x)
    return (F / f) * (fp / f) * S


def cr_min(d: Distribution, x):
    """min(F, 1-F) f'/f^2."""
    f, fp, F, S = _fields(d, x)
    return (np.minimum(F, S) / f) * (fp / f)


def cr_right(d: Distribution, x):
    """(1-F) f'/f^2 (signed; negative where the density decreases)."""
    f, fp, _, S = _fields(d, x)
    return (S / f) * (fp / f)


def cr_left(d: Distribution, x):
    """F f'/f^2."""
    f, fp, F, _ = _fields(d, x)
    return (F / f) * (fp / f)


def cr_report(d: Distribution, s: float, grid: Grid) -> CRReport:
    """Grid suprema of |CR| and |CR_min|, refined around the best point.

    The refinement runs a seeded golden-section maximization between the
    grid neighbours of the argmax, so values attained in a tail limit are
    reported as the grid-refined maximum up to the truncation eps.
    """
    to_index(s)  # validate
    pts = grid.points

    def refine(values: np.ndarray, objective: Callable[[float], float]):
        i = int(np.argmax(values))
        lo = pts[max(i - 1, 0)]
        hi = pts[min(i + 1, grid.count - 1)]
        best_x, best_v = float(pts[i]), float(values[i])
        if hi > lo:
            res = maximize_scalar(objective, float(lo), float(hi),
                                  seed_points=33,
                                  tol=max((hi - lo) * 1e-8, 1e-13))
            if res.value > best_v:
                best_x, best_v = res.location, res.value
        return best_x, best_v

    abs_cr = np.abs(cr(d, pts))
    argmax_gamma, gamma = refine(abs_cr, lambda x: abs(cr(d, x)))
    abs_cr_min = np.abs(cr_min(d, pts))
    _, gamma_tilde = refine(abs_cr_min, lambda x: abs(cr_min(d, x)))
    gamma_tilde = max(gamma_tilde, gamma)  # F(1-F) <= min(F, 1-F) pointwise
    return CRReport(gamma=gamma, gamma_tilde=gamma_tilde,
                    argmax_gamma=argmax_gamma,
                    theoretical_cap=1.0 / (1.0 + s) if not math.isinf(s) else 0.0)


# -- hazards ------------------------------------------------------------------

def s_star_hazard(d: Distribution, s: float, x):
    """f/(1-F)^(1-s*); non-decreasing exactly on the bi-s*-concave class.

    May overflow to +inf in a deep tail when s is close to -1.
    """
    idx = to_index(s)
    f, _, _, S = _fields(d, x)
    with np.errstate(over="ignore"):
        return f * np.exp((idx.s_star - 1.0) * np.log(S))


def reverse_s_star_hazard(d: Distribution, s: float, x):
    """f/F^(1-s*); non-increasing exactly on the bi-s*-concave class.

    May overflow to +inf in a deep tail when s is close to -1.
    """
    idx = to_index(s)
    f, _, F, _ = _fields(d, x)
    with np.errstate(over="ignore"):
        return f * np.exp((idx.s_star - 1.0) * np.log(F))


# -- checkers -----------------------------------------------------------------

def check_condition_iv(d: Distribution, s: float, grid: Grid,
                       tol: float = DEFAULT_TOL) -> Certificate:
    """Check -(1-s*) f^2/(1-F) <= f' <= (1-s*) f^2/F on the grid.

    Slack is relative to the local bound magnitude
    (1-s*) f^2 max(1/F, 1/(1-F)); for s = inf the condition degenerates to
    f' = 0 and |f'| is compared against the same scale without the
    vanishing (1-s*) factor.
    """
    idx = to_index(s)
    pts = grid.points
    f, fp, F, S = _fields(d, pts)
    base = f * f / np.minimum(F, S)
    if math.isinf(idx.s):
        margins = -np.abs(fp) / base
    else:
        oms = idx.one_minus_star
        unit = oms * base
        hi_b = oms * f * f / F
        lo_b = -oms * f * f / S
        margins = np.minimum((hi_b - fp) / unit, (fp - lo_b) / unit)
    i = int(np.argmin(margins))
    margin = float(margins[i])
    if margin >= -tol:
        return Certificate("pass", "deriv_ineq_iv", None, margin, grid, tol)
    return Certificate("fail", "deriv_ineq_iv", float(pts[i]), margin, grid, tol)


def check_condition_iii(d: Distribution, s: float, grid: Grid,
                        tol: float = DEFAULT_TOL) -> Certificate:
    """Check the s*-hazard monotonicities on consecutive grid pairs.

    f/(1-F)^(1-s*) must be non-decreasing and f/F^(1-s*) non-increasing,
    each up to relative slack ``tol``.  The comparison runs on the hazard
    logarithms, which are immune to the overflow the hazards themselves
    suffer near s = -1 and whose consecutive differences agree with the
    relative-slack semantics to first order.
    """
    idx = to_index(s)
    pts = grid.points
    f = d.pdf(pts)
    if np.any(f <= 0.0):
        raise DomainError("density must be positive on the grid")
    log_f = np.log(f)
    lt = log_f + (idx.s_star - 1.0) * np.log(d.sf(pts))
    lh = log_f + (idx.s_star - 1.0) * np.log(d.cdf(pts))
    up = lt[1:] - lt[:-1]
    down = lh[:-1] - lh[1:]
    margins = np.minimum(up, down)
    i = int(np.argmin(margins))
    margin = float(margins[i])
    if margin >= -tol:
        return Certificate("pass", "hazard_mono_iii", None, margin, grid, tol)
    witness = (float(pts[i]), float(pts[i + 1]))
    return Certificate("fail", "hazard_mono_iii", witness, margin, grid, tol)


def _midpoint_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs i < j for the midpoint test.

    All pairs when n <= 200; otherwise a deterministic ~20000-pair sample:
    all lag-1 and lag-2 pairs, all pairs anchored at either grid end, and a
    lag-stratified random fill (fixed seed).
    """
    if n <= _ALL_PAIRS_LIMIT:
        return np.triu_indices(n, k=1)
    i_parts = [np.arange(n - 1), np.arange(n - 2),
               np.zeros(n - 1, dtype=int), np.arange(n - 1)]
    j_parts = [np.arange(1, n), np.arange(2, n),
               np.arange(1, n), np.full(n - 1, n - 1)]
    fixed = sum(p.size for p in i_parts)
    rest = max(_PAIR_BUDGET - fixed, 0)
    rng = np.random.default_rng(_PAIR_SEED)
    bins = np.unique(np.geomspace(3, n - 1, num=17).astype(int))
    per_bin = max(rest // max(len(bins) - 1, 1), 1)
    for lo_lag, hi_lag in zip(bins[:-1], bins[1:]):
        lag = rng.integers(lo_lag, hi_lag + 1, size=per_bin)
        i = rng.integers(0, n - lag)
        i_parts.append(i)
        j_parts.append(i + lag)
    return np.concatenate(i_parts), np.concatenate(j_parts)


def check_midpoint(d: Distribution, s: float, grid: Grid,
                   tol: float = DEFAULT_TOL) -> Certificate:
    """Definition-level midpoint test with theta = 1/2.

    For grid pairs x < y checks F((x+y)/2) >= M_{s*}(F(x), F(y); 1/2) and
    (1-F)((x+y)/2) >= M_{s*}(1-F(x), 1-F(y); 1/2), up to absolute slack
    ``tol``.  For every s the two inequalities together are equivalent to
    the convexity/concavity statements of the definition; for s > 0 all
    grid pairs already lie inside the one-sided domains, so no pair is
    excluded.
    """
    idx = to_index(s)
    pts = grid.points
    F = d.cdf(pts)
    S = d.sf(pts)
    i, j = _midpoint_pairs(grid.count)
    mid = 0.5 * (pts[i] + pts[j])
    Fm = d.cdf(mid)
    Sm = d.sf(mid)
    d1 = Fm - generalized_mean(F[i], F[j], 0.5, idx.s_star)
    d2 = Sm - generalized_mean(S[i], S[j], 0.5, idx.s_star)
    margins = np.minimum(d1, d2)
    k = int(np.argmin(margins))
    # deterministic witness: smallest offending left abscissa among worst ties
    worst = margins == margins[k]
    order = np.lexsort((pts[j][worst], pts[i][worst]))
    wi = pts[i][worst][order[0]]
    wj = pts[j][worst][order[0]]
    margin = float(margins[k])
    if margin >= -tol:
        return Certificate("pass", "midpoint_def", None, margin, grid, tol)
    return Certificate("fail", "midpoint_def", (float(wi), float(wj)),
                       margin, grid, tol)


# -- parameter searches ---------------------------------------------------------

def max_s(d: Distribution, lo: float, hi: float, tol: float = 1e-3,
          grid: Grid | None = None, check_tol: float = DEFAULT_TOL) -> float:
    """Supremal s at which ``check_condition_iv`` passes, by bisection.

    Relies on nestedness of the corridor in s (the bounds widen as s
    decreases).  Requires a pass at ``lo``; if the check also passes at
    ``hi`` there is no boundary inside the bracket and ``hi`` is returned.
    """
    to_index(lo)
    to_index(hi)
    if not lo < hi:
        raise DomainError(f"bounds must satisfy lo < hi, got [{lo}, {hi}]")
    if grid is None:
        grid = make_grid(d)

    def passes(s: float) -> bool:
        return check_condition_iv(d, s, grid, check_tol).passed

    if not passes(lo):
        raise BracketError(
            f"bracket invalid: check fails at s={lo}; widen the bracket downward")
    if passes(hi):
        return hi
    return bisect_boundary(passes, lo, hi, tol)


def delta_threshold(family: str, s: float, lo: float, hi: float,
                    tol: float = 1e-3, *, r: float | None = None,
                    grid_points: int = DEFAULT_GRID_POINTS,
                    eps: float = DEFAULT_EPS,
                    check_tol: float = DEFAULT_TOL) -> float:
    """Mixture separation at which ``check_condition_iv`` flips to fail.

    ``family`` is ``"normmix"`` or ``"tmix"`` (the latter needs ``r``).
    Requires a pass at delta = ``lo`` and a failure at delta = ``hi``.
    """
    from .catalog import NormalMixture, TMixture

    if family == "normmix":
        build = NormalMixture
    elif family == "tmix":
        if r is None:
            raise DomainError("family 'tmix' requires r")
        def build(delta: float) -> TMixture:
            return TMixture(r, delta)
    else:
        raise DomainError("family must be 'normmix' or 'tmix'")
    to_index(s)

    def passes(delta: float) -> bool:
        d = build(delta)
        grid = make_grid(d, grid_points, eps)
        return check_condition_iv(d, s, grid, check_tol).passed

    return bisect_boundary(passes, lo, hi, tol)
