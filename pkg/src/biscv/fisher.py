"""Fisher information for location and the associated inequality chain.

For a distribution with absolutely continuous density f and distribution
function F that satisfies the derivative corridor at index s, the location
Fisher information I_f = int (f'/f)^2 f dx obeys

    max(H_left, H_right) / 4  <=  I_f  <=  (2/(1+s)^2) max(H_left, H_right)

where H_left = int (f/F)^2 dF and H_right = int (f/(1-F))^2 dF are the
Hardy integrals (each bounded by 4 I_f whenever finite).  Integrals that
grow without bound under endpoint refinement are reported as infinite
rather than as failed quadratures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .catalog import Distribution
from .errors import DomainError, PreconditionError, QuadratureError
from .numerics import integrate_adaptive
from .shape import (DEFAULT_EPS, DEFAULT_GRID_POINTS, DEFAULT_TOL,
                    check_condition_iv, make_grid)

__all__ = [
    "FisherReport",
    "fisher_info",
    "hardy_integrals",
    "check_fisher_chain",
    "fisher_closed_form_spherical",
    "DIVERGENCE_CEILING",
]

DIVERGENCE_CEILING = 1e12
_GROWTH_LIMIT = 0.10
# successive truncation offsets, as fractions of the support span
_REFINE_STEPS = (1e-5, 1e-8, 1e-11)


@dataclass(frozen=True)
class FisherReport:
    """Fisher information, Hardy integrals, and the chain bounds at index s.

    Infinite entries are represented as math.inf; ``all_infinite`` is set
    when every integral diverges, in which case the chain holds vacuously.
    ``chain_lo = max(hardy)/4`` and ``chain_hi = (2/(1+s)^2) max(hardy)``
    bracket I_f when everything is finite.
    """

    i_f: float
    hardy_left: float
    hardy_right: float
    chain_lo: float
    chain_hi: float
    s: float
    chain_holds: bool
    all_infinite: bool

    def to_dict(self) -> dict:
        def enc(v: float):
            return None if math.isinf(v) else v
        return {"I_f": enc(self.i_f), "hardy_left": enc(self.hardy_left),
                "hardy_right": enc(self.hardy_right),
                "chain_lo": enc(self.chain_lo), "chain_hi": enc(self.chain_hi),
                "s": self.s, "chain_holds": self.chain_holds,
                "all_integrals_infinite": self.all_infinite,
                "note": "all integrals infinite" if self.all_infinite else None}


def _score_sq_density(d: Distribution):
    def g(x):
        f = d.pdf(x)
        fp = d.pdf_deriv(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = fp * fp / f
        return np.where(np.asarray(f) > 0.0, out, 0.0)
    return g


def _hardy_left_integrand(d: Distribution):
    def g(x):
        f = d.pdf(x)
        F = d.cdf(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (f / F) ** 2 * f
        return np.where(np.asarray(F) > 0.0, out, 0.0)
    return g


def _hardy_right_integrand(d: Distribution):
    def g(x):
        f = d.pdf(x)
        S = d.sf(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (f / S) ** 2 * f
        return np.where(np.asarray(S) > 0.0, out, 0.0)
    return g


def _span_scale(lo: float, hi: float) -> float:
    if math.isfinite(lo) and math.isfinite(hi):
        return hi - lo
    return 1.0


def _integrate_guarded(integrand, lo: float, hi: float, rel_tol: float) -> float:
    """Integrate with endpoint-divergence detection.

    Finite endpoints are first approached through a shrinking truncation
    ladder; estimates growing by more than 10% across the refinements (or
    exceeding the ceiling) flag the integral as infinite.  Convergent cases
    are then integrated over the full interval.
    """
    lo_fin = math.isfinite(lo)
    hi_fin = math.isfinite(hi)
    if lo_fin or hi_fin:
        span = _span_scale(lo, hi)
        estimates = []
        for step in _REFINE_STEPS:
            a = lo + step * span if lo_fin else lo
            b = hi - step * span if hi_fin else hi
            try:
                est = integrate_adaptive(integrand, a, b,
                                         rel_tol=max(rel_tol, 1e-9)).value
            except QuadratureError as exc:
                est = exc.best_estimate
            if abs(est) > DIVERGENCE_CEILING:
                return math.inf
            estimates.append(est)
        for prev, cur in zip(estimates, estimates[1:]):
            if cur - prev > _GROWTH_LIMIT * max(abs(prev), 1e-300):
                return math.inf
    result = integrate_adaptive(integrand, lo, hi, rel_tol=rel_tol)
    if abs(result.value) > DIVERGENCE_CEILING:
        return math.inf
    return result.value


def fisher_info(d: Distribution, rel_tol: float = 1e-8) -> float:
    """Location Fisher information int (f'/f)^2 f over J(F).

    Returns math.inf when the integral diverges at a support endpoint
    (detected by truncation-refinement growth or by exceeding 1e12).
    """
    if not rel_tol > 0.0:
        raise DomainError("rel_tol must be > 0")
    sup = d.support()
    return _integrate_guarded(_score_sq_density(d), sup.lo, sup.hi, rel_tol)


def hardy_integrals(d: Distribution, rel_tol: float = 1e-8) -> tuple[float, float]:
    """The pair (int (f/F)^2 dF, int (f/(1-F))^2 dF) over J(F).

    Either component may be math.inf; this happens exactly when the density
    does not vanish at the corresponding finite support endpoint or decays
    too slowly there.
    """
    if not rel_tol > 0.0:
        raise DomainError("rel_tol must be > 0")
    sup = d.support()
    left = _integrate_guarded(_hardy_left_integrand(d), sup.lo, sup.hi, rel_tol)
    right = _integrate_guarded(_hardy_right_integrand(d), sup.lo, sup.hi, rel_tol)
    return left, right


def check_fisher_chain(d: Distribution, s: float, rel_tol: float = 1e-8,
                       grid_points: int = DEFAULT_GRID_POINTS,
                       eps: float = DEFAULT_EPS,
                       check_tol: float = DEFAULT_TOL) -> FisherReport:
    """Evaluate the Fisher chain max(H)/4 <= I_f <= (2/(1+s)^2) max(H).

    The derivative corridor must hold at s (checked first; a failing
    distribution is refused, naming the witness).  When every integral is
    infinite the report records that and the chain holds vacuously.
    """
    cert = check_condition_iv(d, s, make_grid(d, grid_points, eps), check_tol)
    if not cert.passed:
        raise PreconditionError(
            "the derivative corridor fails at s=%r (witness x=%r, margin %r); "
            "the chain hypotheses do not hold" % (s, cert.witness, cert.margin))
    i_f = fisher_info(d, rel_tol)
    left, right = hardy_integrals(d, rel_tol)
    hmax = max(left, right)
    if math.isinf(hmax):
        chain_lo = chain_hi = math.inf
    else:
        chain_lo = hmax / 4.0
        factor = 0.0 if math.isinf(s) else 2.0 / (1.0 + s) ** 2
        chain_hi = factor * hmax
    all_inf = math.isinf(i_f) and math.isinf(left) and math.isinf(right)
    if all_inf:
        holds = True
    else:
        slack = 10.0 * rel_tol * ((abs(i_f) if math.isfinite(i_f) else 0.0)
                                  + (hmax if math.isfinite(hmax) else 0.0)) + 1e-12
        lower_ok = math.isfinite(chain_lo) and math.isfinite(i_f) \
            and chain_lo <= i_f + slack
        upper_ok = math.isinf(chain_hi) or (math.isfinite(i_f)
                                            and i_f <= chain_hi + slack)
        holds = bool(lower_ok and upper_ok)
    return FisherReport(i_f=i_f, hardy_left=left, hardy_right=right,
                        chain_lo=chain_lo, chain_hi=chain_hi, s=s,
                        chain_holds=holds, all_infinite=all_inf)


def fisher_closed_form_spherical(r: float) -> float:
    """Closed-form I_f for the spherical-power family, r > 2.

    Evaluates (r/2) Gamma(r/2-1) Gamma((r+3)/2) /
    (Gamma(r/2+1) Gamma((r+1)/2)), which simplifies to (r+1)/(r-2); the
    value grows without bound as r decreases to 2, where the integral
    diverges.
    """
    if not r > 2.0:
        raise DomainError("formula diverges for r <= 2")
    return math.exp(math.log(r / 2.0)
                    + math.lgamma(r / 2.0 - 1.0) + math.lgamma((r + 3.0) / 2.0)
                    - math.lgamma(r / 2.0 + 1.0) - math.lgamma((r + 1.0) / 2.0))
