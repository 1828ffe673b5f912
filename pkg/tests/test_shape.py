"""Tests for the bi-s*-concavity machinery."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import biscv as bv
from biscv import (
    BracketError,
    DomainError,
    Normal,
    NormalMixture,
    Pareto,
    SphericalPower,
    StudentT,
    TMixture,
    Uniform,
)
from biscv.shape import (
    Grid,
    check_condition_iii,
    check_condition_iv,
    check_midpoint,
    cr,
    cr_min,
    cr_report,
    cr_right,
    delta_threshold,
    from_star,
    generalized_mean,
    make_grid,
    max_s,
    reverse_s_star_hazard,
    s_star_hazard,
    to_index,
)
from conftest import grid_for

CHECKERS = (check_condition_iv, check_condition_iii, check_midpoint)

# catalog members with a known maximal s, used by the agreement suites
KNOWN_MAX_MEMBERS = [
    StudentT(0.5), StudentT(1.0), StudentT(4.0),
    bv.FDist(4.0, 6.0),
    Pareto(1.0, 1.0), Pareto(2.0, 1.0), Pareto(5.0, 1.0),
    SphericalPower(1.0), SphericalPower(4.0),
    Normal(0.0, 1.0),
]


# --------------------------------------------------------------------- index

def test_index_examples():
    assert to_index(0.0).s_star == 0.0
    assert to_index(-0.5).s_star == pytest.approx(-1.0, abs=1e-15)
    # s = -1/(1+r) at r=4 gives s* = -1/r
    assert to_index(-0.2).s_star == pytest.approx(-0.25, abs=1e-15)
    assert to_index(math.inf).s_star == 1.0
    assert from_star(1.0).s == math.inf
    assert from_star(-1.0).s == pytest.approx(-0.5)


def test_index_domain_errors():
    for bad in (-1.0, -2.0, math.nan):
        with pytest.raises(DomainError):
            to_index(bad)
    with pytest.raises(DomainError):
        from_star(1.5)


def test_index_monotone():
    ss = np.linspace(-0.95, 60.0, 400)
    stars = [to_index(float(s)).s_star for s in ss]
    assert np.all(np.diff(stars) > 0.0)


@given(st.floats(min_value=-0.99, max_value=100.0))
@settings(max_examples=1000, deadline=None, derandomize=True)
def test_index_round_trip(s):
    back = from_star(to_index(s).s_star).s
    assert back == pytest.approx(s, rel=1e-14, abs=1e-14)


# ---------------------------------------------------------- generalized mean

def test_mean_branch_values():
    assert generalized_mean(4.0, 9.0, 0.5, 0.0) == pytest.approx(6.0, rel=1e-14)
    assert generalized_mean(4.0, 9.0, 0.5, 1.0) == pytest.approx(6.5, rel=1e-14)
    assert generalized_mean(2.0, 2.0, 0.3, -1.0) == pytest.approx(2.0, rel=1e-14)
    assert generalized_mean(4.0, 9.0, 0.5, math.inf) == 9.0
    assert generalized_mean(4.0, 9.0, 0.5, -math.inf) == 4.0


def test_mean_zero_conventions():
    # limit convention: t <= 0 with a zero input gives 0
    assert generalized_mean(0.0, 5.0, 0.5, -1.0) == 0.0
    assert generalized_mean(0.0, 5.0, 0.5, 0.0) == 0.0
    # t > 0 keeps the surviving weighted mass
    assert generalized_mean(0.0, 4.0, 0.5, 1.0) == pytest.approx(2.0)
    assert generalized_mean(0.0, 0.0, 0.5, 2.0) == 0.0


def test_mean_ordering_between_min_and_max():
    rng = np.random.default_rng(3)
    for _ in range(200):
        a, b = rng.uniform(0.01, 20.0, size=2)
        t = rng.uniform(-5.0, 5.0)
        m = generalized_mean(a, b, 0.5, t)
        assert min(a, b) - 1e-12 <= m <= max(a, b) + 1e-12


@given(st.floats(min_value=0.1, max_value=10.0),
       st.floats(min_value=0.1, max_value=10.0))
@settings(max_examples=200, deadline=None, derandomize=True)
def test_mean_continuous_at_zero(a, b):
    m0 = generalized_mean(a, b, 0.5, 0.0)
    for t in (1e-12, -1e-12):
        assert abs(generalized_mean(a, b, 0.5, t) - m0) <= 1e-10


def test_mean_vectorized():
    a = np.array([1.0, 4.0, 9.0])
    b = np.array([1.0, 9.0, 4.0])
    out = generalized_mean(a, b, 0.5, 0.0)
    np.testing.assert_allclose(out, [1.0, 6.0, 6.0], rtol=1e-14)


# ------------------------------------------------------------- CR functionals

def test_cr_symmetric_center_is_zero():
    assert cr(Normal(), 0.0) == 0.0


def test_cr_right_pareto_is_constant():
    # (1-F)/f = x/a and f'/f = -(a+1)/x give the signed constant -(1+1/a)
    d = Pareto(1.0, 1.0)
    for x in (1.5, 2.0, 7.0, 123.0):
        assert cr_right(d, x) == pytest.approx(-2.0, rel=1e-12)


def test_cr_cauchy_tail_approaches_two():
    d = StudentT(1.0)
    x = d.quantile(1.0 - 1e-8)
    assert abs(cr(d, x)) == pytest.approx(2.0, abs=1e-6)


def test_cr_magnitude_dominated_by_cr_min():
    # F(1-F) <= min(F, 1-F) pointwise
    for d in (StudentT(1.0), NormalMixture(1.3), SphericalPower(4.0)):
        pts = grid_for(d).points
        assert np.all(np.abs(cr(d, pts)) <= np.abs(cr_min(d, pts)) + 1e-15)


def test_cr_requires_positive_density():
    with pytest.raises(DomainError):
        cr(SphericalPower(1.0), 1.0)  # support endpoint, f = 0


def test_cr_report_values():
    d = StudentT(4.0)
    rep = cr_report(d, -0.2, grid_for(d))
    assert rep.gamma == pytest.approx(1.25, abs=1e-3)
    assert rep.theoretical_cap == pytest.approx(1.25)
    assert rep.gamma <= rep.gamma_tilde + 1e-12

    u = Uniform(0.0, 1.0)
    rep = cr_report(u, math.inf, grid_for(u))
    assert rep.gamma == 0.0
    assert rep.gamma_tilde == 0.0
    assert rep.theoretical_cap == 0.0


# ------------------------------------------------------------------ checkers

def test_iv_pareto_boundary_case():
    # the density derivative sits exactly on the corridor's lower edge
    d = Pareto(2.0, 1.0)
    cert = check_condition_iv(d, -1.0 / 3.0, grid_for(d))
    assert cert.passed
    assert abs(cert.margin) <= 1e-8


def test_iv_normal_mixture_fails_beyond_threshold():
    d = NormalMixture(1.35)
    cert = check_condition_iv(d, 0.0, grid_for(d))
    assert not cert.passed
    assert cert.witness is not None
    assert cert.margin < -cert.tolerance


def test_iv_uniform_at_infinite_s():
    u = Uniform(0.0, 1.0)
    assert check_condition_iv(u, math.inf, grid_for(u)).passed
    # any non-flat density must fail the degenerate f' = 0 condition
    d = Normal()
    assert not check_condition_iv(d, math.inf, grid_for(d)).passed


def test_iii_examples():
    d = StudentT(1.0)
    assert check_condition_iii(d, -0.5, grid_for(d)).passed
    m = TMixture(1.0, 1.48)
    cert = check_condition_iii(m, -0.5, grid_for(m))
    assert not cert.passed
    assert isinstance(cert.witness, tuple)
    n = Normal()
    assert check_condition_iii(n, 0.0, grid_for(n)).passed


def test_midpoint_examples():
    u = Uniform(0.0, 1.0)
    assert check_midpoint(u, 1.0, grid_for(u)).passed
    m = NormalMixture(1.34)
    assert check_midpoint(m, 0.0, grid_for(m)).passed
    t = TMixture(1.0, 1.5)
    cert = check_midpoint(t, -0.5, grid_for(t))
    assert not cert.passed
    assert isinstance(cert.witness, tuple)


def test_midpoint_all_pairs_small_grid():
    d = StudentT(1.0)
    g = make_grid(d, 50, 1e-6)
    assert check_midpoint(d, -0.5, g).passed


def test_certificate_fail_contract():
    d = NormalMixture(1.5)
    for checker in CHECKERS:
        cert = checker(d, 0.0, grid_for(d))
        assert cert.verdict == "fail"
        assert cert.witness is not None
        assert cert.margin < -cert.tolerance


def test_checker_determinism():
    d = TMixture(1.0, 1.48)
    g = grid_for(d)
    a = check_midpoint(d, -0.5, g)
    b = check_midpoint(d, -0.5, g)
    assert a == b


# ------------------------------------------------ hazards match the envelope

def test_hazards_are_envelope_derivatives():
    d = StudentT(1.0)
    xs = grid_for(d).points[::100]
    np.testing.assert_allclose(s_star_hazard(d, -0.5, xs),
                               bv.fu_prime(d, -0.5, xs), rtol=1e-14)
    np.testing.assert_allclose(reverse_s_star_hazard(d, -0.5, xs),
                               bv.fl_prime(d, -0.5, xs), rtol=1e-14)
    assert s_star_hazard(d, -0.5, 0.0) == pytest.approx(4.0 / math.pi, rel=1e-13)


# ----------------------------------------------------- agreement & invariants

@pytest.mark.parametrize("d", KNOWN_MAX_MEMBERS)
def test_checker_agreement_at_max_and_half(d):
    smax = d.max_known_s()
    g = grid_for(d)
    for s in (smax, smax / 2.0):
        verdicts = {c(d, s, g).verdict for c in CHECKERS}
        assert len(verdicts) == 1, f"{d.spec_string()} s={s}: {verdicts}"


def test_checker_agreement_uniform():
    u = Uniform(0.0, 1.0)
    g = grid_for(u)
    for s in (1.0, math.inf):
        verdicts = {c(u, s, g).verdict for c in CHECKERS}
        assert verdicts == {"pass"}


@pytest.mark.parametrize("d", KNOWN_MAX_MEMBERS)
def test_preservation_at_max_known_s(d):
    s = d.max_known_s()
    g = grid_for(d)
    for checker in CHECKERS:
        assert checker(d, s, g).passed, checker.__name__


@pytest.mark.parametrize("d", KNOWN_MAX_MEMBERS)
def test_corollary_cap_on_passing_members(d):
    s = d.max_known_s()
    rep = cr_report(d, s, grid_for(d))
    cap = 1.0 / (1.0 + s)
    assert rep.gamma <= cap + 1e-6
    assert rep.gamma_tilde <= cap + 1e-6


@pytest.mark.parametrize("d", [StudentT(1.0), Pareto(2.0, 1.0),
                               SphericalPower(4.0), Normal()])
def test_corridor_nestedness_in_s(d):
    # a pass at s implies a pass at every smaller s: the corridor widens
    g = grid_for(d)
    smax = d.max_known_s()
    ladder = [(1.0 + smax) * f - 1.0
              for f in (0.5, 0.65, 0.8, 0.9, 1.0, 1.1, 1.25, 1.45, 1.7, 2.0)]
    results = [check_condition_iv(d, s, g).passed for s in ladder]
    # once a failure appears, everything above fails too
    first_fail = results.index(False) if False in results else len(results)
    assert all(results[:first_fail])
    assert not any(results[first_fail:])


# ------------------------------------------------------------------ searches

def test_max_s_pareto():
    d = Pareto(2.0, 1.0)
    got = max_s(d, -0.6, -0.1, 1e-4, grid_for(d))
    assert got == pytest.approx(-1.0 / 3.0, abs=1e-3)


def test_max_s_student_t_with_bracket_confirmation():
    d = StudentT(1.0)
    g = grid_for(d)
    # brute-force confirmation on both sides of the boundary first
    assert check_condition_iv(d, -0.55, g).passed
    assert not check_condition_iv(d, -0.45, g).passed
    got = max_s(d, -0.7, -0.3, 1e-3, g)
    assert got == pytest.approx(-0.5, abs=1e-2)


def test_max_s_uniform_returns_hi():
    u = Uniform(0.0, 1.0)
    assert max_s(u, -0.5, 50.0, 1e-3, grid_for(u)) == 50.0


def test_max_s_invalid_bracket():
    d = StudentT(1.0)
    with pytest.raises(BracketError):
        max_s(d, -0.4, -0.1, 1e-3, grid_for(d))  # already fails at lo


def test_delta_threshold_normal_mixture():
    got = delta_threshold("normmix", 0.0, 1.0, 2.0, 1e-3)
    assert 1.34 < got < 1.35


def test_delta_threshold_invalid_bracket():
    with pytest.raises(BracketError, match="bracket invalid"):
        delta_threshold("normmix", 0.0, 0.1, 0.2, 1e-3)


def test_delta_threshold_requires_r_for_tmix():
    with pytest.raises(DomainError):
        delta_threshold("tmix", -0.5, 1.0, 2.0, 1e-3)


# ---------------------------------------------------------------------- grid

def test_grid_validation():
    with pytest.raises(DomainError):
        Grid(points=np.array([0.0, 1.0]), eps=1e-8)
    with pytest.raises(DomainError):
        Grid(points=np.array([0.0, 0.0, 1.0]), eps=1e-8)
    with pytest.raises(DomainError):
        make_grid(StudentT(1.0), 2000, 0.5)


def test_grid_spans_requested_mass():
    d = StudentT(1.0)
    g = make_grid(d, 100, 1e-6)
    assert d.cdf(g.points[0]) == pytest.approx(1e-6, rel=1e-6)
    assert d.sf(g.points[-1]) == pytest.approx(1e-6, rel=1e-6)
    assert g.count == 100
