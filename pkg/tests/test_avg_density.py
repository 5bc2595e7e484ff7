import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from poisson_cutout import DomainError, ball_measure, ternary
from poisson_cutout import avg_density as ad

# brute-force midpoint sum on 10**6 log-spaced nodes with an independent
# devil's staircase; frozen
TERNARY_A0_T10 = 0.8178051701859337
# f_0(0) by the same construction with 4 * 10**6 nodes on [1/3, 1]
TERNARY_F0_AT_0 = 0.898450785898636


def circle_closed_form(t):
    # int_t^1 min(2r, 1) r^-2 dr = 2 ln(1/(2t)) + 1 for t < 1/2
    return (2 * math.log(1 / (2 * t)) + 1) / -math.log(t)


def test_circle_density_closed_form(circle):
    assert ad.average_density(circle, 0.3, 0.01) == pytest.approx(1.9161, abs=1e-4)
    assert ad.average_density(circle, 0.3, 0.01) == pytest.approx(circle_closed_form(0.01),
                                                                  rel=1e-12)


@pytest.mark.xfail(strict=True, reason="closed form gives 1.97903 at t=1e-8; the 2e-2 band is "
                                       "reached only below t ~ 3e-9")
def test_circle_density_limit_literal(circle):
    assert abs(ad.average_density(circle, 0.7, 1e-8) - 2) < 2e-2


@pytest.mark.parametrize("t", [1e-8, 1e-12, 1e-20])
def test_circle_density_tends_to_two(circle, t):
    a = ad.average_density(circle, 0.7, t)
    assert a == pytest.approx(circle_closed_form(t), rel=1e-10)
    # 2 - A = (2 ln 2 - 1) / ln(1/t)
    assert 2 - a == pytest.approx((2 * math.log(2) - 1) / -math.log(t), rel=1e-8)


@settings(max_examples=20, deadline=None)
@given(x=st.floats(0, 1, exclude_max=True), y=st.floats(0, 1, exclude_max=True))
def test_circle_homogeneity(x, y):
    from poisson_cutout import CircleSpace
    sp = CircleSpace()
    assert abs(ad.average_density(sp, x, 1e-3) - ad.average_density(sp, y, 1e-3)) < 1e-10


def test_ternary_density_vs_riemann(tern):
    assert abs(ad.average_density(tern, 0.0, 3.0 ** -10) - TERNARY_A0_T10) < 1e-6


def test_f0_at_zero(tern):
    assert ad.cocycle_term(tern, 0.0, 0) == pytest.approx(TERNARY_F0_AT_0, abs=1e-6)


def test_density_domain(tern):
    with pytest.raises(DomainError):
        ad.average_density(tern, 0.2, 1.0)
    with pytest.raises(DomainError):
        ad.average_density(tern, 1.3, 0.1)


@pytest.mark.parametrize("x", [0.0, 0.25, 2 / 3 + 1 / 27])
def test_telescoping(tern, x):
    n = 9
    total = ad.cocycle_terms(tern, x, n).sum()
    assert total == pytest.approx(-math.log(3.0 ** -n) * ad.average_density(tern, x, 3.0 ** -n),
                                  abs=1e-7)


def test_telescoping_unequal(golden):
    x = 0.8125
    n = 6
    t = 1 / golden.expansion(x, n)[0]
    total = ad.cocycle_terms(golden, x, n).sum()
    assert total == pytest.approx(ad.ball_integral(golden, x, t), abs=1e-7)


def test_additivity_single_point_no_shift(tern):
    eps = ad.check_asymptotic_additivity(tern, 6, 0, [0.25])
    assert np.all(eps == 0)


def test_additivity_circle(circle):
    eps = ad.check_asymptotic_additivity(circle, 8, 2, np.linspace(0.05, 0.95, 7))
    # the first window [1/2, 1] sees the whole circle: f_0 = 1, f_k = 2 ln 2 after
    assert eps[0] == pytest.approx(2 * math.log(2) - 1, abs=1e-9)
    assert np.all(eps[1:] < 1e-9)


def test_additivity_unequal_drops_after_first_generation(golden):
    # once a cylinder is smaller than its sibling gap, balls of the window
    # stay inside it and the cocycle is exactly shift-invariant
    from poisson_cutout.cli import attractor_points
    pts = attractor_points(golden, np.random.default_rng(3), 40)
    eps = ad.check_asymptotic_additivity(golden, 6, 3, pts)
    assert eps[0] > 0.1
    assert np.all(eps[1:] < 1e-8)


def test_survival_examples(circle, tern):
    assert ad.survival_probability(tern, 0.25, 0.01, 0.0) == 1.0
    assert ad.survival_probability(circle, 0.1, 0.01, 0.25) == pytest.approx(0.1101, abs=1e-4)
    with pytest.raises(DomainError):
        ad.survival_probability(tern, 0.25, 0.01, -1.0)


@settings(max_examples=25, deadline=None)
@given(x=st.floats(0, 1), n=st.integers(1, 12), gamma=st.floats(0.01, 2.0))
def test_survival_identity(x, n, gamma):
    sp = ternary()
    t = 3.0 ** -n
    p = ad.survival_probability(sp, x, t, gamma)
    assert math.log(p) / math.log(t) == pytest.approx(gamma * ad.average_density(sp, x, t),
                                                      rel=1e-8, abs=1e-10)


@settings(max_examples=15, deadline=None)
@given(x=st.floats(0, 1), n=st.integers(1, 10))
def test_density_mean_value_bounds(x, n):
    sp = ternary()
    t = 3.0 ** -n
    rs = np.exp(np.linspace(math.log(t), 0, 4000))
    ratio = ball_measure(sp, np.full(rs.shape, x), rs) / rs ** sp.Q
    a = ad.average_density(sp, x, t)
    # the grid can miss the extreme values by one jump of the ball measure
    slack = 0.02 * ratio.max()
    assert ratio.min() - slack <= a <= ratio.max() + slack


def test_sublevel_trivial_cases(tern):
    r = 3.0 ** -6
    assert ad.sublevel_measure(tern, 10.0, r).mass == pytest.approx(1.0)
    assert ad.sublevel_measure(tern, 1e-3, r).mass == 0.0


def test_sublevel_bracket_contains_estimate(tern):
    res = ad.sublevel_measure(tern, 0.95, 3.0 ** -7)
    assert res.lower <= res.mass <= res.upper


@settings(max_examples=10, deadline=None)
@given(b1=st.floats(0.7, 1.2), b2=st.floats(0.7, 1.2))
def test_sublevel_monotone_in_beta(b1, b2):
    sp = ternary()
    lo, hi = sorted((b1, b2))
    r = 3.0 ** -8
    assert ad.sublevel_measure(sp, lo, r, False).mass <= ad.sublevel_measure(sp, hi, r, False).mass


def test_coarse_bounds_circle(circle):
    cb = ad.coarse_bounds(circle)
    assert cb.d0 == pytest.approx(2.0, abs=1e-9)
    assert cb.D0 == pytest.approx(2.0, abs=1e-9)
    assert cb.gamma0_low == pytest.approx(0.5) and cb.gamma0_high == pytest.approx(0.5)


def test_coarse_bounds_two_block(two_block):
    cb = ad.coarse_bounds(two_block, gamma=1.0)
    assert cb.d0 == pytest.approx(0.4, abs=1e-9)
    assert cb.D0 == pytest.approx(0.7, abs=1e-9)
    assert cb.dim_high == pytest.approx(0.6, abs=1e-9)


def test_coarse_bounds_gamma_zero(tern):
    cb = ad.coarse_bounds(tern, gamma=0.0)
    assert cb.dim_low == cb.dim_high == tern.Q
    assert cb.d0 <= cb.D0
    with pytest.raises(DomainError):
        ad.coarse_bounds(tern, grid=np.array([]))


def test_density_profile(tern):
    prof = ad.density_profile(tern, 0.0, 3.0 ** -np.arange(2, 8))
    assert np.all(np.diff(prof.t_grid) < 0)
    assert prof.lower <= prof.upper


def test_density_csv(tmp_path):
    path = tmp_path / "d.csv"
    ad.write_density_csv(path, [(0.1, 0.01, 1.9161172452876, 0.11013906298)], {"seed": 0})
    lines = path.read_text().splitlines()
    assert lines[0] == "x,t,A,p,seed"
    assert lines[1] == "0.1,0.01,1.91611724529,0.11013906298,0"
