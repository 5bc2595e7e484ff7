import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from poisson_cutout import DomainError, ternary
from poisson_cutout import avg_density as ad
from poisson_cutout import cutout_sim as cs


def ternary_energy_oracle(s, depth=11):
    # I = 2 * (1/4) * 3**s * I + 2 * cross, with cross = int_{X_0} int_{X_1};
    # the cross kernel is smooth (distance >= 1/3), so midpoints suffice
    digits = (np.arange(2 ** depth)[:, None] >> np.arange(depth)[::-1]) & 1
    left = (2 * digits * 3.0 ** -np.arange(1, depth + 1)).sum(axis=1) / 3
    mid0 = left + 0.5 * 3.0 ** -(depth + 1)
    mid1 = mid0 + 2 / 3
    w = 2.0 ** -depth
    cross = w * w * np.sum(np.abs(mid1[None, :] - mid0[:, None]) ** -s)
    # cross is for the normalised halves; each carries mass 1/2
    cross *= 0.25
    return 2 * cross / (1 - 0.5 * 3 ** s)


def test_config_validation():
    with pytest.raises(DomainError):
        cs.CutoutConfig(1.0, 1.0)
    with pytest.raises(DomainError):
        cs.CutoutConfig(1.0, 0.5, trials=0)
    with pytest.raises(DomainError):
        cs.CutoutConfig(-0.1, 0.5)


def test_expected_event_count(tern):
    assert cs.expected_event_count(tern, 1.0, 1 / 9) == pytest.approx(3 / tern.Q, rel=1e-12)
    assert 3 / tern.Q == pytest.approx(4.7549, abs=1e-4)


def test_inverse_cdf_endpoints():
    assert cs.radius_from_uniform(0.0, 0.01, 0.63) == pytest.approx(0.01)
    assert cs.radius_from_uniform(1.0, 0.01, 0.63) == pytest.approx(1.0)


def test_radius_law(tern):
    # P(r > s) = (s^-Q - 1) / (t^-Q - 1)
    rng = np.random.default_rng(5)
    t, s, Q = 1e-3, 0.05, tern.Q
    r = cs.radius_from_uniform(rng.random(200000), t, Q)
    p = (s ** -Q - 1) / (t ** -Q - 1)
    assert abs(np.mean(r > s) - p) < 4 * math.sqrt(p * (1 - p) / r.size)


def test_event_count_mean(tern):
    lam = cs.expected_event_count(tern, 1.0, 1 / 9)
    counts = [cs.sample_events(tern, 1.0, 1 / 9, cs.trial_rng(3, i))[0].size
              for i in range(10000)]
    assert abs(np.mean(counts) - lam) <= 3 * math.sqrt(lam / 10000)


def test_build_cutout_examples(tern, circle):
    r = cs.build_cutout(tern, [], [])
    assert r.intervals == [(0.0, 1.0)]
    assert cs.build_cutout(tern, [0.5], [0.9]).intervals == []
    assert cs.build_cutout(tern, [0.5], [0.2]).intervals == pytest.approx([(0.0, 0.3), (0.7, 1.0)])
    # wrap-around: a ball at 0.05 of radius 0.1 covers (0.95, 1) and [0, 0.15)
    w = cs.build_cutout(circle, [0.05], [0.1])
    assert len(w) == 1
    assert (w.lo[0], w.hi[0]) == pytest.approx((0.15, 0.95))
    with pytest.raises(DomainError):
        cs.build_cutout(tern, [0.5], [0.01], t=0.1)


def test_touching_balls_leave_point(tern):
    r = cs.build_cutout(tern, [0.25, 0.625], [0.25, 0.125])
    assert r.contains(0.5)[0]
    assert r.intervals == [(0.0, 0.0), (0.5, 0.5), (0.75, 1.0)]


@pytest.mark.parametrize("name", ["tern", "circle", "two_block"])
def test_membership_matches_brute_force(name, request):
    sp = request.getfixturevalue(name)
    rng = np.random.default_rng(11)
    for i in range(5):
        real = cs.simulate(sp, 0.4, 1e-3, cs.trial_rng(2, i))
        x = rng.random(1000)
        assert np.array_equal(real.contains(x), real.brute_contains(x))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0.001, 0.3)), min_size=1, max_size=12))
def test_adding_events_shrinks(events):
    sp = ternary()
    c = np.array([e[0] for e in events])
    r = np.array([e[1] for e in events])
    prev = cs.build_cutout(sp, c[:-1], r[:-1])
    full = cs.build_cutout(sp, c, r)
    assert cs.interval_subset(full, prev)
    assert np.all(np.diff(full.lo) > 0) if len(full) > 1 else True
    assert np.all(full.hi[:-1] < full.lo[1:])


def test_coupling_monotone(tern, circle):
    assert cs.coupling_check(tern, [0.1, 0.3, 0.5, 0.8, 1.2], 3.0 ** -6, 50, seed=4)
    assert cs.coupling_check(circle, [0.1, 0.3, 0.5], 0.01, 30, seed=4)


def test_superposed_levels(tern):
    c, r, lv = cs.sample_events_superposed(tern, [0.2, 0.5], 1e-3, cs.trial_rng(0, 0))
    assert set(np.unique(lv)) <= {0, 1}
    with pytest.raises(DomainError):
        cs.sample_events_superposed(tern, [0.5, 0.2], 1e-3, cs.trial_rng(0, 0))


def test_thread_count_invariance(circle):
    a = cs.survival_mc(circle, 0.3, 0.05, 0.5, 400, seed=9, threads=1)
    b = cs.survival_mc(circle, 0.3, 0.05, 0.5, 400, seed=9, threads=4)
    assert a.row() == b.row()


def test_same_seed_same_realization(tern):
    r1 = cs.simulate(tern, 0.7, 1e-4, cs.trial_rng(123, 7, 1))
    r2 = cs.simulate(tern, 0.7, 1e-4, cs.trial_rng(123, 7, 1))
    assert np.array_equal(r1.lo, r2.lo) and np.array_equal(r1.centers, r2.centers)


def test_survival_near_one(tern):
    rec = cs.survival_mc(tern, 0.25, 0.9, 0.5, 4000, seed=2)
    assert rec.verdict == "PASS"
    assert rec.theory > 0.9


def test_survival_ternary(tern):
    rec = cs.survival_mc(tern, 2 / 3 + 1 / 27, 3.0 ** -6, 0.5, 20000, seed=3)
    assert rec.verdict == "PASS", rec


def test_expected_measure(tern, circle):
    rec = cs.expected_measure_mc(circle, 0.01, 0.25, 2000, seed=1)
    assert rec.theory == pytest.approx(0.01 ** (0.25 * 1.9161172452876), rel=1e-9)
    assert rec.verdict == "PASS"
    assert cs.expected_measure_theory(tern, 1e-6, 3.0 ** -6) == pytest.approx(1.0, abs=1e-5)


def test_martingale_gamma_zero(tern):
    rec = cs.martingale_check(tern, 3.0 ** -5, 0.0, 20, seed=0)
    assert rec.estimate == pytest.approx(1.0) and rec.ci95 == 0.0


def test_martingale_ternary(tern):
    rec = cs.martingale_check(tern, 3.0 ** -6, 0.3, 3000, seed=1)
    assert rec.verdict == "PASS", rec
    rec = cs.martingale_check(tern, 3.0 ** -6, 0.3, 3000, seed=2, cylinder=(0,))
    assert rec.verdict == "PASS", rec


def test_energy_small_s(tern):
    res = cs.energy_integral(tern, 1e-4)
    assert res.value == pytest.approx(1.0, abs=2e-3)


def test_energy_below_dimension(tern):
    s = tern.Q - 0.1
    res = cs.energy_integral(tern, s)
    assert not res.diverges
    assert res.value == pytest.approx(ternary_energy_oracle(s), rel=1e-2)


def test_energy_above_dimension(tern):
    res = cs.energy_integral(tern, tern.Q + 0.2)
    assert res.diverges and math.isinf(res.value)


def test_extinction(tern):
    assert cs.extinction_probe(tern, 0.0, 3.0 ** -6, 50).estimate == 0.0
    curve = cs.extinction_curve(tern, [0.2, 0.6, 1.0, 1.4], 3.0 ** -6, 60, seed=5)
    # emptiness is monotone per trial under the coupling
    assert np.all(np.diff(curve.astype(int), axis=1) >= 0)


def test_covering_gamma_zero(tern):
    res = cs.covering_exponent(tern, 0.0, trials=3, seed=0, theory=tern.Q, bootstrap=0)
    assert res.deterministic.estimate == pytest.approx(tern.Q, abs=1e-9)
    assert res.stochastic.estimate == pytest.approx(tern.Q, abs=1e-9)


def test_inner_rule_linearity(tern):
    # E[# cells whose representative survives] = sum of representative survival probabilities
    t = 3.0 ** -7
    cells, vals = ad.rep_integrals(tern, t)
    gamma = 0.4
    counts = [np.count_nonzero(cs.simulate(tern, gamma, t, cs.trial_rng(6, i)).inner_cells(cells))
              for i in range(1500)]
    rec = cs.mean_record("cells", counts, 6, cs.expected_cell_count(tern, gamma, t))
    assert rec.verdict == "PASS", rec


def test_outer_rule_dominates_inner(tern):
    cells = tern.cells(3.0 ** -5)
    for i in range(20):
        real = cs.simulate(tern, 0.5, 3.0 ** -5, cs.trial_rng(1, i))
        inner = real.inner_cells(cells)
        outer = real.outer_cells(cells)
        assert np.all(outer[inner])
        assert real.is_empty() == (not outer.any())


def test_joint_survival(circle):
    pairs = [(0.1 + 0.05 * k, 0.5 + 0.05 * k) for k in range(10)]
    js = cs.joint_survival_check(circle, pairs, 0.01, 0.25, 300, seed=3)
    # homogeneous circle: the joint probability factorises up to the overlap term
    assert np.all(np.isfinite(js.ratio)) and 0 < js.constant < 3


def test_wilson_and_records(tmp_path):
    lo, hi = cs.wilson(50, 100, 1.96)
    assert lo < 0.5 < hi
    rec = cs.proportion_record("p", 50, 100, 1, 0.5)
    assert rec.verdict == "PASS" and rec.ci95 > 0
    assert cs.proportion_record("p", 10, 100, 1, 0.5).verdict == "FAIL"
    path = tmp_path / "r.csv"
    cs.write_records(path, [rec], {"command": "x"})
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["name", "estimate", "ci95", "trials", "seed", "theory", "verdict",
                       "command"]
    assert rows[1][6] == "PASS"


def test_realization_dump(tmp_path, tern):
    real = cs.build_cutout(tern, [0.5], [0.2])
    path = tmp_path / "real.csv"
    cs.write_realization(path, real)
    rows = list(csv.reader(open(path)))
    assert rows[1] == ["event", "0.5", "0.2"]
    assert rows[2][0] == "surviving"


def test_slope_zero_crossing():
    assert cs.slope_zero_crossing([0, 1, 2], [1, 0.5, -0.5]) == pytest.approx(1.5)
    with pytest.raises(DomainError):
        cs.slope_zero_crossing([0, 1], [1, 0.5])
