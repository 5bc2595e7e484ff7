"""Simulation of truncated Poisson cutouts and the stochastic checks.

Events are points ``(c, r)`` of a Poisson process with intensity
``gamma * H(dc) * r**(-Q-1) dr`` restricted to ``t < r < 1``. The cutout
``E_t`` is what remains of the space after removing every open ball
``B(c, r)``. In one dimension this is a finite union of closed intervals
and is computed exactly.

Every trial draws from its own counter-based stream keyed by
``(seed, trial, substream)``, so results do not depend on how trials are
spread over threads.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .avg_density import ball_integral, rep_integrals, survival_probability
from .errors import DomainError
from .space_model import CellArray, CircleSpace, SelfSimilarSpace, sample_from_measure

Z95 = 1.959963984540054
SIGMAS = 3.0


# -- configuration and records -----------------------------------------------

@dataclass(frozen=True)
class CutoutConfig:
    gamma: float
    t: float
    seed: int = 0
    trials: int = 1

    def __post_init__(self):
        if not self.gamma >= 0:
            raise DomainError("gamma must be non-negative")
        if not 0.0 < self.t < 1.0:
            raise DomainError("t must lie in (0, 1)")
        if self.trials < 1:
            raise DomainError("trials must be at least 1")


@dataclass
class EstimateRecord:
    name: str
    estimate: float
    ci95: float
    trials: int
    seed: int
    theory: float | None = None
    verdict: str | None = None
    extra: dict = field(default_factory=dict)

    HEADER = ("name", "estimate", "ci95", "trials", "seed", "theory", "verdict")

    def row(self):
        th = "" if self.theory is None else f"{self.theory:.12g}"
        return [self.name, f"{self.estimate:.12g}", f"{self.ci95:.12g}", str(self.trials),
                str(self.seed), th, self.verdict or ""]


def write_records(path, records, provenance=None):
    """EstimateRecord CSV; ``provenance`` columns are appended to every row."""
    provenance = provenance or {}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*EstimateRecord.HEADER, *provenance.keys()])
        for rec in records:
            w.writerow([*rec.row(), *provenance.values()])


def wilson(successes, n, z):
    """Wilson score interval ``(low, high)`` for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    p = successes / n
    den = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return centre - half, centre + half


def proportion_record(name, successes, n, seed, theory=None):
    """PASS when ``theory`` lies in the 3-sigma Wilson interval."""
    lo95, hi95 = wilson(successes, n, Z95)
    rec = EstimateRecord(name, successes / n, 0.5 * (hi95 - lo95), n, seed, theory)
    if theory is not None:
        lo, hi = wilson(successes, n, SIGMAS)
        rec.verdict = "PASS" if lo <= theory <= hi else "FAIL"
    return rec


def mean_record(name, values, seed, theory=None):
    """PASS when ``|mean - theory| <= 3 * standard error``."""
    values = np.asarray(values, dtype=float)
    n = values.size
    se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    rec = EstimateRecord(name, float(values.mean()), Z95 * se, n, seed, theory)
    if theory is not None:
        rec.verdict = "PASS" if abs(rec.estimate - theory) <= SIGMAS * se + 1e-12 else "FAIL"
    rec.extra["se"] = se
    return rec


# -- random streams and events --------------------------------------------------

def trial_rng(seed, trial, substream=0):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial, substream])))


def map_trials(fn, trials, threads=1):
    """``[fn(i) for i in range(trials)]``, optionally on a thread pool."""
    if threads <= 1 or trials <= 1:
        return [fn(i) for i in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, range(trials), chunksize=max(1, trials // (8 * threads))))


def expected_event_count(space, gamma, t):
    """``gamma * H(X) * (t**-Q - 1) / Q``."""
    Q = space.Q
    return gamma * space.total_mass * (t ** -Q - 1.0) / Q


def radius_from_uniform(u, t, Q):
    """Inverse distribution function of ``r**(-Q-1) dr`` on ``[t, 1]``."""
    tq = t ** -Q
    return (tq - np.asarray(u) * (tq - 1.0)) ** (-1.0 / Q)


def sample_events(space, gamma, t, rng):
    """One draw of the truncated process; returns ``(centers, radii)``."""
    if gamma < 0 or not 0.0 < t < 1.0:
        raise DomainError("need gamma >= 0 and 0 < t < 1")
    n = int(rng.poisson(expected_event_count(space, gamma, t))) if gamma > 0 else 0
    radii = radius_from_uniform(rng.random(n), t, space.Q)
    centers = sample_from_measure(space, rng, t * 1e-6, n) if n else np.empty(0)
    return np.asarray(centers, dtype=float), radii


def sample_events_superposed(space, gammas, t, rng):
    """Coupled draws for increasing ``gammas``.

    Returns ``(centers, radii, level)``; the process for ``gammas[j]`` is the
    set of events with ``level <= j`` (independent increments of intensity
    ``gammas[j] - gammas[j-1]``).
    """
    gammas = np.asarray(gammas, dtype=float)
    if np.any(np.diff(gammas) < 0) or gammas[0] < 0:
        raise DomainError("gammas must be non-negative and increasing")
    cs, rs, lv = [], [], []
    prev = 0.0
    for j, g in enumerate(gammas):
        c, r = sample_events(space, g - prev, t, rng)
        cs.append(c)
        rs.append(r)
        lv.append(np.full(c.shape, j, dtype=np.int64))
        prev = g
    return np.concatenate(cs), np.concatenate(rs), np.concatenate(lv)


# -- realizations ---------------------------------------------------------------

@dataclass
class Realization:
    """Events and the exact surviving set ``hull minus union of balls``.

    ``lo``/``hi`` are the sorted, disjoint closed surviving intervals
    (possibly degenerate). ``E_t`` is their intersection with the space.
    """

    space: object
    centers: np.ndarray
    radii: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __len__(self):
        return self.lo.shape[0]

    @property
    def intervals(self):
        return list(zip(self.lo.tolist(), self.hi.tolist()))

    def contains(self, x):
        """Membership in the surviving hull set (vectorised)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if isinstance(self.space, CircleSpace):
            x = np.mod(x, 1.0)
        idx = np.searchsorted(self.lo, x, side="right") - 1
        ok = idx >= 0
        safe = np.clip(idx, 0, None)
        return ok & (x <= self.hi[safe]) if self.lo.size else np.zeros(x.shape, dtype=bool)

    def brute_contains(self, x):
        """Membership by testing every event (reference implementation)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if not self.radii.size:
            return np.ones(x.shape, dtype=bool)
        d = np.abs(x[:, None] - self.centers[None, :])
        if isinstance(self.space, CircleSpace):
            d = np.mod(d, 1.0)
            d = np.minimum(d, 1.0 - d)
        return ~np.any(d < self.radii[None, :], axis=1)

    def measure(self):
        """Reference measure of ``E_t``."""
        if not self.lo.size:
            return 0.0
        m, _ = self.space.interval_mass(self.lo, self.hi)
        return float(np.sum(m))

    def outer_cells(self, cells: CellArray):
        """Cells whose closed interval meets ``E_t`` (boolean per cell)."""
        sp = self.space
        ss = isinstance(sp, SelfSimilarSpace)
        offs = sp.offsets if ss else np.zeros(1)
        rats = sp.ratios if ss else np.zeros(1)
        return K.outer_flags(cells.left, cells.right, cells.mass > 0, self.lo, self.hi,
                             ss, offs, rats, sp.max_depth)

    def inner_cells(self, cells: CellArray):
        """Cells whose representative point survives."""
        return self.contains(cells.rep)

    def is_empty(self):
        """Whether ``E_t`` misses the space entirely."""
        if not self.lo.size:
            return True
        sp = self.space
        if isinstance(sp, CircleSpace):
            return self.measure() <= 0.0
        return not any(K.ss_meets(a, b, sp.offsets, sp.ratios, sp.max_depth)
                       for a, b in zip(self.lo, self.hi))

    def restrict_radii(self, t):
        """The realization of the same process truncated at ``t`` (keeps ``r > t``)."""
        keep = self.radii > t
        return build_cutout(self.space, self.centers[keep], self.radii[keep])


def merge_complement(lo, hi, a=0.0, b=1.0):
    """``[a, b]`` minus the union of open intervals ``(lo_i, hi_i)``."""
    if lo.size == 0:
        return np.array([a]), np.array([b])
    order = np.argsort(lo, kind="stable")
    lo = lo[order]
    hi = np.maximum.accumulate(hi[order])
    # a gap starts after the running max and ends at the next left end
    starts = np.concatenate([[a], hi])
    ends = np.concatenate([lo, [b]])
    s = np.maximum(starts, a)
    e = np.minimum(ends, b)
    # open intervals touching at a point leave that point uncovered, hence <=
    keep = s <= e
    return s[keep], e[keep]


def build_cutout(space, centers, radii, t=None):
    """Exact surviving set of a list of events.

    Circle events are lifted to ``[-1, 2]`` before merging so that balls
    wrapping through 0 are handled.
    """
    centers = np.asarray(centers, dtype=float)
    radii = np.asarray(radii, dtype=float)
    if t is not None and np.any(radii < t):
        raise DomainError("all radii must be at least t")
    if isinstance(space, CircleSpace):
        c = np.concatenate([centers - 1.0, centers, centers + 1.0])
        r = np.concatenate([radii, radii, radii])
    else:
        c, r = centers, radii
    lo, hi = merge_complement(c - r, c + r)
    return Realization(space, centers, radii, lo, hi)


def simulate(space, gamma, t, rng):
    c, r = sample_events(space, gamma, t, rng)
    return build_cutout(space, c, r)


def write_realization(path, real: Realization):
    """Dump events and surviving intervals in one CSV."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kind", "a", "b"])
        for c, r in zip(real.centers, real.radii):
            w.writerow(["event", f"{c:.12g}", f"{r:.12g}"])
        for a, b in zip(real.lo, real.hi):
            w.writerow(["surviving", f"{a:.12g}", f"{b:.12g}"])


# -- deterministic quantities at cell representatives ---------------------------

def expected_cell_count(space, gamma, t):
    """``sum_u P(rep_u survives)`` over the cells at scale ``t``."""
    _, vals = rep_integrals(space, t)
    return float(np.sum(np.exp(-gamma * vals)))


def expected_measure_theory(space, gamma, t, refine=32.0):
    """``int t**(gamma A(x, t)) dH`` by quadrature over cells at ``t / refine``."""
    if isinstance(space, CircleSpace):
        cells = space.cells(t / refine)
        vals = ball_integral(space, cells.rep, t)
    else:
        cells = space.cells(t / refine)
        vals = ball_integral(space, cells.rep, t, rtol=1e-8)
    return float(np.sum(cells.mass * np.exp(-gamma * vals)))


# -- stochastic checks ---------------------------------------------------------------

def survival_mc(space, x, t, gamma, trials, seed=0, threads=1) -> EstimateRecord:
    """Fraction of trials in which ``x`` survives, against ``t**(gamma A)``."""
    cfg = CutoutConfig(gamma, t, seed, trials)
    is_circle = isinstance(space, CircleSpace)

    def one(i):
        c, r = sample_events(space, cfg.gamma, cfg.t, trial_rng(cfg.seed, i, 1))
        d = np.abs(c - x)
        if is_circle:
            d = np.mod(d, 1.0)
            d = np.minimum(d, 1.0 - d)
        return not bool(np.any(d < r))

    hits = sum(map_trials(one, trials, threads))
    theory = survival_probability(space, x, t, gamma) if gamma > 0 else 1.0
    return proportion_record("survival", hits, trials, seed, theory)


def expected_measure_mc(space, t, gamma, trials, seed=0, threads=1) -> EstimateRecord:
    """Mean of ``H(E_t)`` against the quadrature of ``int p dH``."""
    cfg = CutoutConfig(gamma, t, seed, trials)

    def one(i):
        return simulate(space, cfg.gamma, cfg.t, trial_rng(cfg.seed, i, 2)).measure()

    vals = map_trials(one, trials, threads)
    theory = expected_measure_theory(space, gamma, t)
    return mean_record("expected_measure", vals, seed, theory)


@dataclass
class CoveringResult:
    gamma: float
    scales: np.ndarray
    expected: np.ndarray        # sum of representative survival probabilities
    mean_inner: np.ndarray
    mean_outer: np.ndarray
    deterministic: EstimateRecord
    stochastic: EstimateRecord
    outer_slope: float
    warnings: list


def _fit(x, y):
    slope, icpt = np.polyfit(x, y, 1)
    res = y - (slope * x + icpt)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(res ** 2)) / ss if ss > 0 else 1.0
    return float(slope), r2


def default_scales(space, n_lo=6, n_hi=14):
    a = 0.5 if isinstance(space, CircleSpace) else float(space.ratios.max())
    return a ** np.arange(n_lo, n_hi + 1, dtype=float)


def covering_exponent(space, gamma, scales=None, trials=500, seed=0, threads=1,
                      theory=None, tol=0.05, bootstrap=200) -> CoveringResult:
    """Growth exponents of surviving cell counts as ``t`` decreases.

    The deterministic estimate regresses ``log sum_u P(rep_u survives)``
    on ``log(1/t)``. The stochastic estimate regresses the log of the mean
    number of cells whose representative survives; one realization at the
    smallest scale per trial is truncated to the coarser scales. The
    outer-rule slope is reported alongside. The verdict is PASS when both
    slopes are within ``tol`` of ``theory`` (when given) and of each other.
    """
    scales = np.sort(np.asarray(default_scales(space) if scales is None else scales,
                                dtype=float))[::-1]
    if scales.size < 5:
        raise DomainError("need at least five scales")
    t_min = float(scales[-1])
    cells = [rep_integrals(space, t)[0] for t in scales]
    expected = np.array([expected_cell_count(space, gamma, t) for t in scales])

    def one(i):
        base = simulate(space, gamma, t_min, trial_rng(seed, i, 3))
        inner = np.empty(scales.size)
        outer = np.empty(scales.size)
        for j, (t, c) in enumerate(zip(scales, cells)):
            real = base if t == t_min else base.restrict_radii(t)
            inner[j] = np.count_nonzero(real.inner_cells(c))
            outer[j] = np.count_nonzero(real.outer_cells(c))
        return inner, outer

    res = map_trials(one, trials, threads)
    inner = np.array([r[0] for r in res])
    outer = np.array([r[1] for r in res])
    x = np.log(1.0 / scales)
    warnings = []

    det_slope, det_r2 = _fit(x, np.log(expected))
    m_in = inner.mean(axis=0)
    m_out = outer.mean(axis=0)
    if np.any(m_in <= 0):
        raise DomainError("no surviving cells at some scale; increase trials or lower gamma")
    sto_slope, sto_r2 = _fit(x, np.log(m_in))
    out_slope, _ = _fit(x, np.log(np.maximum(m_out, 1e-300)))
    for name, r2 in (("deterministic", det_r2), ("stochastic", sto_r2)):
        if r2 < 0.99:
            warnings.append(f"{name} regression R^2 = {r2:.4f} < 0.99")

    rng = trial_rng(seed, 0, 99)
    boot = []
    for _ in range(bootstrap):
        idx = rng.integers(0, trials, trials)
        mb = inner[idx].mean(axis=0)
        if np.all(mb > 0):
            boot.append(_fit(x, np.log(mb))[0])
    ci = float(Z95 * np.std(boot, ddof=1)) if len(boot) > 1 else 0.0

    det = EstimateRecord("covering_slope_deterministic", det_slope, 0.0, 0, seed, theory)
    sto = EstimateRecord("covering_slope_stochastic", sto_slope, ci, trials, seed, theory)
    det.extra["r2"] = det_r2
    sto.extra["r2"] = sto_r2
    agree = abs(det_slope - sto_slope) <= tol
    for rec in (det, sto):
        ok = agree and (theory is None or abs(rec.estimate - theory) <= tol)
        rec.verdict = "PASS" if ok else "FAIL"
    return CoveringResult(float(gamma), scales, expected, m_in, m_out, det, sto, out_slope,
                          warnings)


def deterministic_slope(space, gamma, scales=None):
    scales = np.sort(np.asarray(default_scales(space) if scales is None else scales))[::-1]
    expected = np.array([expected_cell_count(space, gamma, t) for t in scales])
    return _fit(np.log(1.0 / scales), np.log(expected))[0]


def slope_zero_crossing(gammas, slopes):
    """Linear interpolation of the first sign change of ``slopes``."""
    g = np.asarray(gammas, dtype=float)
    s = np.asarray(slopes, dtype=float)
    for i in range(len(g) - 1):
        if s[i] > 0 >= s[i + 1]:
            return float(g[i] + s[i] * (g[i + 1] - g[i]) / (s[i] - s[i + 1]))
    raise DomainError("slopes do not change sign on the gamma grid")


def stochastic_slopes(space, gammas, scales=None, trials=200, seed=0, threads=1):
    """Inner-rule covering slopes for a coupled grid of intensities.

    Intensities share events by superposition, so each trial yields counts
    for the whole grid.
    """
    gammas = np.asarray(gammas, dtype=float)
    scales = np.sort(np.asarray(default_scales(space) if scales is None else scales))[::-1]
    t_min = float(scales[-1])
    cells = [rep_integrals(space, t)[0] for t in scales]

    def one(i):
        c, r, lv = sample_events_superposed(space, gammas, t_min, trial_rng(seed, i, 4))
        counts = np.empty((gammas.size, scales.size))
        for k in range(gammas.size):
            keep = lv <= k
            for j, (t, cl) in enumerate(zip(scales, cells)):
                sel = keep & (r > t)
                real = build_cutout(space, c[sel], r[sel])
                counts[k, j] = np.count_nonzero(real.inner_cells(cl))
        return counts

    counts = np.array(map_trials(one, trials, threads)).mean(axis=0)
    x = np.log(1.0 / scales)
    return np.array([_fit(x, np.log(np.maximum(row, 1e-300)))[0] if np.all(row > 0)
                     else -np.inf for row in counts])


def martingale_check(space, t, gamma, trials, seed=0, cylinder=None, threads=1,
                     subscale=4.0) -> EstimateRecord:
    """Mean of ``nu_t(X) = int p(x, t)^{-1} 1_{E_t}(x) dmu`` against 1.

    ``mu`` is the normalised reference measure, restricted to the cylinder
    with the given word when ``cylinder`` is set. The integral is a sum
    over points ``x_j`` (sub-cell representatives at scale ``t / subscale``)
    weighted by the cell masses, which keeps the estimator unbiased.
    """
    cfg = CutoutConfig(gamma, t, seed, trials)
    cells = space.cells(t / subscale)
    if cylinder is not None:
        cyl = space.cylinder(tuple(cylinder))
        cells = cells.restrict(cyl.left, cyl.right)
    w = cells.mass / cells.mass.sum()
    pts = cells.rep
    inv_p = np.exp(gamma * ball_integral(space, pts, t, rtol=1e-10)) if gamma > 0 \
        else np.ones(pts.shape)
    weights = w * inv_p

    def one(i):
        real = simulate(space, cfg.gamma, cfg.t, trial_rng(cfg.seed, i, 5))
        return float(np.sum(weights[real.contains(pts)]))

    vals = map_trials(one, trials, threads)
    name = "martingale" if cylinder is None else "martingale_cylinder"
    return mean_record(name, vals, seed, 1.0)


def extinction_probe(space, gamma, t, trials, seed=0, threads=1) -> EstimateRecord:
    """Fraction of realizations with ``E_t`` empty (outer rule at scale ``t``)."""
    cfg = CutoutConfig(gamma, t, seed, trials) if gamma > 0 else None

    def one(i):
        if cfg is None:
            return False
        return simulate(space, gamma, t, trial_rng(seed, i, 6)).is_empty()

    hits = sum(map_trials(one, trials, threads))
    lo, hi = wilson(hits, trials, Z95)
    return EstimateRecord("extinction", hits / trials, 0.5 * (hi - lo), trials, seed)


def extinction_curve(space, gammas, t, trials, seed=0):
    """Per-trial emptiness on a coupled ``gamma`` grid; shape ``(trials, len(gammas))``."""
    gammas = np.asarray(gammas, dtype=float)
    out = np.zeros((trials, gammas.size), dtype=bool)
    for i in range(trials):
        c, r, lv = sample_events_superposed(space, gammas, t, trial_rng(seed, i, 7))
        for k in range(gammas.size):
            keep = lv <= k
            out[i, k] = build_cutout(space, c[keep], r[keep]).is_empty()
    return out


def coupling_check(space, gammas, t, trials, seed=0):
    """Whether ``E_t(gamma_2)`` lies inside ``E_t(gamma_1)`` for every coupled pair."""
    gammas = np.asarray(gammas, dtype=float)
    for i in range(trials):
        c, r, lv = sample_events_superposed(space, gammas, t, trial_rng(seed, i, 8))
        reals = [build_cutout(space, c[lv <= k], r[lv <= k]) for k in range(gammas.size)]
        for small, big in zip(reals[:-1], reals[1:]):
            if not interval_subset(big, small):
                return False
    return True


def interval_subset(inner: Realization, outer: Realization):
    """Whether every surviving interval of ``inner`` lies in one of ``outer``."""
    if not inner.lo.size:
        return True
    if not outer.lo.size:
        return False
    idx = np.searchsorted(outer.lo, inner.lo, side="right") - 1
    if np.any(idx < 0):
        return False
    return bool(np.all(inner.hi <= outer.hi[idx]))


@dataclass
class JointSurvival:
    pairs: list
    joint: np.ndarray
    ratio: np.ndarray

    @property
    def constant(self):
        """Smallest ``C`` consistent with every calibration pair."""
        return float(np.max(self.ratio))


def joint_survival_check(space, pairs, delta, gamma, trials, seed=0) -> JointSurvival:
    """Empirical ``P(x, y in E_delta)`` over ``p(x)p(y)/p(x, d(x, y))``."""
    joint, ratio = [], []
    for k, (x, y) in enumerate(pairs):
        hits = 0
        for i in range(trials):
            real = simulate(space, gamma, delta, trial_rng(seed, i, 100 + k))
            hits += bool(np.all(real.contains([x, y])))
        pj = hits / trials
        d = abs(x - y)
        ref = (survival_probability(space, x, delta, gamma)
               * survival_probability(space, y, delta, gamma)
               / survival_probability(space, x, d, gamma))
        joint.append(pj)
        ratio.append(pj / ref)
    return JointSurvival(list(pairs), np.array(joint), np.array(ratio))


# -- energy ------------------------------------------------------------------------

@dataclass
class EnergyResult:
    s: float
    levels: list
    sums: list
    value: float
    partial: float
    rel_change: float
    diverges: bool


def energy_integral(space, s, levels=None, cylinder=None, cells_max=4096) -> EnergyResult:
    """``int int d(x, y)^{-s} dmu dmu`` from off-diagonal cell pairs.

    Cells at successive scales refine the diagonal. If the last refinement
    changes the sum by more than 10 percent the integral is flagged as
    divergent. Otherwise the missing diagonal is restored by Aitken
    extrapolation of the last three sums (the diagonal shrinks
    geometrically on a self-similar space).
    """
    if s <= 0:
        raise DomainError("s must be positive")
    if levels is None:
        a = 0.5 if isinstance(space, CircleSpace) else float(space.ratios.max())
        tau_end = cells_max ** (-1.0 / space.Q)
        levels = [tau_end * a ** -k for k in range(4, -1, -1)]
    periodic = isinstance(space, CircleSpace)
    sums = []
    for tau in levels:
        cells = space.cells(tau)
        if cylinder is not None:
            cyl = space.cylinder(tuple(cylinder))
            cells = cells.restrict(cyl.left, cyl.right)
        w = cells.mass / cells.mass.sum()
        sums.append(float(K.pair_energy(cells.rep, w, s, periodic)))
    rel = abs(sums[-1] - sums[-2]) / abs(sums[-1]) if len(sums) > 1 else 0.0
    diverges = rel > 0.10
    if diverges:
        value = math.inf
    elif len(sums) >= 3:
        from .thermo import aitken
        value = aitken(*sums[-3:])
    else:
        value = sums[-1]
    return EnergyResult(float(s), list(levels), sums, value, sums[-1], rel, diverges)
