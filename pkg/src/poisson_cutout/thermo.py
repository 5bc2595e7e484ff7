"""Pressure, multifractal spectrum, m(gamma), gamma0 and alpha0.

Self-similar spaces use cylinder sums. For a word ``u`` of length ``n``
let ``S_u`` be the ball integral ``int_t^1 H(B(x, r)) r^{-Q-1} dr`` at a
point ``x`` of the cylinder with ``t`` the cylinder diameter. Then

    P_n(q) = (1/n) log B_n(q),   B_n(q) = sum_u exp(q S_u).

``P_n`` converges like ``1/n``; the increment ``log B_n - log B_{n-1}``
converges geometrically and is what ``tilde_pressure`` reports (divided by
``-log a`` for equal ratio ``a``).

Circle spaces have piecewise-constant average densities, so their
spectrum is a finite set of levels and every quantity has a closed form.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from .avg_density import average_density, ball_integral, coarse_bounds
from .errors import (ConsistencyError, DomainError, ResourceError,
                     UnsupportedSpaceError)
from .space_model import CircleSpace, SelfSimilarSpace, sample_from_measure

DEFAULT_DEPTH = 14
Q_MAX = 30.0
GOLDEN_TOL = 1e-6
MAX_CYLINDERS = 1 << 22
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def logsumexp(v):
    v = np.asarray(v, dtype=float)
    m = float(v.max())
    return m + math.log(float(np.sum(np.exp(v - m))))


def golden_min(fun, lo, hi, tol=GOLDEN_TOL):
    """Minimise a unimodal function on ``[lo, hi]``; returns ``(x, f(x))``."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fun(d)
    cands = [(fun(lo), lo), (fun(hi), hi), (fc, c), (fd, d)]
    fx, x = min(cands)
    return x, fx


# -- cylinder sums ------------------------------------------------------------

class CylinderSums:
    """Cylinder sums ``S_u`` of one self-similar space at one depth.

    ``rep`` holds values at cylinder midpoints. The probe bracket (values
    at both cylinder endpoints and a bound on the variation inside the
    cylinder) is computed on first use.
    """

    def __init__(self, space: SelfSimilarSpace, n: int, rtol: float = 1e-7):
        if n < 1:
            raise DomainError("depth must be at least 1")
        if space.ell ** n > MAX_CYLINDERS:
            raise ResourceError(f"{space.ell}**{n} cylinders exceed the budget")
        self.space = space
        self.n = n
        self.rtol = rtol
        self.cells = space.cylinders_at_depth(n)
        self.rep = ball_integral(space, self.cells.rep, self.cells.diam, rtol=rtol)
        self._bracket = None

    @property
    def bracket(self):
        """``(S_low, S_high)`` enclosing ``S`` on each whole cylinder."""
        if self._bracket is None:
            sp, cells = self.space, self.cells
            left, e_l = sp.window_integral(cells.left, cells.diam, 1.0, rtol=self.rtol)
            right, e_r = sp.window_integral(np.minimum(cells.right, 1.0), cells.diam, 1.0,
                                            rtol=self.rtol)
            var, e_v = sp.annulus_integral(cells.rep, cells.diam, cells.diam, rtol=self.rtol)
            quad = self.rtol * np.maximum(1.0, -np.log(cells.diam)) + e_l + e_r + e_v
            probes = np.vstack([left, self.rep, right])
            self._bracket = (probes.min(axis=0) - var - quad, probes.max(axis=0) + var + quad)
        return self._bracket

    def log_partition(self, q, values=None):
        values = self.rep if values is None else values
        if q == 0:
            return self.n * math.log(self.space.ell)
        return logsumexp(q * values)


_SUMS_CACHE: dict = {}


def cylinder_sums(space, n, rtol=1e-7) -> CylinderSums:
    """Cached ``CylinderSums`` keyed by the space description."""
    if not isinstance(space, SelfSimilarSpace):
        raise UnsupportedSpaceError("cylinder sums need a self-similar space")
    key = (json.dumps(space.to_json(), sort_keys=True), n, rtol)
    hit = _SUMS_CACHE.get(key)
    if hit is None:
        hit = _SUMS_CACHE[key] = CylinderSums(space, n, rtol)
    return hit


# -- pressure -----------------------------------------------------------------

@dataclass
class PressureBracket:
    """``P_n(q) = (1/n) log B_n(q)`` at the midpoints, with an enclosure."""

    q: float
    n: int
    low: float
    high: float
    rep: float


def pressure(space, q, n) -> PressureBracket:
    """Finite-depth pressure of ``qF`` with a probe/variation bracket."""
    cs = cylinder_sums(space, n)
    if q == 0:
        p = math.log(space.ell)
        return PressureBracket(0.0, n, p, p, p)
    lo_s, hi_s = cs.bracket
    a = cs.log_partition(q, lo_s) / n
    b = cs.log_partition(q, hi_s) / n
    rep = cs.log_partition(q) / n
    return PressureBracket(float(q), n, min(a, b), max(a, b), rep)


def pressure_increment(space, q, n):
    """``log B_n(q) - log B_{n-1}(q)`` at cylinder midpoints."""
    if n < 2:
        raise DomainError("the increment needs depth >= 2")
    if q == 0:
        return math.log(space.ell)
    return cylinder_sums(space, n).log_partition(q) - cylinder_sums(space, n - 1).log_partition(q)


def aitken(x0, x1, x2):
    """Aitken's delta-squared limit of three terms.

    Falls back to ``x2`` unless the differences shrink geometrically with
    ratio below 0.95 in absolute value.
    """
    d0 = x1 - x0
    d1 = x2 - x1
    if d0 == 0.0 or d1 == 0.0:
        return x2
    r = d1 / d0
    if abs(r) > 0.95:
        return x2
    return x2 + d1 * r / (1.0 - r)


def _require_equal_ratio(space):
    if not isinstance(space, SelfSimilarSpace):
        raise UnsupportedSpaceError("expected a self-similar space")
    if not space.equal_ratio:
        raise UnsupportedSpaceError("normalised pressure needs equal contraction ratios")


def tilde_pressure(space, q, depth=DEFAULT_DEPTH):
    """Normalised pressure ``P(qF) / (-log a)``.

    Self-similar spaces need equal ratios. Circle spaces use the closed
    form ``1 + q * alpha_max`` for ``q >= 0`` and ``1 + q * alpha_min``
    otherwise (Legendre dual of the level set spectrum).
    """
    if isinstance(space, CircleSpace):
        lo, hi = circle_levels(space)[[0, -1]]
        return 1.0 + q * (hi if q >= 0 else lo)
    _require_equal_ratio(space)
    return pressure_increment(space, q, depth) / -math.log(space.ratio)


@dataclass
class PressureCurve:
    """Finite-depth pressures on a grid of ``q`` (natural-log units)."""

    q_grid: np.ndarray
    depths: tuple
    values: np.ndarray          # values[i, j] = P_{depths[i]}(q_j)
    increments: np.ndarray      # log B_n - log B_{n-1} for n = depths[1:]
    extrapolated: np.ndarray
    error: np.ndarray
    low: np.ndarray
    high: np.ndarray

    @property
    def n(self):
        return self.depths[-1]


def pressure_curve(space, q_grid, depth=DEFAULT_DEPTH, with_bracket=True) -> PressureCurve:
    """Pressure over a ``q`` grid at depths ``depth-2 .. depth``.

    ``extrapolated`` applies Aitken's method to the increments; ``error``
    is the last change of the increment. ``low``/``high`` are the
    depth-``n`` probe brackets widened by ``|P_n - P_{n-1}|``.
    """
    if depth < 3:
        raise DomainError("depth must be at least 3")
    q_grid = np.asarray(q_grid, dtype=float)
    depths = (depth - 2, depth - 1, depth)
    sums = [cylinder_sums(space, n) for n in depths]
    logb = np.array([[cs.log_partition(q) for q in q_grid] for cs in sums])
    values = logb / np.array(depths, dtype=float)[:, None]
    inc = np.diff(logb, axis=0)
    # three increments for Aitken need depth - 3 as well
    prev = np.array([cylinder_sums(space, depth - 3).log_partition(q) for q in q_grid]) \
        if depth >= 4 else logb[0]
    inc0 = logb[0] - prev
    extrap = np.array([aitken(x0, x1, x2) for x0, x1, x2 in zip(inc0, inc[0], inc[1])])
    err = np.abs(inc[1] - inc[0])
    widen = np.abs(values[2] - values[1])
    if with_bracket:
        br = [pressure(space, q, depth) for q in q_grid]
        low = np.array([b.low for b in br]) - widen
        high = np.array([b.high for b in br]) + widen
    else:
        low = values[2] - widen
        high = values[2] + widen
    return PressureCurve(q_grid, depths, values, inc, extrap, err, low, high)


# -- circle closed forms ------------------------------------------------------

def circle_levels(space: CircleSpace):
    """Sorted distinct average-density levels ``2 w`` of the positive arcs."""
    w = space.weights[space.weights > 0]
    return np.unique(2.0 * w)


# -- spectrum -----------------------------------------------------------------

def spectrum(space, alpha, q_max=Q_MAX, depth=DEFAULT_DEPTH):
    """``f(alpha) = inf_q (P~(q) - alpha q)`` or ``None`` outside the spectrum.

    The infimum is searched on ``[-q_max, q_max]``; if it sits on the
    boundary with a non-vanishing slope, ``alpha`` is numerically outside
    the set of attained densities and ``None`` is returned.
    """
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    if isinstance(space, CircleSpace):
        lv = circle_levels(space)
        return 1.0 if np.any(np.abs(lv - alpha) <= 1e-9) else None

    def h(q):
        return tilde_pressure(space, q, depth) - alpha * q

    q, val = golden_min(h, -q_max, q_max)
    step = 1e-3
    if q >= q_max - 10 * GOLDEN_TOL:
        slope = (h(q_max) - h(q_max - step)) / step
        if slope < -1e-4:
            return None
    elif q <= -q_max + 10 * GOLDEN_TOL:
        slope = (h(-q_max + step) - h(-q_max)) / step
        if slope > 1e-4:
            return None
    return float(val)


def legendre_dense(space, alpha, q_max=Q_MAX, n_q=60001, depth=DEFAULT_DEPTH):
    """Direct Legendre transform on a dense ``q`` grid (no search)."""
    qs = np.linspace(-q_max, q_max, n_q)
    pt = np.array([tilde_pressure(space, q, depth) for q in qs])
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    return np.array([float(np.min(pt - a * qs)) for a in alpha])


@dataclass
class Endpoints:
    alpha_min: float
    alpha_max: float
    q_max: float
    monotone: bool


def spectrum_endpoints(space, q_max=Q_MAX, delta=1e-2, depth=DEFAULT_DEPTH) -> Endpoints:
    """Proxies for the extreme attained densities from pressure slopes.

    ``monotone`` records that doubling ``q_max`` does not shrink the
    interval, as it cannot for a convex pressure.
    """
    if q_max < 30:
        raise DomainError("q_max must be at least 30")
    if isinstance(space, CircleSpace):
        lv = circle_levels(space)
        return Endpoints(float(lv[0]), float(lv[-1]), q_max, True)

    def slopes(qm):
        hi = (tilde_pressure(space, qm, depth) - tilde_pressure(space, qm - delta, depth)) / delta
        lo = (tilde_pressure(space, -qm + delta, depth) - tilde_pressure(space, -qm, depth)) / delta
        return lo, hi

    lo, hi = slopes(q_max)
    lo2, hi2 = slopes(2 * q_max)
    monotone = lo2 <= lo + 1e-9 and hi2 >= hi - 1e-9
    return Endpoints(float(lo), float(hi), q_max, bool(monotone))


def alpha_zero(space, depth=DEFAULT_DEPTH, cross_check=True, samples=400, seed=0,
               tol=0.05):
    """Almost-sure average density ``P~'(0)`` by central difference.

    With ``cross_check`` the value is compared with the mean of
    ``A(x, a**20)`` over ``samples`` points drawn from the natural measure;
    a gap above ``tol`` raises ``ConsistencyError``.
    """
    if isinstance(space, CircleSpace):
        lv = circle_levels(space)
        if lv.size != 1:
            raise UnsupportedSpaceError("average density is not almost surely constant")
        return float(lv[0])
    _require_equal_ratio(space)
    h = 1e-3
    a0 = (tilde_pressure(space, h, depth) - tilde_pressure(space, -h, depth)) / (2 * h)
    if cross_check:
        mc, half = alpha_zero_mc(space, samples, seed)
        if abs(mc - a0) > max(tol, 3 * half):
            raise ConsistencyError(f"alpha0 {a0:.6f} disagrees with sampled mean {mc:.6f}")
    return float(a0)


def alpha_zero_mc(space, samples=400, seed=0, level=20):
    """Sampled mean of ``A(x, a**level)`` and its 95% half-width."""
    a = space.ratio
    t = a ** level
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xA0]))
    pts = sample_from_measure(space, rng, t * 1e-4, samples)
    vals = average_density(space, pts, t)
    return float(vals.mean()), float(1.96 * vals.std(ddof=1) / math.sqrt(samples))


# -- m(gamma) and gamma0 -------------------------------------------------------

@dataclass
class MValue:
    """``m(gamma)`` from the pressure and from the Legendre supremum."""

    gamma: float
    m: float
    legendre: float
    restricted: float


def _alpha_grid(space, n_alpha=200, depth=DEFAULT_DEPTH):
    ep = spectrum_endpoints(space, depth=depth)
    pad = 0.05 * (ep.alpha_max - ep.alpha_min)
    return np.linspace(ep.alpha_min - pad, ep.alpha_max + pad, n_alpha), ep


def _legendre_sup(space, gamma, alphas, fvals, upper=None, depth=DEFAULT_DEPTH):
    ok = np.isfinite(fvals)
    if upper is not None:
        ok &= alphas <= upper
    if not ok.any():
        return -math.inf
    idx = np.flatnonzero(ok)
    vals = fvals[idx] - gamma * alphas[idx]
    k = int(np.argmax(vals))
    lo = alphas[idx[max(k - 1, 0)]]
    hi = alphas[idx[min(k + 1, idx.size - 1)]]
    if upper is not None:
        hi = min(hi, upper)

    def neg(a):
        f = spectrum(space, a, depth=depth)
        return math.inf if f is None else -(f - gamma * a)

    if hi > lo:
        _, v = golden_min(neg, lo, hi, tol=1e-7)
        return max(float(vals[k]), -v)
    return float(vals[k])


def m_of_gamma(space, gamma, table=None, depth=DEFAULT_DEPTH) -> MValue:
    """``m(gamma) = sup_alpha f(alpha) - gamma alpha`` and ``P~(-gamma)``.

    Raises ``ConsistencyError`` when the two disagree by more than 5e-3.
    ``table`` (a ``SpectrumTable``) avoids recomputing ``f`` on the grid.
    """
    if gamma < 0:
        raise DomainError("gamma must be non-negative")
    if isinstance(space, CircleSpace):
        m = tilde_pressure(space, -gamma)
        return MValue(float(gamma), m, m, m)
    if table is None:
        table = spectrum_table(space, depth=depth, gammas=())
    direct = tilde_pressure(space, -gamma, depth)
    leg = _legendre_sup(space, gamma, table.alpha, table.f, depth=depth)
    restricted = _legendre_sup(space, gamma, table.alpha, table.f, upper=table.alpha0,
                               depth=depth)
    if abs(leg - direct) > 5e-3:
        raise ConsistencyError(f"Legendre sup {leg:.6f} vs pressure {direct:.6f} at gamma={gamma}")
    return MValue(float(gamma), float(direct), float(leg), float(restricted))


def gamma_zero(space, depth=DEFAULT_DEPTH, d0=None, residual_tol=1e-6):
    """Root of ``gamma -> P~(-gamma)`` by bisection on ``[0, Q/d0 + 1]``."""
    if isinstance(space, CircleSpace):
        return float(1.0 / circle_levels(space)[0])
    _require_equal_ratio(space)
    if d0 is None:
        d0 = coarse_bounds(space).d0
    hi = space.Q / d0 + 1.0

    def g(gamma):
        return tilde_pressure(space, -gamma, depth)

    if not g(0.0) > 0.0 > g(hi):
        raise ConsistencyError(f"no sign change of P~(-gamma) on [0, {hi:.4f}]")
    root = bisect(g, 0.0, hi, xtol=1e-13, rtol=1e-15, maxiter=200)
    if abs(g(root)) > residual_tol:
        raise ConsistencyError(f"residual {g(root):.3e} at gamma0 = {root}")
    return float(root)


def zero_pressure_check(space, alpha, f_candidate, q_grid=None, depth=DEFAULT_DEPTH):
    """``inf_q P(q(F - alpha log|DS|) - f log|DS|)`` on a ``q`` grid.

    Vanishes when ``f_candidate = f(alpha)``. Uses the same midpoint
    increments as ``tilde_pressure`` with ``log|DS_u| = -log diam(u)``, so
    it also evaluates for unequal ratios.
    """
    if not isinstance(space, SelfSimilarSpace):
        raise UnsupportedSpaceError("zero-pressure check needs a self-similar space")
    q_grid = np.linspace(-Q_MAX, Q_MAX, 2401) if q_grid is None else np.asarray(q_grid)
    top, below = cylinder_sums(space, depth), cylinder_sums(space, depth - 1)
    out = []
    for q in q_grid:
        vals = []
        for cs in (top, below):
            logds = -np.log(cs.cells.diam)
            vals.append(logsumexp(q * (cs.rep - alpha * logds) - f_candidate * logds))
        out.append(vals[0] - vals[1])
    return float(min(out))


# -- tables -------------------------------------------------------------------

@dataclass
class SpectrumTable:
    alpha: np.ndarray
    f: np.ndarray               # NaN outside the spectrum
    alpha_min: float
    alpha0: float
    alpha_max: float
    gamma: np.ndarray
    m: np.ndarray
    gamma0: float
    Q: float
    depth: int = DEFAULT_DEPTH
    extra: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {"Q": self.Q, "alpha0": self.alpha0, "alpha_min": self.alpha_min,
                "alpha_max": self.alpha_max, "gamma0": self.gamma0}


def spectrum_table(space, depth=DEFAULT_DEPTH, n_alpha=200, gammas=None) -> SpectrumTable:
    """Spectrum on the padded endpoint grid plus ``m`` on a ``gamma`` grid.

    ``gammas`` defaults to ten points from 0 to ``gamma0 + 0.2``.
    """
    if isinstance(space, CircleSpace):
        lv = circle_levels(space)
        alpha = lv.copy()
        f = np.ones(lv.shape)
        g0 = gamma_zero(space)
        gam = np.linspace(0.0, g0 + 0.2, 10) if gammas is None else np.asarray(gammas, float)
        m = np.array([tilde_pressure(space, -g) for g in gam])
        a0 = float(lv[0]) if lv.size == 1 else math.nan
        return SpectrumTable(alpha, f, float(lv[0]), a0, float(lv[-1]), gam, m, g0, 1.0, 0)
    _require_equal_ratio(space)
    alpha, ep = _alpha_grid(space, n_alpha, depth)
    f = np.array([np.nan if (v := spectrum(space, a, depth=depth)) is None else v
                  for a in alpha])
    a0 = alpha_zero(space, depth, cross_check=False)
    g0 = gamma_zero(space, depth)
    gam = np.linspace(0.0, g0 + 0.2, 10) if gammas is None else np.asarray(gammas, float)
    m = np.array([tilde_pressure(space, -g, depth) for g in gam])
    return SpectrumTable(alpha, f, ep.alpha_min, a0, ep.alpha_max, gam, m, g0, space.Q, depth)
