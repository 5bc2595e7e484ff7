"""Average densities, cocycle pieces, survival probabilities and level sets.

For a point ``x`` and scale ``0 < t < 1`` the average density is

    A(x, t) = int_t^1 H(B(x, r)) r^{-Q-1} dr / (-log t)

and the survival probability of ``x`` in the cutout truncated at ``t`` is
``p(x, t) = t**(gamma * A(x, t))``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .space_model import CellArray, CircleSpace, SelfSimilarSpace


def _as_points(x):
    scalar = np.ndim(x) == 0
    return np.atleast_1d(np.asarray(x, dtype=float)), scalar


def ball_integral(space, x, t, rtol=1e-9):
    """``int_t^1 H(B(x, r)) r^{-Q-1} dr`` (vectorised over ``x`` and ``t``)."""
    xs, scalar = _as_points(x)
    t = np.broadcast_to(np.asarray(t, dtype=float), xs.shape)
    if np.any(t <= 0.0) or np.any(t >= 1.0):
        raise DomainError("scale must lie in (0, 1)")
    vals, _ = space.window_integral(xs, t, 1.0, rtol=rtol)
    return float(vals[0]) if scalar else vals


def average_density(space, x, t, rtol=1e-8):
    """``A(H, x, t)``; scalar in, scalar out."""
    xs, scalar = _as_points(x)
    t_arr = np.broadcast_to(np.asarray(t, dtype=float), xs.shape)
    # the window tolerance is absolute in units of log(1/t); a tenth of the
    # requested relative accuracy leaves room for densities down to 0.1
    vals = ball_integral(space, xs, t_arr, rtol=rtol / 10) / -np.log(t_arr)
    return float(vals[0]) if scalar else vals


@dataclass
class DensityProfile:
    """Average densities of one point along a decreasing scale grid."""

    x: float
    t_grid: np.ndarray
    values: np.ndarray

    @property
    def upper(self) -> float:
        """Finite-scale proxy of the upper average density."""
        return float(self.values.max())

    @property
    def lower(self) -> float:
        """Finite-scale proxy of the lower average density."""
        return float(self.values.min())


def density_profile(space, x, t_grid) -> DensityProfile:
    t_grid = np.sort(np.asarray(t_grid, dtype=float))[::-1]
    vals = average_density(space, np.full(t_grid.shape, float(x)), t_grid)
    return DensityProfile(float(x), t_grid, vals)


def cylinder_scale(space, x, k):
    """``|DS^k(x)|^{-1}``: diameter of the level-``k`` cylinder around ``x``."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if isinstance(space, SelfSimilarSpace):
        if space.equal_ratio:
            return np.full(xs.shape, space.ratio ** k)
        return 1.0 / space.expansion(xs, k)
    if isinstance(space, CircleSpace):
        # no dynamics on the circle; dyadic scales play the role of cylinders
        return np.full(xs.shape, 0.5 ** k)
    raise DomainError("unknown space")


def cocycle_term(space, x, k, rtol=1e-10):
    """``f_k(x)``: the ball-measure integral over one generation of scales.

    ``f_k(x) = int_{|DS^{k+1}x|^{-1}}^{|DS^k x|^{-1}} H(B(x,s)) s^{-Q-1} ds``;
    summing ``k < n`` gives ``-log(t) * A(x, t)`` at ``t = |DS^n x|^{-1}``.
    """
    if k < 0:
        raise DomainError("k must be non-negative")
    xs, scalar = _as_points(x)
    hi = cylinder_scale(space, xs, k)
    lo = cylinder_scale(space, xs, k + 1)
    vals, _ = space.window_integral(xs, lo, hi, rtol=rtol)
    return float(vals[0]) if scalar else vals


def cocycle_terms(space, x, n, rtol=1e-10):
    """Matrix ``f[i, k] = f_k(x_i)`` for ``k < n``."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    return np.column_stack([cocycle_term(space, xs, k, rtol) for k in range(n)])


def check_asymptotic_additivity(space, n_max, k_max, points, rtol=1e-11):
    """Table ``eps[n] = max |f_n(S^k x) - f_{n+k}(x)|`` for ``n <= n_max``.

    The maximum runs over the sample and ``0 <= k <= k_max``. On the circle
    ``S`` is taken as the identity (the reference measure is homogeneous
    away from arc boundaries).
    """
    xs = np.atleast_1d(np.asarray(points, dtype=float))
    if xs.size == 0:
        raise DomainError("empty point sample")
    shifted = [xs]
    for _ in range(k_max):
        prev = shifted[-1]
        shifted.append(space.shift(prev) if isinstance(space, SelfSimilarSpace) else prev)
    eps = np.zeros(n_max + 1)
    for n in range(n_max + 1):
        worst = 0.0
        for k in range(k_max + 1):
            if k == 0:
                continue
            lhs = cocycle_term(space, shifted[k], n, rtol)
            rhs = cocycle_term(space, xs, n + k, rtol)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        eps[n] = worst
    return eps


def survival_probability(space, x, t, gamma, rtol=1e-10):
    """``P(x in E_t) = exp(-gamma int_t^1 H(B(x,r)) r^{-Q-1} dr)``."""
    if gamma < 0:
        raise DomainError("gamma must be non-negative")
    xs, scalar = _as_points(x)
    if gamma == 0:
        out = np.ones(xs.shape)
    else:
        out = np.exp(-gamma * ball_integral(space, xs, t, rtol))
    return float(out[0]) if scalar else out


@dataclass
class SublevelResult:
    """Mass of ``{x : A(x, r) < beta}`` from cell representatives.

    ``lower``/``upper`` bracket the mass using a per-cell bound on how much
    the average density can change inside the cell.
    """

    beta: float
    r: float
    mass: float
    lower: float
    upper: float
    cells: int


_REP_CACHE: dict = {}


def rep_integrals(space, t):
    """Cells at scale ``t`` and the ball integrals at their representatives.

    Cached per space description and scale; equal-ratio spaces at ``t = a**n``
    share the cylinder sums of the pressure computation.
    """
    if isinstance(space, SelfSimilarSpace) and space.equal_ratio:
        n = round(math.log(t) / math.log(space.ratio))
        if n >= 1 and abs(space.ratio ** n / t - 1.0) < 1e-9:
            from .thermo import cylinder_sums

            cs = cylinder_sums(space, n)
            return cs.cells, cs.rep
    key = (repr(space), float(t))
    hit = _REP_CACHE.get(key)
    if hit is None:
        cells = space.cells(t)
        hit = _REP_CACHE[key] = (cells, ball_integral(space, cells.rep, t, rtol=1e-7))
    return hit


def sublevel_measure(space, beta, r, with_bracket=True, rtol=1e-8) -> SublevelResult:
    """Mass of the cells at scale ``r`` whose representative has ``A < beta``."""
    if beta <= 0 or not 0 < r < 1:
        raise DomainError("need beta > 0 and 0 < r < 1")
    cells, vals = rep_integrals(space, r)
    reps = cells.rep
    dens = vals / -math.log(r)
    mass = float(cells.mass[dens < beta].sum())
    if with_bracket:
        var, _ = space.annulus_integral(reps, r, cells.diam, rtol=rtol)
        var = var / -math.log(r)
        lower = float(cells.mass[dens + var < beta].sum())
        upper = float(cells.mass[dens - var < beta].sum())
    else:
        lower = upper = mass
    return SublevelResult(float(beta), float(r), mass, lower, upper, len(cells))


def windowed_density(space, x, t_star, t_window=None, rtol=1e-8):
    """Average density restricted to the scale window ``[t_star, t_window]``.

    Dropping the scales above ``t_window`` removes the large-scale bias of
    ``A(x, t_star)``; the limit as both scales shrink is the same as that of
    ``A``. ``t_window`` defaults to ``sqrt(t_star)``.
    """
    xs, scalar = _as_points(x)
    t_window = math.sqrt(t_star) if t_window is None else t_window
    vals, _ = space.window_integral(xs, t_star, t_window, rtol=rtol)
    out = vals / math.log(t_window / t_star)
    return float(out[0]) if scalar else out


@dataclass
class CoarseBounds:
    """Direct estimates from the extreme average densities."""

    d0: float
    D0: float
    Q: float
    gamma: float = 0.0
    gamma0_low: float = field(init=False)
    gamma0_high: float = field(init=False)
    dim_low: float = field(init=False)
    dim_high: float = field(init=False)

    def __post_init__(self):
        self.gamma0_low = self.Q / self.D0
        self.gamma0_high = self.Q / self.d0
        self.dim_low = self.Q - self.gamma * self.D0
        self.dim_high = self.Q - self.gamma * self.d0


def default_terminal_scale(space) -> float:
    if isinstance(space, SelfSimilarSpace):
        a = float(space.ratios.max())
        return a ** max(1, round(math.log(3.0 ** -12) / math.log(a)))
    return 2.0 ** -12


def weighted_quantile(values, weights, q):
    order = np.argsort(values, kind="stable")
    v = np.asarray(values)[order]
    w = np.asarray(weights, dtype=float)[order]
    cw = np.cumsum(w) / w.sum()
    return float(v[min(np.searchsorted(cw, q, side="left"), v.size - 1)])


def coarse_bounds(space, grid=None, t_star=None, gamma=0.0, quantile=0.999) -> CoarseBounds:
    """``d0 = inf A``, ``D0 = ess sup A`` and the implied brackets.

    ``grid`` is a ``CellArray`` (masses used as weights) or an array of
    points (uniform weights); by default the cells at scale ``t_star`` are
    used. Densities are the windowed proxies of ``windowed_density``.
    """
    t_star = default_terminal_scale(space) if t_star is None else t_star
    if grid is None:
        grid = space.cells(t_star)
    if isinstance(grid, CellArray):
        pts, wts = grid.rep, grid.mass
    else:
        pts = np.atleast_1d(np.asarray(grid, dtype=float))
        wts = np.ones(pts.shape)
    if pts.size == 0:
        raise DomainError("empty grid")
    dens = windowed_density(space, pts, t_star)
    d0 = float(dens.min())
    D0 = weighted_quantile(dens, wts, quantile)
    return CoarseBounds(d0, D0, space.Q, gamma)


def write_density_csv(path, rows, provenance=None):
    """Write ``(x, t, A, p)`` rows with 12 significant digits."""
    provenance = provenance or {}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "t", "A", "p", *provenance.keys()])
        for x, t, a, p in rows:
            w.writerow([f"{x:.12g}", f"{t:.12g}", f"{a:.12g}", f"{p:.12g}", *provenance.values()])
