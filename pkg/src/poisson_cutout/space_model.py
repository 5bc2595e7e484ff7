"""Q-regular model spaces: affine self-similar sets on [0, 1] and the circle.

Two concrete spaces are provided.

``SelfSimilarSpace``
    Attractor of ``x -> c_i + a_i x`` on ``[0, 1]`` under the strong
    separation condition, carrying its natural measure (cylinder weights
    ``a_i**Q``).
``CircleSpace``
    The circle ``R/Z`` of circumference one with a piecewise-constant
    density; ``Q = 1``.

Both expose ball measures, window integrals of the ball measure against
``r**(-Q-1) dr``, partitions into cells at a given scale, and sampling from
the reference measure. Balls are open; circle balls wrap around.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from . import _kernels as K
from .errors import DomainError, InvalidSpaceError, ToleranceError

SSC_MIN_GAP = 1e-9
MORAN_TOL = 1e-12
# relative slack when comparing floating diameters with a scale
_SCALE_SLACK = 1e-12


def solve_moran(ratios: Sequence[float]) -> float:
    """Similarity dimension: the root ``Q`` of ``sum(a_i**Q) = 1``.

    >>> round(solve_moran([1/3, 1/3]), 7)
    0.6309298
    """
    a = np.asarray(ratios, dtype=float)
    if a.ndim != 1 or a.size < 2:
        raise InvalidSpaceError("need at least two contraction ratios")
    if np.any(a <= 0.0) or np.any(a >= 1.0):
        raise InvalidSpaceError(f"ratios must lie in (0, 1), got {a.tolist()}")
    if np.all(a == a[0]):
        return math.log(a.size) / -math.log(a[0])

    def residual(q):
        return float(np.sum(a ** q)) - 1.0

    # residual is strictly decreasing; residual(0) = n - 1 > 0
    hi = 1.0
    while residual(hi) > 0.0:
        hi *= 2.0
    q = brentq(residual, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    if abs(residual(q)) > MORAN_TOL:
        raise InvalidSpaceError(f"Moran equation residual {residual(q):.3e} too large")
    return q


@dataclass(frozen=True)
class Cylinder:
    """A word of the symbolic coding together with its geometric interval."""

    word: tuple
    left: float
    diam: float
    mass: float

    @property
    def right(self) -> float:
        return self.left + self.diam

    @property
    def midpoint(self) -> float:
        return self.left + 0.5 * self.diam


@dataclass(frozen=True)
class CellArray:
    """Vectorised partition of a space into cells.

    ``left``/``diam`` describe the geometric interval of each cell (an arc
    ``[left, left + diam)`` on the circle) and ``mass`` its reference
    measure. ``depth`` is the word length for self-similar cells and zero
    otherwise.
    """

    left: np.ndarray
    diam: np.ndarray
    mass: np.ndarray
    depth: np.ndarray

    def __len__(self) -> int:
        return self.left.shape[0]

    @property
    def rep(self) -> np.ndarray:
        """Representative point of every cell (interval midpoint)."""
        return self.left + 0.5 * self.diam

    @property
    def right(self) -> np.ndarray:
        return self.left + self.diam

    def restrict(self, lo: float, hi: float) -> "CellArray":
        """Cells whose interval lies inside ``[lo, hi]``."""
        keep = (self.left >= lo - 1e-15) & (self.right <= hi + 1e-15)
        return CellArray(self.left[keep], self.diam[keep], self.mass[keep], self.depth[keep])


class SelfSimilarSpace:
    """Natural measure on a self-similar subset of ``[0, 1]``.

    Parameters
    ----------
    ratios, offsets : sequences of float
        The maps ``g_i(x) = offsets[i] + ratios[i] * x``. They are sorted by
        offset internally, so digit ``i`` always refers to the ``i``-th
        interval from the left. The images must start at 0, end at 1 and be
        separated by gaps of at least ``1e-9``.
    c0, C0 : float, optional
        Known regularity constants; filled in by ``verify_q_regularity``
        when omitted.
    max_depth : int
        Recursion cap for all cylinder descents.
    tol : float
        Default absolute tolerance of ball-measure queries.
    """

    kind = "ifs"

    def __init__(self, ratios, offsets, c0=None, C0=None, max_depth=64, tol=1e-10):
        a = np.asarray(ratios, dtype=float)
        c = np.asarray(offsets, dtype=float)
        if a.shape != c.shape:
            raise InvalidSpaceError("ratios and offsets differ in length")
        self.Q = solve_moran(a)
        order = np.argsort(c, kind="stable")
        a, c = a[order], c[order]
        if abs(c[0]) > 1e-12 or abs(c[-1] + a[-1] - 1.0) > 1e-12:
            raise InvalidSpaceError("the first image must start at 0 and the last end at 1")
        gaps = c[1:] - (c[:-1] + a[:-1])
        if np.any(gaps < SSC_MIN_GAP):
            raise InvalidSpaceError(f"strong separation fails, gaps {gaps.tolist()}")
        probs = a ** self.Q
        probs = probs / probs.sum()
        self.ratios = a
        self.offsets = c
        self.probs = probs
        self.cum_before = np.concatenate([[0.0], np.cumsum(probs)[:-1]])
        self.max_depth = int(max_depth)
        self.tol = float(tol)
        self.c0 = c0
        self.C0 = C0
        self.mean0, self.var0 = self._base_moments()
        for arr in (self.ratios, self.offsets, self.probs, self.cum_before):
            arr.setflags(write=False)

    # -- structure ---------------------------------------------------------
    @property
    def ell(self) -> int:
        return self.ratios.shape[0]

    @property
    def hull(self):
        return (0.0, 1.0)

    @property
    def diameter(self) -> float:
        return 1.0

    @property
    def total_mass(self) -> float:
        return 1.0

    @property
    def equal_ratio(self) -> bool:
        return bool(np.all(np.abs(self.ratios - self.ratios[0]) < 1e-15))

    @property
    def ratio(self) -> float:
        """The common contraction ratio (equal-ratio spaces only)."""
        if not self.equal_ratio:
            raise InvalidSpaceError("space has unequal contraction ratios")
        return float(self.ratios[0])

    def _base_moments(self):
        p, a, c = self.probs, self.ratios, self.offsets
        m1 = np.sum(p * c) / (1.0 - np.sum(p * a))
        m2 = np.sum(p * (c * c + 2.0 * c * a * m1)) / (1.0 - np.sum(p * a * a))
        return float(m1), float(m2 - m1 * m1)

    def cylinder(self, word) -> Cylinder:
        left, diam, mass = 0.0, 1.0, 1.0
        for d in word:
            if not 0 <= d < self.ell:
                raise DomainError(f"digit {d} outside alphabet of size {self.ell}")
            left += diam * self.offsets[d]
            diam *= self.ratios[d]
            mass *= self.probs[d]
        return Cylinder(tuple(word), left, diam, mass)

    def cylinders_at_depth(self, n: int) -> CellArray:
        """All cylinders of word length ``n`` in left-to-right order."""
        if n < 0:
            raise DomainError("depth must be non-negative")
        left = np.zeros(1)
        diam = np.ones(1)
        mass = np.ones(1)
        for _ in range(n):
            left = (left[:, None] + diam[:, None] * self.offsets[None, :]).ravel()
            mass = (mass[:, None] * self.probs[None, :]).ravel()
            diam = (diam[:, None] * self.ratios[None, :]).ravel()
        return CellArray(left, diam, mass, np.full(left.shape, n, dtype=np.int64))

    def cells(self, tau: float) -> CellArray:
        """Cut-set partition at scale ``tau`` as arrays (see ``cut_set``)."""
        if not 0.0 < tau < 1.0:
            raise DomainError(f"scale must lie in (0, 1), got {tau}")
        thresh = tau * (1.0 + _SCALE_SLACK)
        done = []
        left, diam, mass = np.zeros(1), np.ones(1), np.ones(1)
        depth = np.zeros(1, dtype=np.int64)
        while left.size:
            fin = diam <= thresh
            if fin.any():
                done.append((left[fin], diam[fin], mass[fin], depth[fin]))
            left, diam, mass, depth = left[~fin], diam[~fin], mass[~fin], depth[~fin]
            if not left.size:
                break
            if depth[0] >= self.max_depth:
                raise ToleranceError("cut-set deeper than max_depth")
            left = (left[:, None] + diam[:, None] * self.offsets[None, :]).ravel()
            mass = (mass[:, None] * self.probs[None, :]).ravel()
            diam = (diam[:, None] * self.ratios[None, :]).ravel()
            depth = np.repeat(depth + 1, self.ell)
        parts = [np.concatenate(col) for col in zip(*done)]
        order = np.argsort(parts[0], kind="stable")
        return CellArray(*(p[order] for p in parts))

    def code(self, x: float, depth: int) -> tuple:
        """First ``depth`` digits of a point of the hull; raises in gaps."""
        digits = []
        z = float(x)
        for _ in range(depth):
            i = int(np.searchsorted(self.offsets, z, side="right")) - 1
            if i < 0 or z > self.offsets[i] + self.ratios[i]:
                raise DomainError(f"{x} falls in a gap at level {len(digits) + 1}")
            digits.append(i)
            z = (z - self.offsets[i]) / self.ratios[i]
        return tuple(digits)

    def shift(self, x, k: int = 1):
        """The expanding map ``S`` applied ``k`` times (vectorised)."""
        z = np.asarray(x, dtype=float).copy()
        for _ in range(k):
            i = np.searchsorted(self.offsets, z, side="right") - 1
            i = np.clip(i, 0, self.ell - 1)
            inside = z <= self.offsets[i] + self.ratios[i] * (1.0 + 1e-12)
            if not np.all(inside):
                raise DomainError("shift is undefined on the gaps of the attractor")
            z = np.clip((z - self.offsets[i]) / self.ratios[i], 0.0, 1.0)
        return z

    def expansion(self, x, n: int):
        """``|DS^n(x)|``, i.e. the inverse diameter of the level-``n`` cylinder."""
        z = np.atleast_1d(np.asarray(x, dtype=float)).copy()
        logd = np.zeros(z.shape)
        for _ in range(n):
            i = np.clip(np.searchsorted(self.offsets, z, side="right") - 1, 0, self.ell - 1)
            logd -= np.log(self.ratios[i])
            z = np.clip((z - self.offsets[i]) / self.ratios[i], 0.0, 1.0)
        return np.exp(logd)

    # -- measure -----------------------------------------------------------
    def _check_points(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(x < -1e-12) or np.any(x > 1.0 + 1e-12):
            raise DomainError("point outside the attractor hull [0, 1]")
        return np.clip(x, 0.0, 1.0)

    def cdf(self, y, tol=None):
        """Natural measure of ``(-inf, y)``; returns ``(values, error_bounds)``."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        tol = self.tol / 2 if tol is None else tol
        vals, errs, status = K.ss_cdf_many(y, self.offsets, self.ratios, self.probs,
                                           self.cum_before, tol, self.max_depth)
        if status:
            raise ToleranceError("cdf recursion exceeded max_depth",
                                 estimate=vals, bound=float(errs.max()))
        return vals, errs

    def interval_mass(self, lo, hi, tol=None):
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        f_hi, e_hi = self.cdf(hi, tol)
        f_lo, e_lo = self.cdf(lo, tol)
        return np.maximum(f_hi - f_lo, 0.0), e_hi + e_lo

    def ball_measure(self, x, r, tol=None):
        x = self._check_points(x)
        r = np.broadcast_to(np.asarray(r, dtype=float), x.shape)
        if np.any(r <= 0.0):
            raise DomainError("radius must be positive")
        vals, errs = self.interval_mass(x - r, x + r, tol)
        return vals, errs

    def window_integral(self, x, t_lo, t_hi=1.0, u=0.0, v=np.inf, rtol=1e-9):
        """``int G(|y-x|) dH(y)`` for the scale window ``[t_lo, t_hi]``.

        With the defaults this is ``int_{t_lo}^{t_hi} H(B(x, r)) r^{-Q-1} dr``.
        The absolute tolerance is ``rtol * max(1, log(t_hi / t_lo))``.
        Returns ``(values, error_bounds)``.
        """
        x = self._check_points(x)
        n = x.shape[0]
        t_lo = np.broadcast_to(np.asarray(t_lo, dtype=float), (n,)).copy()
        t_hi = np.broadcast_to(np.asarray(t_hi, dtype=float), (n,)).copy()
        if np.any(t_lo <= 0.0) or np.any(t_hi < t_lo):
            raise DomainError("need 0 < t_lo <= t_hi")
        uu = np.broadcast_to(np.asarray(u, dtype=float), (n,)).copy()
        vv = np.broadcast_to(np.asarray(v, dtype=float), (n,)).copy()
        tol = rtol * np.maximum(1.0, np.log(t_hi / t_lo))
        vals, errs, status = K.ss_window_many(x, t_lo, t_hi, uu, vv, self.offsets,
                                              self.ratios, self.probs, self.Q,
                                              self.mean0, self.var0, tol, self.max_depth)
        if status:
            raise ToleranceError("window integral exceeded max_depth",
                                 estimate=vals, bound=float(errs.max()))
        return vals, errs

    def annulus_integral(self, x, t, delta, rtol=1e-9):
        """``int_t^1 H(B(x, s+delta) minus B(x, s-delta)) s^{-Q-1} ds``."""
        return self.window_integral(x, t, 1.0, u=delta, v=delta, rtol=rtol)

    def sample(self, rng, resolution, size=None):
        return sample_from_measure(self, rng, resolution, size)

    def to_json(self) -> dict:
        return {"kind": "ifs", "ratios": self.ratios.tolist(), "offsets": self.offsets.tolist()}

    def __repr__(self):
        return f"SelfSimilarSpace(ratios={self.ratios.tolist()}, offsets={self.offsets.tolist()})"


class CircleSpace:
    """Circle of circumference one with a piecewise-constant density.

    ``arcs`` is a list of ``(from, to, weight)`` covering ``[0, 1)`` without
    overlap. With unit density, ``H(B(x, r)) = min(2r, 1)``.
    """

    kind = "circle"
    Q = 1.0
    equal_ratio = False
    max_depth = 64

    def __init__(self, arcs=((0.0, 1.0, 1.0),), c0=None, C0=None):
        arcs = sorted((float(a), float(b), float(w)) for a, b, w in arcs)
        if not arcs:
            raise InvalidSpaceError("circle needs at least one arc")
        pos = 0.0
        for a, b, w in arcs:
            if abs(a - pos) > 1e-12 or b <= a:
                raise InvalidSpaceError("arcs must tile [0, 1) in order")
            if w < 0.0:
                raise InvalidSpaceError("arc weights must be non-negative")
            pos = b
        if abs(pos - 1.0) > 1e-12:
            raise InvalidSpaceError("arcs must end at 1")
        bounds = np.array([a for a, _, _ in arcs] + [1.0])
        weights = np.array([w for _, _, w in arcs])
        if not np.any(weights > 0):
            raise InvalidSpaceError("total mass must be positive")
        self.bounds = bounds
        self.weights = weights
        self.cum_mass = np.concatenate([[0.0], np.cumsum(weights * np.diff(bounds))])
        self.arcs = tuple(arcs)
        self.c0 = c0
        self.C0 = C0
        for arr in (self.bounds, self.weights, self.cum_mass):
            arr.setflags(write=False)

    @property
    def hull(self):
        return (0.0, 1.0)

    @property
    def diameter(self) -> float:
        return 0.5

    @property
    def total_mass(self) -> float:
        return float(self.cum_mass[-1])

    def density(self, x):
        z = np.mod(np.asarray(x, dtype=float), 1.0)
        k = np.clip(np.searchsorted(self.bounds, z, side="right") - 1, 0, self.weights.size - 1)
        return self.weights[k]

    def _check_points(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if not np.all(np.isfinite(x)):
            raise DomainError("non-finite point")
        return np.mod(x, 1.0)

    def cdf(self, y, tol=None):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        vals = np.array([K.circle_cum(v, self.bounds, self.weights, self.cum_mass) for v in y])
        return vals, np.zeros_like(vals)

    def interval_mass(self, lo, hi, tol=None):
        """Mass of arcs ``[lo, hi]`` with ``lo <= hi`` on the lifted line."""
        f_hi, _ = self.cdf(hi)
        f_lo, _ = self.cdf(lo)
        return np.maximum(f_hi - f_lo, 0.0), np.zeros_like(f_hi)

    def ball_measure(self, x, r, tol=None):
        x = self._check_points(x)
        r = np.broadcast_to(np.asarray(r, dtype=float), x.shape)
        if np.any(r <= 0.0):
            raise DomainError("radius must be positive")
        vals = np.array([K.circle_ball(a, b, self.bounds, self.weights, self.cum_mass)
                         for a, b in zip(x, r)])
        return vals, np.zeros_like(vals)

    def window_integral(self, x, t_lo, t_hi=1.0, u=0.0, v=np.inf, rtol=None):
        """Exact window integral (piecewise closed form); see SelfSimilarSpace."""
        if np.any(np.asarray(u) != 0.0) or np.any(np.isfinite(v)):
            raise DomainError("circle window integrals support u=0, v=inf only; use annulus_integral")
        x = self._check_points(x)
        n = x.shape[0]
        t_lo = np.broadcast_to(np.asarray(t_lo, dtype=float), (n,)).copy()
        t_hi = np.broadcast_to(np.asarray(t_hi, dtype=float), (n,)).copy()
        if np.any(t_lo <= 0.0) or np.any(t_hi < t_lo):
            raise DomainError("need 0 < t_lo <= t_hi")
        vals = K.circle_window_many(x, t_lo, t_hi, self.bounds, self.weights, self.cum_mass)
        return vals, np.zeros_like(vals)

    def annulus_integral(self, x, t, delta, rtol=None):
        x = self._check_points(x)
        n = x.shape[0]
        t = np.broadcast_to(np.asarray(t, dtype=float), (n,)).copy()
        delta = np.broadcast_to(np.asarray(delta, dtype=float), (n,)).copy()
        vals = K.circle_annulus_many(x, t, delta, self.bounds, self.weights, self.cum_mass)
        return vals, np.zeros_like(vals)

    def cells(self, tau: float) -> CellArray:
        """Arcs of length at most ``tau``, also split at density breakpoints."""
        if not 0.0 < tau < 1.0:
            raise DomainError(f"scale must lie in (0, 1), got {tau}")
        n = int(math.ceil(1.0 / tau * (1.0 - _SCALE_SLACK)))
        edges = np.union1d(np.linspace(0.0, 1.0, n + 1), self.bounds)
        left = edges[:-1]
        diam = np.diff(edges)
        mass = diam * self.density(left + 0.5 * diam)
        return CellArray(left, diam, mass, np.zeros(left.shape, dtype=np.int64))

    def sample(self, rng, resolution=None, size=None):
        return sample_from_measure(self, rng, resolution, size)

    def to_json(self) -> dict:
        return {"kind": "circle",
                "arcs": [{"from": a, "to": b, "weight": w} for a, b, w in self.arcs]}

    def __repr__(self):
        return f"CircleSpace(arcs={list(self.arcs)})"


# -- module-level operations -------------------------------------------------

def ball_measure(space, x, r, tol=None):
    """Reference measure of the open ball ``B(x, r)``.

    Scalar input gives a float; array input gives an array. Raises
    ``ToleranceError`` when the cylinder descent hits ``max_depth``.
    """
    vals, _ = space.ball_measure(x, r, tol)
    return float(vals[0]) if np.ndim(x) == 0 and np.ndim(r) == 0 else vals


def cut_set(space: SelfSimilarSpace, tau: float) -> list:
    """Words ``u`` with ``diam(X_u) <= tau < diam(X_parent(u))``.

    Returned in left-to-right order as ``Cylinder`` objects. Comparisons
    with ``tau`` allow a relative slack of 1e-12 so that exact powers of
    the ratio land on the intended side.
    """
    if not isinstance(space, SelfSimilarSpace):
        raise InvalidSpaceError("cut sets are defined for self-similar spaces")
    if not 0.0 < tau < 1.0:
        raise DomainError(f"tau must lie in (0, 1), got {tau}")
    thresh = tau * (1.0 + _SCALE_SLACK)
    out = []
    stack = [()]
    while stack:
        word = stack.pop()
        cyl = space.cylinder(word)
        if cyl.diam <= thresh:
            out.append(cyl)
        else:
            if len(word) >= space.max_depth:
                raise ToleranceError("cut-set deeper than max_depth")
            stack.extend(word + (i,) for i in reversed(range(space.ell)))
    return out


def sample_from_measure(space, rng, resolution=None, size=None):
    """Draw points from the normalised reference measure.

    Self-similar spaces draw i.i.d. digits with probabilities ``a_i**Q``
    until the cylinder diameter drops below ``resolution`` and return the
    cylinder midpoint. Circle spaces invert the distribution function of the
    density exactly (``resolution`` is ignored).
    """
    n = 1 if size is None else int(size)
    if isinstance(space, CircleSpace):
        u = rng.random(n) * space.total_mass
        k = np.clip(np.searchsorted(space.cum_mass, u, side="right") - 1, 0, space.weights.size - 1)
        w = space.weights[k]
        safe = np.where(w > 0, w, 1.0)
        pts = space.bounds[k] + (u - space.cum_mass[k]) / safe
        pts = np.mod(pts, 1.0)
    else:
        if resolution is None or not resolution > 0.0:
            raise DomainError("resolution must be positive")
        amax = float(space.ratios.max())
        depth = max(1, int(math.ceil(math.log(resolution) / math.log(amax))) + 1)
        if depth > space.max_depth:
            raise ToleranceError("resolution requires more than max_depth digits")
        digits = rng.choice(space.ell, size=(n, depth), p=space.probs)
        a = space.ratios[digits]
        c = space.offsets[digits]
        diam_after = np.cumprod(a, axis=1)
        diam_before = np.concatenate([np.ones((n, 1)), diam_after[:, :-1]], axis=1)
        # digit k is used while the cylinder before it is still too coarse
        active = diam_before >= resolution
        left = np.sum(np.where(active, diam_before * c, 0.0), axis=1)
        diam = np.min(np.where(active, diam_after, np.inf), axis=1)
        pts = left + 0.5 * diam
    return float(pts[0]) if size is None else pts


def verify_q_regularity(space, grid):
    """Empirical ``(min, max)`` of ``H(B(x, r)) / r**Q`` over ``(x, r)`` pairs."""
    pairs = list(grid)
    if not pairs:
        raise DomainError("empty regularity grid")
    x = np.array([p[0] for p in pairs], dtype=float)
    r = np.array([p[1] for p in pairs], dtype=float)
    if np.any(r > space.diameter * (1 + 1e-12)):
        raise DomainError("radii must not exceed the diameter of the space")
    mass, _ = space.ball_measure(x, r)
    ratio = mass / r ** space.Q
    lo, hi = float(ratio.min()), float(ratio.max())
    if not (0.0 < lo <= hi < math.inf):
        raise InvalidSpaceError(f"space is not Q-regular on this grid: [{lo}, {hi}]")
    return lo, hi


def space_from_json(obj) -> SelfSimilarSpace | CircleSpace:
    """Build a space from its JSON description (dict, JSON text or path)."""
    if isinstance(obj, (str, Path)):
        text = str(obj)
        if text.lstrip().startswith("{"):
            obj = json.loads(text)
        else:
            path = Path(text)
            if not path.exists():
                path = bundled_space_path(text)
            obj = json.loads(path.read_text())
    kind = obj.get("kind")
    if kind == "ifs":
        return SelfSimilarSpace(obj["ratios"], obj["offsets"])
    if kind == "circle":
        arcs = obj.get("arcs", [{"from": 0.0, "to": 1.0, "weight": 1.0}])
        return CircleSpace([(a["from"], a["to"], a["weight"]) for a in arcs])
    raise InvalidSpaceError(f"unknown space kind {kind!r}")


def bundled_space_path(name: str) -> Path:
    """Path of a bundled fixture such as ``ternary`` or ``circle.json``."""
    base = Path(__file__).resolve().parent / "data"
    stem = name[:-5] if name.endswith(".json") else name
    path = base / f"{stem}.json"
    if not path.exists():
        raise InvalidSpaceError(f"no such space file or bundled fixture: {name}")
    return path


def ternary() -> SelfSimilarSpace:
    """The middle-third Cantor set."""
    return SelfSimilarSpace([1 / 3, 1 / 3], [0.0, 2 / 3])
