"""Compiled inner loops for ball measures and scale-window integrals.

Everything here works on plain float arrays so the numba-compiled code has
no knowledge of the space classes. A self-similar space is passed as the
tuple ``(offsets, ratios, probs, cum_before)`` with maps sorted by offset
and hull ``[0, 1]``; a circle space as ``(bounds, weights, cum_mass)``.

The window integral

    J(x) = int_{t_lo}^{t_hi} H(B_+(x, r)) ... r^{-Q-1} dr

is evaluated through Fubini as ``int G(|y - x|) dH(y)`` with

    G(d) = [psi(max(t_lo, d - u)) - psi(min(t_hi, d + v))]^+ ,
    psi(s) = s^{-Q} / Q.

``u = 0, v = inf`` gives the plain integral of the ball measure; ``u = v =
delta`` gives the annulus integral used for continuity bounds.
"""

import math

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_DEPTH = 1


@njit(cache=True, nogil=True)
def ss_cdf(y, offsets, ratios, probs, cum_before, tol, max_depth):
    """Distribution function of the natural measure at ``y``.

    Returns ``(value, error_bound, status)``.
    """
    if y <= 0.0:
        return 0.0, 0.0, STATUS_OK
    if y >= 1.0:
        return 1.0, 0.0, STATUS_OK
    ell = offsets.shape[0]
    acc = 0.0
    w = 1.0
    z = y
    for _ in range(max_depth):
        child = -1
        for i in range(ell):
            c = offsets[i]
            if z < c:
                return acc + w * cum_before[i], 0.0, STATUS_OK
            if z < c + ratios[i]:
                child = i
                break
        if child < 0:
            return acc + w, 0.0, STATUS_OK
        acc += w * cum_before[child]
        z = (z - offsets[child]) / ratios[child]
        w *= probs[child]
        if 0.5 * w <= tol:
            return acc + 0.5 * w, 0.5 * w, STATUS_OK
    return acc + 0.5 * w, 0.5 * w, STATUS_DEPTH


@njit(cache=True, nogil=True)
def ss_cdf_many(ys, offsets, ratios, probs, cum_before, tol, max_depth):
    n = ys.shape[0]
    out = np.empty(n)
    err = np.empty(n)
    status = 0
    for j in range(n):
        v, e, s = ss_cdf(ys[j], offsets, ratios, probs, cum_before, tol, max_depth)
        out[j] = v
        err[j] = e
        if s > status:
            status = s
    return out, err, status


@njit(cache=True, nogil=True)
def _psi(s, Q):
    return s ** (-Q) / Q


@njit(cache=True, nogil=True)
def _window_g(d, t_lo, t_hi, u, v, Q):
    lo = max(t_lo, d - u)
    hi = min(t_hi, d + v)
    if lo < hi:
        return _psi(lo, Q) - _psi(hi, Q)
    return 0.0


@njit(cache=True, nogil=True)
def _window_tv(dmin, dmax, t_lo, t_hi, u, v, Q):
    a = abs(_psi(max(t_lo, dmin - u), Q) - _psi(max(t_lo, dmax - u), Q))
    b = abs(_psi(min(t_hi, dmin + v), Q) - _psi(min(t_hi, dmax + v), Q))
    return a + b


@njit(cache=True, nogil=True)
def ss_window_integral(x, t_lo, t_hi, u, v, offsets, ratios, probs, Q,
                       mean0, var0, tol, max_depth):
    """Fubini evaluation of a window integral on a self-similar space.

    Cylinders on one side of ``x`` whose distance range avoids every kink of
    ``G`` are integrated with a second-order expansion around the exact
    centroid of the natural measure; the third-order remainder is bounded
    rigorously. Cylinders touching a kink (or containing ``x``) are split
    until their total-variation bound fits a geometric share of ``tol``.

    Returns ``(value, error_bound, status)``.
    """
    ell = offsets.shape[0]
    cap = (max_depth + 2) * ell + 2
    st_l = np.empty(cap)
    st_d = np.empty(cap)
    st_m = np.empty(cap)
    st_k = np.empty(cap, dtype=np.int64)
    bps = np.array([t_lo + u, t_hi - v, t_hi + u, t_lo - v])
    q1 = Q + 1.0
    q12 = (Q + 1.0) * (Q + 2.0)

    top = 1
    st_l[0] = 0.0
    st_d[0] = 1.0
    st_m[0] = 1.0
    st_k[0] = 0
    total = 0.0
    err = 0.0
    status = STATUS_OK
    while top > 0:
        top -= 1
        L = st_l[top]
        D = st_d[top]
        m = st_m[top]
        k = st_k[top]
        if x <= L:
            dmin = L - x
            dmax = L + D - x
            side = 1
        elif x >= L + D:
            dmin = x - L - D
            dmax = x - L
            side = -1
        else:
            dmin = 0.0
            dmax = max(x - L, L + D - x)
            side = 0
        straddle = False
        for b in bps:
            if dmin < b < dmax:
                straddle = True
                break
        dmid = 0.5 * (dmin + dmax)
        if not straddle:
            if _window_g(dmid, t_lo, t_hi, u, v, Q) <= 0.0:
                continue
            act1 = dmid - u > t_lo
            act2 = dmid + v < t_hi
            if not act1 and not act2:
                total += m * _window_g(dmid, t_lo, t_hi, u, v, Q)
                continue
            if side != 0:
                var = D * D * var0
                ymean = L + D * mean0
                mu = ymean - x if side > 0 else x - ymean
                g2 = 0.0
                g3 = 0.0
                if act1:
                    g2 += q1 * (mu - u) ** (-Q - 2.0)
                    g3 += q12 * (dmin - u) ** (-Q - 3.0)
                if act2:
                    g2 -= q1 * (mu + v) ** (-Q - 2.0)
                    g3 += q12 * (dmin + v) ** (-Q - 3.0)
                e = m * g3 * D * var / 6.0
                if e <= tol * m:
                    total += m * (_window_g(mu, t_lo, t_hi, u, v, Q) + 0.5 * g2 * var)
                    err += e
                    continue
        tvb = m * _window_tv(dmin, dmax, t_lo, t_hi, u, v, Q)
        if (straddle or side == 0) and tvb <= tol * 0.5 ** k / 16.0:
            total += m * _window_g(dmid, t_lo, t_hi, u, v, Q)
            err += tvb
            continue
        if k >= max_depth:
            status = STATUS_DEPTH
            total += m * _window_g(dmid, t_lo, t_hi, u, v, Q)
            err += tvb
            continue
        for i in range(ell):
            st_l[top] = L + D * offsets[i]
            st_d[top] = D * ratios[i]
            st_m[top] = m * probs[i]
            st_k[top] = k + 1
            top += 1
    return total, err, status


@njit(cache=True, nogil=True)
def ss_window_many(xs, t_lo, t_hi, u, v, offsets, ratios, probs, Q,
                   mean0, var0, tol, max_depth):
    """Vector version; ``t_lo``, ``t_hi``, ``u``, ``v``, ``tol`` are arrays."""
    n = xs.shape[0]
    out = np.empty(n)
    err = np.empty(n)
    status = 0
    for j in range(n):
        val, e, s = ss_window_integral(xs[j], t_lo[j], t_hi[j], u[j], v[j],
                                       offsets, ratios, probs, Q, mean0, var0,
                                       tol[j], max_depth)
        out[j] = val
        err[j] = e
        if s > status:
            status = s
    return out, err, status


# --------------------------------------------------------------------------
# circle with piecewise-constant density (Q = 1, circumference 1)
# --------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def circle_cum(y, bounds, weights, cum_mass):
    """Mass of ``[0, y)`` lifted periodically to the real line."""
    total = cum_mass[-1]
    fl = math.floor(y)
    z = y - fl
    k = np.searchsorted(bounds, z, side="right") - 1
    if k >= weights.shape[0]:
        k = weights.shape[0] - 1
    return fl * total + cum_mass[k] + weights[k] * (z - bounds[k])


@njit(cache=True, nogil=True)
def circle_weight(y, bounds, weights):
    z = y - math.floor(y)
    k = np.searchsorted(bounds, z, side="right") - 1
    if k >= weights.shape[0]:
        k = weights.shape[0] - 1
    return weights[k]


@njit(cache=True, nogil=True)
def circle_ball(x, r, bounds, weights, cum_mass):
    if r <= 0.0:
        return 0.0
    if r >= 0.5:
        return cum_mass[-1]
    return (circle_cum(x + r, bounds, weights, cum_mass)
            - circle_cum(x - r, bounds, weights, cum_mass))


@njit(cache=True, nogil=True)
def circle_shift_integral(x, shift, a, b, bounds, weights, cum_mass):
    """Exact ``int_a^b H(B(x, max(s + shift, 0))) s^{-2} ds``.

    The integrand is piecewise rational with breakpoints where ``x +- (s +
    shift)`` crosses an arc boundary, so each piece integrates in closed form.
    """
    if b <= a:
        return 0.0
    nb = bounds.shape[0] - 1
    pts = np.empty(4 * nb + 4)
    npts = 0
    pts[npts] = a
    npts += 1
    pts[npts] = b
    npts += 1
    for extra in (0.5 - shift, -shift):
        if a < extra < b:
            pts[npts] = extra
            npts += 1
    for j in range(nb):
        bj = bounds[j]
        r1 = (bj - x) % 1.0
        r2 = (x - bj) % 1.0
        for r in (r1, r2):
            s = r - shift
            if a < s < b:
                pts[npts] = s
                npts += 1
    grid = np.sort(pts[:npts])
    # nearest arc boundary; below it the ball measure is exactly linear in r
    # through the origin, which keeps tiny scales free of cancellation
    dmin = 0.5
    for j in range(nb):
        d = abs(x - bounds[j]) % 1.0
        dmin = min(dmin, d, 1.0 - d)
    total_mass = cum_mass[-1]
    total = 0.0
    for i in range(npts - 1):
        s0 = grid[i]
        s1 = grid[i + 1]
        if s1 <= s0:
            continue
        rm = 0.5 * (s0 + s1) + shift
        if rm <= 0.0:
            continue
        if rm >= 0.5:
            total += total_mass * (1.0 / s0 - 1.0 / s1)
            continue
        slope = circle_weight(x + rm, bounds, weights) + circle_weight(x - rm, bounds, weights)
        if s1 + shift <= dmin:
            c = 0.0
        else:
            c = circle_ball(x, rm, bounds, weights, cum_mass) - slope * rm
        total += (slope * shift + c) * (1.0 / s0 - 1.0 / s1) + slope * math.log(s1 / s0)
    return total


@njit(cache=True, nogil=True)
def circle_window_many(xs, t_lo, t_hi, bounds, weights, cum_mass):
    n = xs.shape[0]
    out = np.empty(n)
    for j in range(n):
        out[j] = circle_shift_integral(xs[j], 0.0, t_lo[j], t_hi[j],
                                       bounds, weights, cum_mass)
    return out


@njit(cache=True, nogil=True)
def circle_annulus_many(xs, t, delta, bounds, weights, cum_mass):
    n = xs.shape[0]
    out = np.empty(n)
    for j in range(n):
        plus = circle_shift_integral(xs[j], delta[j], t[j], 1.0, bounds, weights, cum_mass)
        minus = circle_shift_integral(xs[j], -delta[j], t[j], 1.0, bounds, weights, cum_mass)
        out[j] = plus - minus
    return out


# --------------------------------------------------------------------------
# cutout geometry
# --------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def ss_meets(lo, hi, offsets, ratios, max_depth):
    """Whether the closed interval ``[lo, hi]`` meets the attractor."""
    if hi < 0.0 or lo > 1.0 or hi < lo:
        return False
    ell = offsets.shape[0]
    cap = (max_depth + 2) * ell + 2
    st_l = np.empty(cap)
    st_d = np.empty(cap)
    st_k = np.empty(cap, dtype=np.int64)
    top = 1
    st_l[0] = 0.0
    st_d[0] = 1.0
    st_k[0] = 0
    while top > 0:
        top -= 1
        L = st_l[top]
        D = st_d[top]
        k = st_k[top]
        if hi < L or lo > L + D:
            continue
        if lo <= L and L + D <= hi:
            return True
        if k >= max_depth or D < 1e-15:
            return True
        for i in range(ell):
            st_l[top] = L + D * offsets[i]
            st_d[top] = D * ratios[i]
            st_k[top] = k + 1
            top += 1
    return False


@njit(cache=True, nogil=True)
def outer_flags(cell_l, cell_r, cell_pos, s_lo, s_hi, self_similar, offsets, ratios,
                max_depth):
    """Cells whose closed interval meets the surviving set inside the space.

    Cells and surviving intervals are sorted and disjoint. For circle spaces
    (``self_similar`` false) a cell meets the space whenever ``cell_pos``.
    """
    nc = cell_l.shape[0]
    ns = s_lo.shape[0]
    out = np.zeros(nc, dtype=np.bool_)
    j = 0
    for i in range(nc):
        L = cell_l[i]
        R = cell_r[i]
        while j < ns and s_hi[j] < L:
            j += 1
        jj = j
        while jj < ns and s_lo[jj] <= R:
            a = max(s_lo[jj], L)
            b = min(s_hi[jj], R)
            if self_similar:
                if ss_meets(a, b, offsets, ratios, max_depth):
                    out[i] = True
                    break
            elif cell_pos[i]:
                out[i] = True
                break
            jj += 1
    return out


@njit(cache=True, nogil=True)
def pair_energy(rep, mass, s, periodic):
    """``sum_{i != j} m_i m_j d(x_i, x_j)^{-s}`` over sorted representatives."""
    n = rep.shape[0]
    total = 0.0
    for i in range(n):
        acc = 0.0
        for j in range(i + 1, n):
            d = rep[j] - rep[i]
            if periodic and d > 0.5:
                d = 1.0 - d
            acc += mass[j] * d ** (-s)
        total += 2.0 * mass[i] * acc
    return total
