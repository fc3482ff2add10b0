"""Numba kernels for the Quermass-interaction Metropolis-Hastings chain.

The chain state is a disc configuration on the margin-extended window.
Perimeter deltas are exact (angular-interval clipping of each affected
circle); area and Euler-characteristic deltas are computed on a fixed
global pixel grid anchored at the extended-window origin, which makes
them telescope exactly: by inclusion-exclusion, inserting disc D changes
the pixelized union U by

    dA   = |D_px \\ U_px|,   dchi = chi(D_px) - chi(D_px & U_px),

and both right-hand sides only involve pixels inside D's bounding box
and discs overlapping D.  chi here is V - E + F of the closed-square
complex of a pixel set, the convention under which Euler characteristic
is additive.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_TWOPI = 2.0 * np.pi
_MAX_INTERVALS = 128


@njit(cache=True)
def _covered_measure(cx, cy, cr, n, skip, j_idx, jx, jy, jr, has_extra, ex, ey, er):
    """Angular measure of circle (jx, jy, jr) covered by other discs.

    Covering discs are the state discs except ``skip`` and ``j_idx``,
    plus an optional extra disc.  Exactly coincident discs: the one with
    the smaller index covers the other (the extra disc counts as having
    the largest index), so duplicates contribute no exposed arc without
    erasing the original.  Returns a value in [0, 2*pi].
    """
    lo_buf = np.empty(_MAX_INTERVALS, np.float64)
    hi_buf = np.empty(_MAX_INTERVALS, np.float64)
    m = 0
    for t in range(n + 1):
        if t < n:
            if t == skip or t == j_idx:
                continue
            kx, ky, kr, kidx = cx[t], cy[t], cr[t], t
        else:
            if not has_extra:
                break
            kx, ky, kr, kidx = ex, ey, er, n + 1
        dx = kx - jx
        dy = ky - jy
        d2 = dx * dx + dy * dy
        rsum = jr + kr
        if d2 >= rsum * rsum:
            continue
        d = np.sqrt(d2)
        if d <= 1e-12:
            if kr > jr or (kr == jr and kidx < j_idx):
                return _TWOPI
            continue
        if d + jr <= kr:
            return _TWOPI
        arg = (d2 + jr * jr - kr * kr) / (2.0 * d * jr)
        if arg >= 1.0:
            continue
        if arg <= -1.0:
            return _TWOPI
        phi = np.arccos(arg)
        theta = np.arctan2(dy, dx)
        lo = theta - phi
        hi = theta + phi
        # normalize start into [0, 2*pi), split wraparound
        shift = np.floor(lo / _TWOPI) * _TWOPI
        lo -= shift
        hi -= shift
        if m >= _MAX_INTERVALS - 2:
            return _TWOPI  # overload guard: treat as fully covered
        if hi > _TWOPI:
            lo_buf[m] = lo
            hi_buf[m] = _TWOPI
            m += 1
            lo_buf[m] = 0.0
            hi_buf[m] = hi - _TWOPI
            m += 1
        else:
            lo_buf[m] = lo
            hi_buf[m] = hi
            m += 1
    if m == 0:
        return 0.0
    # insertion sort by interval start
    for a in range(1, m):
        klo = lo_buf[a]
        khi = hi_buf[a]
        b = a - 1
        while b >= 0 and lo_buf[b] > klo:
            lo_buf[b + 1] = lo_buf[b]
            hi_buf[b + 1] = hi_buf[b]
            b -= 1
        lo_buf[b + 1] = klo
        hi_buf[b + 1] = khi
    covered = 0.0
    cur_lo = lo_buf[0]
    cur_hi = hi_buf[0]
    for a in range(1, m):
        if lo_buf[a] <= cur_hi:
            if hi_buf[a] > cur_hi:
                cur_hi = hi_buf[a]
        else:
            covered += cur_hi - cur_lo
            cur_lo = lo_buf[a]
            cur_hi = hi_buf[a]
    covered += cur_hi - cur_lo
    if covered > _TWOPI:
        covered = _TWOPI
    return covered


@njit(cache=True)
def _chi_closed_squares(mask):
    """V - E + F of the closed-square complex of a pixel set."""
    bw, bh = mask.shape
    f = 0
    e = 0
    for a in range(bw):
        for b in range(bh):
            if mask[a, b]:
                f += 1
                if a + 1 < bw and mask[a + 1, b]:
                    e += 1
                if b + 1 < bh and mask[a, b + 1]:
                    e += 1
    v = 0
    for a in range(bw + 1):
        for b in range(bh + 1):
            touched = False
            if a > 0 and b > 0 and mask[a - 1, b - 1]:
                touched = True
            elif a > 0 and b < bh and mask[a - 1, b]:
                touched = True
            elif a < bw and b > 0 and mask[a, b - 1]:
                touched = True
            elif a < bw and b < bh and mask[a, b]:
                touched = True
            if touched:
                v += 1
    return v - e + f


@njit(cache=True)
def _delta_insert(cx, cy, cr, n, skip, x, y, r, h, ox, oy):
    """(dA, dL, dchi) of inserting disc (x, y, r) into the state sans ``skip``."""
    nbr = np.empty(n, np.int64)
    nn = 0
    for k in range(n):
        if k == skip:
            continue
        dx = cx[k] - x
        dy = cy[k] - y
        rsum = cr[k] + r
        if dx * dx + dy * dy < rsum * rsum:
            nbr[nn] = k
            nn += 1

    # perimeter: new exposed arc of the inserted disc, minus what it hides
    cov_new = _covered_measure(cx, cy, cr, n, skip, -1, x, y, r, False, 0.0, 0.0, 0.0)
    d_l = r * (_TWOPI - cov_new)
    for a in range(nn):
        j = nbr[a]
        cov_wo = _covered_measure(
            cx, cy, cr, n, skip, j, cx[j], cy[j], cr[j], False, 0.0, 0.0, 0.0
        )
        cov_w = _covered_measure(
            cx, cy, cr, n, skip, j, cx[j], cy[j], cr[j], True, x, y, r
        )
        d_l += cr[j] * (cov_wo - cov_w)

    # pixels of the new disc, split into covered / newly exposed
    a0 = int(np.floor((x - r - ox) / h)) - 1
    a1 = int(np.ceil((x + r - ox) / h)) + 1
    b0 = int(np.floor((y - r - oy) / h)) - 1
    b1 = int(np.ceil((y + r - oy) / h)) + 1
    bw = a1 - a0 + 1
    bh = b1 - b0 + 1
    mask_d = np.zeros((bw, bh), np.bool_)
    mask_i = np.zeros((bw, bh), np.bool_)
    fresh = 0
    r2 = r * r
    for a in range(a0, a1 + 1):
        pxc = ox + (a + 0.5) * h
        ddx = pxc - x
        if ddx * ddx > r2:
            continue
        for b in range(b0, b1 + 1):
            pyc = oy + (b + 0.5) * h
            ddy = pyc - y
            if ddx * ddx + ddy * ddy <= r2:
                mask_d[a - a0, b - b0] = True
                covered = False
                for t in range(nn):
                    k = nbr[t]
                    ex = pxc - cx[k]
                    ey = pyc - cy[k]
                    if ex * ex + ey * ey <= cr[k] * cr[k]:
                        covered = True
                        break
                if covered:
                    mask_i[a - a0, b - b0] = True
                else:
                    fresh += 1
    d_a = fresh * h * h
    d_chi = _chi_closed_squares(mask_d) - _chi_closed_squares(mask_i)
    return d_a, d_l, float(d_chi)


@njit(cache=True)
def _perimeter_from_scratch(cx, cy, cr, n):
    total = 0.0
    for j in range(n):
        cov = _covered_measure(
            cx, cy, cr, n, -1, j, cx[j], cy[j], cr[j], False, 0.0, 0.0, 0.0
        )
        total += cr[j] * (_TWOPI - cov)
    return total


@njit(cache=True)
def _area_chi_from_scratch(cx, cy, cr, n, h, ox, oy):
    if n == 0:
        return 0.0, 0.0
    a0 = int(np.floor((cx[0] - cr[0] - ox) / h)) - 1
    a1 = int(np.ceil((cx[0] + cr[0] - ox) / h)) + 1
    b0 = int(np.floor((cy[0] - cr[0] - oy) / h)) - 1
    b1 = int(np.ceil((cy[0] + cr[0] - oy) / h)) + 1
    for k in range(1, n):
        a0 = min(a0, int(np.floor((cx[k] - cr[k] - ox) / h)) - 1)
        a1 = max(a1, int(np.ceil((cx[k] + cr[k] - ox) / h)) + 1)
        b0 = min(b0, int(np.floor((cy[k] - cr[k] - oy) / h)) - 1)
        b1 = max(b1, int(np.ceil((cy[k] + cr[k] - oy) / h)) + 1)
    bw = a1 - a0 + 1
    bh = b1 - b0 + 1
    mask = np.zeros((bw, bh), np.bool_)
    count = 0
    for a in range(a0, a1 + 1):
        pxc = ox + (a + 0.5) * h
        for b in range(b0, b1 + 1):
            pyc = oy + (b + 0.5) * h
            for k in range(n):
                dx = pxc - cx[k]
                dy = pyc - cy[k]
                if dx * dx + dy * dy <= cr[k] * cr[k]:
                    mask[a - a0, b - b0] = True
                    count += 1
                    break
    return count * h * h, float(_chi_closed_squares(mask))


@njit(cache=True)
def _run_chain(
    cx, cy, cr, n0, steps,
    t1, t2, t3, lam,
    ox, oy, wx, wy,
    rmin, rmax, h, seed,
    a_init, l_init, chi_init,
    trace, trace_every,
):
    """Birth (0.4) / death (0.4) / move (0.2) Metropolis-Hastings sweep.

    Returns (n, area, perimeter, chi, accepted, guarded) after ``steps``
    proposals; non-finite acceptance exponents reject and count as
    guarded.  Moves relocate a disc uniformly in the extended window
    (symmetric proposal).
    """
    np.random.seed(seed)
    n = n0
    area = a_init
    per = l_init
    chi = chi_init
    area_ext = wx * wy
    log_lam_area = np.log(lam * area_ext)
    accepted = 0
    guarded = 0
    ti = 0
    for step in range(steps):
        if trace_every > 0 and step % trace_every == 0 and ti < trace.shape[0]:
            trace[ti, 0] = n
            trace[ti, 1] = area
            trace[ti, 2] = per
            trace[ti, 3] = chi
            ti += 1
        u = np.random.random()
        if u < 0.4:
            if n >= cx.shape[0]:
                guarded += 1
                continue
            x = ox + np.random.random() * wx
            y = oy + np.random.random() * wy
            r = rmin + np.random.random() * (rmax - rmin)
            da, dl, dchi = _delta_insert(cx, cy, cr, n, -1, x, y, r, h, ox, oy)
            loga = t1 * da + t2 * dl + t3 * dchi + log_lam_area - np.log(n + 1.0)
            if not np.isfinite(loga):
                guarded += 1
            elif np.log(np.random.random()) < loga:
                cx[n] = x
                cy[n] = y
                cr[n] = r
                n += 1
                area += da
                per += dl
                chi += dchi
                accepted += 1
        elif u < 0.8:
            if n == 0:
                continue
            idx = min(int(np.random.random() * n), n - 1)
            da, dl, dchi = _delta_insert(
                cx, cy, cr, n, idx, cx[idx], cy[idx], cr[idx], h, ox, oy
            )
            loga = -(t1 * da + t2 * dl + t3 * dchi) + np.log(float(n)) - log_lam_area
            if not np.isfinite(loga):
                guarded += 1
            elif np.log(np.random.random()) < loga:
                cx[idx] = cx[n - 1]
                cy[idx] = cy[n - 1]
                cr[idx] = cr[n - 1]
                n -= 1
                area -= da
                per -= dl
                chi -= dchi
                accepted += 1
        else:
            if n == 0:
                continue
            idx = min(int(np.random.random() * n), n - 1)
            xo, yo, ro = cx[idx], cy[idx], cr[idx]
            dao, dlo, dco = _delta_insert(cx, cy, cr, n, idx, xo, yo, ro, h, ox, oy)
            xn = ox + np.random.random() * wx
            yn = oy + np.random.random() * wy
            dan, dln, dcn = _delta_insert(cx, cy, cr, n, idx, xn, yn, ro, h, ox, oy)
            loga = t1 * (dan - dao) + t2 * (dln - dlo) + t3 * (dcn - dco)
            if not np.isfinite(loga):
                guarded += 1
            elif np.log(np.random.random()) < loga:
                cx[idx] = xn
                cy[idx] = yn
                area += dan - dao
                per += dln - dlo
                chi += dcn - dco
                accepted += 1
    return n, area, per, chi, accepted, guarded
