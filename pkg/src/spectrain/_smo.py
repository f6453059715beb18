"""Maximal-violating-pair SMO sweep for the epsilon-SVR dual.

Solves, in beta = alpha - alpha* form:

    min_beta  0.5 beta' K beta - y' beta + eps * ||beta||_1
    s.t.      sum(beta) = 0,  |beta_i| <= C

The bias-multiplier interval [lo_i, hi_i] of every point is tracked; the
pair (argmax lo, argmin hi) is optimized exactly on its piecewise quadratic
until max lo - min hi <= tol.  The two implementations below are kept in
lockstep: ``smo_sweep_numba`` is the @njit build, ``smo_sweep_numpy`` the
vectorized fallback (selected via the SPECTRAIN_DISABLE_NUMBA env flag).
Both return (beta, bias, violation, iterations).
"""

import numpy as np

from ._accel import NUMBA_ENABLED, njit

_BIG = 1e300


@njit(cache=True)
def smo_sweep_numba(K, y, eps, C, tol, max_iter):
    n = y.shape[0]
    beta = np.zeros(n)
    o = np.zeros(n)  # K @ beta, maintained incrementally
    snap = 1e-12 * C
    it = 0
    violation = _BIG
    max_lo = -_BIG
    min_hi = _BIG
    while it < max_iter:
        max_lo = -_BIG
        min_hi = _BIG
        iu = -1
        jd = -1
        for k in range(n):
            phi = y[k] - o[k]
            b = beta[k]
            if b > snap:
                hi = phi - eps
                lo = -_BIG if b >= C - snap else hi
            elif b < -snap:
                lo = phi + eps
                hi = _BIG if b <= -C + snap else lo
            else:
                lo = phi - eps
                hi = phi + eps
            if lo > max_lo:
                max_lo = lo
                iu = k
            if hi < min_hi:
                min_hi = hi
                jd = k
        violation = max_lo - min_hi
        if violation <= tol or iu == jd:
            break

        i = iu
        j = jd
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if eta < 1e-14:
            eta = 1e-14
        gd = (o[i] - y[i]) - (o[j] - y[j])
        bi = beta[i]
        bj = beta[j]
        t_lo = max(-C - bi, bj - C)
        t_hi = min(C - bi, bj + C)
        if t_hi <= t_lo:
            it += 1
            continue

        # breakpoints of the two |.| terms, clipped into the box
        pts = np.empty(4)
        pts[0] = t_lo
        pts[1] = t_hi
        pts[2] = min(max(-bi, t_lo), t_hi)
        pts[3] = min(max(bj, t_lo), t_hi)
        pts.sort()

        best_t = 0.0
        best_w = 0.0
        for s in range(3):
            a = pts[s]
            bnd = pts[s + 1]
            if bnd <= a:
                continue
            m = 0.5 * (a + bnd)
            si = 1.0 if bi + m > 0 else -1.0
            sj = 1.0 if bj - m > 0 else -1.0
            t = -(gd + eps * (si - sj)) / eta
            if t < a:
                t = a
            elif t > bnd:
                t = bnd
            w = 0.5 * eta * t * t + gd * t + eps * (
                abs(bi + t) - abs(bi) + abs(bj - t) - abs(bj)
            )
            if w < best_w:
                best_w = w
                best_t = t

        t = best_t
        if t != 0.0:
            beta[i] = bi + t
            beta[j] = bj - t
            for k in range(n):
                o[k] += t * (K[k, i] - K[k, j])
            for two in range(2):
                idx = i if two == 0 else j
                if abs(beta[idx]) < snap:
                    beta[idx] = 0.0
                elif beta[idx] > C - snap:
                    beta[idx] = C
                elif beta[idx] < -C + snap:
                    beta[idx] = -C
        it += 1

    if max_lo <= -_BIG / 2 and min_hi >= _BIG / 2:
        b_out = 0.0
    elif max_lo <= -_BIG / 2:
        b_out = min_hi
    elif min_hi >= _BIG / 2:
        b_out = max_lo
    else:
        b_out = 0.5 * (max_lo + min_hi)
    return beta, b_out, violation, it


def smo_sweep_numpy(K, y, eps, C, tol, max_iter):
    n = y.shape[0]
    beta = np.zeros(n)
    o = np.zeros(n)
    snap = 1e-12 * C
    it = 0
    violation = _BIG
    max_lo = -_BIG
    min_hi = _BIG
    while it < max_iter:
        phi = y - o
        lo = np.where(beta < -snap, phi + eps, phi - eps)
        hi = np.where(beta > snap, phi - eps, phi + eps)
        lo[beta >= C - snap] = -_BIG
        hi[beta <= -C + snap] = _BIG
        iu = int(np.argmax(lo))
        jd = int(np.argmin(hi))
        max_lo = float(lo[iu])
        min_hi = float(hi[jd])
        violation = max_lo - min_hi
        if violation <= tol or iu == jd:
            break

        i, j = iu, jd
        eta = max(K[i, i] + K[j, j] - 2.0 * K[i, j], 1e-14)
        gd = (o[i] - y[i]) - (o[j] - y[j])
        bi, bj = beta[i], beta[j]
        t_lo = max(-C - bi, bj - C)
        t_hi = min(C - bi, bj + C)
        if t_hi <= t_lo:
            it += 1
            continue
        pts = np.sort(np.array([t_lo, t_hi,
                                min(max(-bi, t_lo), t_hi),
                                min(max(bj, t_lo), t_hi)]))
        best_t, best_w = 0.0, 0.0
        for a, bnd in zip(pts[:-1], pts[1:]):
            if bnd <= a:
                continue
            m = 0.5 * (a + bnd)
            si = 1.0 if bi + m > 0 else -1.0
            sj = 1.0 if bj - m > 0 else -1.0
            t = float(np.clip(-(gd + eps * (si - sj)) / eta, a, bnd))
            w = 0.5 * eta * t * t + gd * t + eps * (
                abs(bi + t) - abs(bi) + abs(bj - t) - abs(bj)
            )
            if w < best_w:
                best_w, best_t = w, t
        if best_t != 0.0:
            beta[i] = bi + best_t
            beta[j] = bj - best_t
            o += best_t * (K[:, i] - K[:, j])
            for idx in (i, j):
                if abs(beta[idx]) < snap:
                    beta[idx] = 0.0
                elif beta[idx] > C - snap:
                    beta[idx] = C
                elif beta[idx] < -C + snap:
                    beta[idx] = -C
        it += 1

    if max_lo <= -_BIG / 2 and min_hi >= _BIG / 2:
        b_out = 0.0
    elif max_lo <= -_BIG / 2:
        b_out = min_hi
    elif min_hi >= _BIG / 2:
        b_out = max_lo
    else:
        b_out = 0.5 * (max_lo + min_hi)
    return beta, float(b_out), float(violation), it


smo_sweep = smo_sweep_numba if NUMBA_ENABLED else smo_sweep_numpy
