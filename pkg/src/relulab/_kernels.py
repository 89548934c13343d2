"""Hot numeric kernels for the simplex engines.

Each kernel has a pure-numpy implementation and, when numba is available,
an @njit-compiled twin. Selection happens once at import time:
``RELULAB_BACKEND=numpy`` forces the fallback path, anything else prefers
numba. ``ACTIVE_BACKEND`` reports which path won.

Kernel contracts (shared by both backends):

``price_dantzig(d, stat, gap, dtol)``
    Most-improving eligible nonbasic column for a maximization step.
    Returns (col, direction) with direction +1 (increase from lower
    bound / free) or -1 (decrease from upper bound), col -1 if none.

``price_bland(d, stat, gap, dtol)``
    Lowest-index eligible column, same return contract.

``ratio_scan(w, dirn, xB, basis_lb, basis_ub, gap_j, ptol)``
    Maximum step along the entering direction. Returns (kind, row, step)
    with kind 0 = basis change at ``row``, 1 = bound flip of the entering
    column, 2 = unbounded ray. Ties prefer the flip, then the largest
    pivot magnitude, then the lowest row.

``pivot_update(G, zrow, r, jq)``
    In-place Gauss pivot of the dense tableau on (r, jq), including the
    reduced-cost row.

``eta_ftran(v, eta_w, eta_r, eta_wr, k)`` / ``eta_btran(v, ...)``
    Apply k product-form eta transforms (forward / transposed) in place.
"""

from __future__ import annotations

import os

import numpy as np

NB_LB = 0   # nonbasic at lower bound
NB_UB = 1   # nonbasic at upper bound
NB_FREE = 2  # nonbasic free, parked at zero
BASIC = 3

_WANT_NUMBA = os.environ.get("RELULAB_BACKEND", "numba").lower() != "numpy"


def _np_price_dantzig(d, stat, gap, dtol):
    best = -1
    best_score = dtol
    dirn = 0
    for j in range(d.shape[0]):
        s = stat[j]
        if s == BASIC or gap[j] <= 0.0:
            continue
        v = d[j]
        if (s == NB_LB or s == NB_FREE) and v > best_score:
            best, best_score, dirn = j, v, 1
        elif (s == NB_UB or s == NB_FREE) and -v > best_score:
            best, best_score, dirn = j, -v, -1
    return best, dirn


def _np_price_bland(d, stat, gap, dtol):
    for j in range(d.shape[0]):
        s = stat[j]
        if s == BASIC or gap[j] <= 0.0:
            continue
        v = d[j]
        if (s == NB_LB or s == NB_FREE) and v > dtol:
            return j, 1
        if (s == NB_UB or s == NB_FREE) and -v > dtol:
            return j, -1
    return -1, 0


def _np_ratio_scan(w, dirn, xB, basis_lb, basis_ub, gap_j, ptol):
    tie = 1e-9
    best = gap_j  # flip step; may be inf
    kind = 1 if np.isfinite(gap_j) else 2
    row = -1
    best_piv = 0.0
    for r in range(w.shape[0]):
        g = dirn * w[r]
        if g > ptol:
            lo = basis_lb[r]
            if lo == -np.inf:
                continue
            lim = (xB[r] - lo) / g
        elif g < -ptol:
            hi = basis_ub[r]
            if hi == np.inf:
                continue
            lim = (xB[r] - hi) / g
        else:
            continue
        if lim < 0.0:
            lim = 0.0
        if lim < best - tie:
            best, kind, row, best_piv = lim, 0, r, abs(g)
        elif kind == 0 and lim < best + tie and abs(g) > best_piv:
            row, best_piv = r, abs(g)
            if lim < best:
                best = lim
    return kind, row, best


def _np_pivot_update(G, zrow, r, jq):
    piv = G[r, jq]
    G[r, :] /= piv
    col = G[:, jq].copy()
    col[r] = 0.0
    G -= np.outer(col, G[r, :])
    zj = zrow[jq]
    if zj != 0.0:
        zrow -= zj * G[r, :]


def _np_eta_ftran(v, eta_w, eta_r, eta_wr, k):
    for i in range(k):
        r = eta_r[i]
        t = v[r] / eta_wr[i]
        if t != 0.0:
            v -= t * eta_w[i]
        v[r] = t


def _np_eta_btran(v, eta_w, eta_r, eta_wr, k):
    for i in range(k - 1, -1, -1):
        r = eta_r[i]
        t = (np.dot(eta_w[i], v) - v[r]) / eta_wr[i]
        v[r] -= t


price_dantzig = _np_price_dantzig
price_bland = _np_price_bland
ratio_scan = _np_ratio_scan
pivot_update = _np_pivot_update
eta_ftran = _np_eta_ftran
eta_btran = _np_eta_btran
ACTIVE_BACKEND = "numpy"

if _WANT_NUMBA:
    try:
        from numba import njit

        @njit(cache=True)
        def _nb_price_dantzig(d, stat, gap, dtol):
            best = -1
            best_score = dtol
            dirn = 0
            for j in range(d.shape[0]):
                s = stat[j]
                if s == BASIC or gap[j] <= 0.0:
                    continue
                v = d[j]
                if (s == NB_LB or s == NB_FREE) and v > best_score:
                    best, best_score, dirn = j, v, 1
                elif (s == NB_UB or s == NB_FREE) and -v > best_score:
                    best, best_score, dirn = j, -v, -1
            return best, dirn

        @njit(cache=True)
        def _nb_price_bland(d, stat, gap, dtol):
            for j in range(d.shape[0]):
                s = stat[j]
                if s == BASIC or gap[j] <= 0.0:
                    continue
                v = d[j]
                if (s == NB_LB or s == NB_FREE) and v > dtol:
                    return j, 1
                if (s == NB_UB or s == NB_FREE) and -v > dtol:
                    return j, -1
            return -1, 0

        @njit(cache=True)
        def _nb_ratio_scan(w, dirn, xB, basis_lb, basis_ub, gap_j, ptol):
            tie = 1e-9
            best = gap_j
            kind = 1 if np.isfinite(gap_j) else 2
            row = -1
            best_piv = 0.0
            for r in range(w.shape[0]):
                g = dirn * w[r]
                if g > ptol:
                    lo = basis_lb[r]
                    if lo == -np.inf:
                        continue
                    lim = (xB[r] - lo) / g
                elif g < -ptol:
                    hi = basis_ub[r]
                    if hi == np.inf:
                        continue
                    lim = (xB[r] - hi) / g
                else:
                    continue
                if lim < 0.0:
                    lim = 0.0
                if lim < best - tie:
                    best, kind, row, best_piv = lim, 0, r, abs(g)
                elif kind == 0 and lim < best + tie and abs(g) > best_piv:
                    row, best_piv = r, abs(g)
                    if lim < best:
                        best = lim
            return kind, row, best

        @njit(cache=True)
        def _nb_pivot_update(G, zrow, r, jq):
            m, n = G.shape
            piv = G[r, jq]
            for jj in range(n):
                G[r, jj] /= piv
            for i in range(m):
                if i == r:
                    continue
                f = G[i, jq]
                if f != 0.0:
                    for jj in range(n):
                        G[i, jj] -= f * G[r, jj]
            zj = zrow[jq]
            if zj != 0.0:
                for jj in range(n):
                    zrow[jj] -= zj * G[r, jj]

        @njit(cache=True)
        def _nb_eta_ftran(v, eta_w, eta_r, eta_wr, k):
            for i in range(k):
                r = eta_r[i]
                t = v[r] / eta_wr[i]
                if t != 0.0:
                    for q in range(v.shape[0]):
                        v[q] -= t * eta_w[i, q]
                v[r] = t

        @njit(cache=True)
        def _nb_eta_btran(v, eta_w, eta_r, eta_wr, k):
            for i in range(k - 1, -1, -1):
                r = eta_r[i]
                acc = 0.0
                for q in range(v.shape[0]):
                    acc += eta_w[i, q] * v[q]
                t = (acc - v[r]) / eta_wr[i]
                v[r] -= t

        price_dantzig = _nb_price_dantzig
        price_bland = _nb_price_bland
        ratio_scan = _nb_ratio_scan
        pivot_update = _nb_pivot_update
        eta_ftran = _nb_eta_ftran
        eta_btran = _nb_eta_btran
        ACTIVE_BACKEND = "numba"
    except ImportError:
        pass
