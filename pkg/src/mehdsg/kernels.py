"""Fused pointwise Euler kernels for the RHS and limiter hot paths.

States are component-first arrays of shape (4, n). The plain numpy
functions in :mod:`mehdsg.euler` are the reference these are tested against.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def first_inadmissible(U):
    """Index of the first point with rho <= 0 or p <= 0 (or NaN), else -1."""
    n = U.shape[1]
    for i in range(n):
        r = U[0, i]
        e = r * U[3, i] - 0.5 * (U[1, i] * U[1, i] + U[2, i] * U[2, i])
        if not (r > 0.0 and e > 0.0):
            return i
    return -1


@njit(cache=True)
def admissible_mask(U):
    n = U.shape[1]
    out = np.empty(n, dtype=np.bool_)
    for i in range(n):
        r = U[0, i]
        e = r * U[3, i] - 0.5 * (U[1, i] * U[1, i] + U[2, i] * U[2, i])
        out[i] = r > 0.0 and e > 0.0
    return out


@njit(cache=True)
def max_speeds(U, gamma):
    """Max |v_x|+c and |v_y|+c over the points; returns (lx, ly, bad)."""
    n = U.shape[1]
    lx = 0.0
    ly = 0.0
    for i in range(n):
        r = U[0, i]
        vx = U[1, i] / r
        vy = U[2, i] / r
        p = (gamma - 1.0) * (U[3, i] - 0.5 * r * (vx * vx + vy * vy))
        if not (r > 0.0 and p > 0.0):
            return lx, ly, i
        c = np.sqrt(gamma * p / r)
        ax = abs(vx) + c
        ay = abs(vy) + c
        if ax > lx:
            lx = ax
        if ay > ly:
            ly = ay
    return lx, ly, -1


@njit(cache=True)
def flux_and_speeds(U, Fx, Fy, want_y, gamma):
    """Physical fluxes at every point plus the max wave speeds.

    Fills Fx (and Fy if want_y). Returns (lx, ly, bad) where bad is the
    first inadmissible point index or -1.
    """
    n = U.shape[1]
    lx = 0.0
    ly = 0.0
    for i in range(n):
        r = U[0, i]
        m1 = U[1, i]
        m2 = U[2, i]
        E = U[3, i]
        if not r > 0.0:
            return lx, ly, i
        vx = m1 / r
        vy = m2 / r
        p = (gamma - 1.0) * (E - 0.5 * (m1 * vx + m2 * vy))
        if not p > 0.0:
            return lx, ly, i
        c = np.sqrt(gamma * p / r)
        Fx[0, i] = m1
        Fx[1, i] = m1 * vx + p
        Fx[2, i] = m2 * vx
        Fx[3, i] = (E + p) * vx
        if want_y:
            Fy[0, i] = m2
            Fy[1, i] = m1 * vy
            Fy[2, i] = m2 * vy + p
            Fy[3, i] = (E + p) * vy
        ax = abs(vx) + c
        ay = abs(vy) + c
        if ax > lx:
            lx = ax
        if ay > ly:
            ly = ay
    return lx, ly, -1


@njit(cache=True)
def _phys(r, m1, m2, E, d, gamma, f):
    vx = m1 / r
    vy = m2 / r
    p = (gamma - 1.0) * (E - 0.5 * (m1 * vx + m2 * vy))
    vn = vx if d == 0 else vy
    f[0] = (m1 if d == 0 else m2)
    f[1] = m1 * vn
    f[2] = m2 * vn
    f[1 + d] += p
    f[3] = (E + p) * vn
    return p


@njit(cache=True)
def lf_faces(UL, UR, lam, d, gamma, out):
    """Lax-Friedrichs flux for paired traces (4, n); fills out (4, n)."""
    n = UL.shape[1]
    fl = np.empty(4)
    fr = np.empty(4)
    for i in range(n):
        _phys(UL[0, i], UL[1, i], UL[2, i], UL[3, i], d, gamma, fl)
        _phys(UR[0, i], UR[1, i], UR[2, i], UR[3, i], d, gamma, fr)
        for k in range(4):
            out[k, i] = 0.5 * (fl[k] + fr[k] - lam * (UR[k, i] - UL[k, i]))


@njit(cache=True)
def hlle_faces(UL, UR, d, gamma, out):
    """HLLE flux with Roe-averaged signal speeds clipped to include zero."""
    n = UL.shape[1]
    fl = np.empty(4)
    fr = np.empty(4)
    for i in range(n):
        rL = UL[0, i]
        rR = UR[0, i]
        pL = _phys(rL, UL[1, i], UL[2, i], UL[3, i], d, gamma, fl)
        pR = _phys(rR, UR[1, i], UR[2, i], UR[3, i], d, gamma, fr)
        sL = np.sqrt(rL)
        sR = np.sqrt(rR)
        vxL = UL[1, i] / rL
        vyL = UL[2, i] / rL
        vxR = UR[1, i] / rR
        vyR = UR[2, i] / rR
        vx = (sL * vxL + sR * vxR) / (sL + sR)
        vy = (sL * vyL + sR * vyR) / (sL + sR)
        H = (sL * (UL[3, i] + pL) / rL + sR * (UR[3, i] + pR) / rR) / (sL + sR)
        c2 = (gamma - 1.0) * (H - 0.5 * (vx * vx + vy * vy))
        c = np.sqrt(c2) if c2 > 0.0 else 0.0
        vn = vx if d == 0 else vy
        vnL = vxL if d == 0 else vyL
        vnR = vxR if d == 0 else vyR
        cL = np.sqrt(gamma * pL / rL)
        cR = np.sqrt(gamma * pR / rR)
        bm = min(vn - c, vnL - cL, 0.0)
        bp = max(vn + c, vnR + cR, 0.0)
        inv = 1.0 / (bp - bm)
        for k in range(4):
            out[k, i] = (bp * fl[k] - bm * fr[k] + bp * bm * (UR[k, i] - UL[k, i])) * inv
