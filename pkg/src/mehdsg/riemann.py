"""Exact Riemann solver for the 1D ideal-gas Euler equations.

Star-region pressure by Newton iteration on the pressure function, then
sampling of the self-similar solution (Toro's construction).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .euler import AIR, GasModel


class RiemannError(RuntimeError):
    pass


@dataclass(frozen=True)
class StarState:
    p: float
    u: float
    residual: float
    iterations: int


def _pressure_function(p, rho, pk, ck, g):
    """f_K(p) and its derivative for one side."""
    if p > pk:
        A = 2.0 / ((g + 1.0) * rho)
        B = (g - 1.0) / (g + 1.0) * pk
        sq = np.sqrt(A / (p + B))
        f = (p - pk) * sq
        df = sq * (1.0 - 0.5 * (p - pk) / (B + p))
    else:
        f = 2.0 * ck / (g - 1.0) * ((p / pk) ** ((g - 1.0) / (2.0 * g)) - 1.0)
        df = 1.0 / (rho * ck) * (p / pk) ** (-(g + 1.0) / (2.0 * g))
    return f, df


def star_state(left, right, gas: GasModel = AIR, max_iter: int = 100) -> StarState:
    """Star pressure and velocity for primitive states ``(rho, v, p)``."""
    rL, uL, pL = map(float, left)
    rR, uR, pR = map(float, right)
    g = gas.gamma
    if min(rL, rR, pL, pR) <= 0.0:
        raise RiemannError("Riemann data must have positive density and pressure")
    cL, cR = np.sqrt(g * pL / rL), np.sqrt(g * pR / rR)
    if 2.0 * (cL + cR) / (g - 1.0) <= uR - uL:
        raise RiemannError("initial data generate vacuum")
    # two-rarefaction guess
    z = (g - 1.0) / (2.0 * g)
    p = ((cL + cR - 0.5 * (g - 1.0) * (uR - uL)) / (cL / pL**z + cR / pR**z)) ** (1.0 / z)
    p = max(p, 1e-14)
    du = uR - uL
    for it in range(1, max_iter + 1):
        fL, dfL = _pressure_function(p, rL, pL, cL, g)
        fR, dfR = _pressure_function(p, rR, pR, cR, g)
        res = fL + fR + du
        pnew = p - res / (dfL + dfR)
        if pnew <= 0.0:
            pnew = 0.5 * p
        change = abs(pnew - p) / (0.5 * (pnew + p))
        p = pnew
        if change < 1e-14:
            break
    else:
        raise RiemannError("Newton iteration for the star pressure did not converge")
    fL, _ = _pressure_function(p, rL, pL, cL, g)
    fR, _ = _pressure_function(p, rR, pR, cR, g)
    u = 0.5 * (uL + uR) + 0.5 * (fR - fL)
    return StarState(float(p), float(u), float(abs(fL + fR + du)), it)


def exact_riemann_solve(left, right, gas: GasModel = AIR, xi_over_t=0.0, star: StarState | None = None):
    """Sample the exact solution at similarity coordinates ``x/t``.

    Returns primitive arrays (rho, v, p) with the shape of ``xi_over_t``.
    """
    rL, uL, pL = map(float, left)
    rR, uR, pR = map(float, right)
    g = gas.gamma
    s = np.asarray(xi_over_t, dtype=float)
    if (rL, uL, pL) == (rR, uR, pR):
        return np.full(s.shape, rL), np.full(s.shape, uL), np.full(s.shape, pL)
    st = star if star is not None else star_state(left, right, gas)
    ps, us = st.p, st.u
    cL, cR = np.sqrt(g * pL / rL), np.sqrt(g * pR / rR)
    gm = (g - 1.0) / (g + 1.0)
    rho = np.empty_like(s)
    u = np.empty_like(s)
    p = np.empty_like(s)

    left_of_contact = s <= us
    # left wave
    if ps > pL:
        rsL = rL * (ps / pL + gm) / (gm * ps / pL + 1.0)
        SL = uL - cL * np.sqrt((g + 1.0) / (2.0 * g) * ps / pL + (g - 1.0) / (2.0 * g))
        m = left_of_contact & (s < SL)
        rho[m], u[m], p[m] = rL, uL, pL
        m = left_of_contact & (s >= SL)
        rho[m], u[m], p[m] = rsL, us, ps
    else:
        rsL = rL * (ps / pL) ** (1.0 / g)
        csL = cL * (ps / pL) ** ((g - 1.0) / (2.0 * g))
        SHL, STL = uL - cL, us - csL
        m = left_of_contact & (s < SHL)
        rho[m], u[m], p[m] = rL, uL, pL
        m = left_of_contact & (s > STL)
        rho[m], u[m], p[m] = rsL, us, ps
        m = left_of_contact & (s >= SHL) & (s <= STL)
        fan = 2.0 / (g + 1.0) + gm / cL * (uL - s[m])
        rho[m] = rL * fan ** (2.0 / (g - 1.0))
        u[m] = 2.0 / (g + 1.0) * (cL + 0.5 * (g - 1.0) * uL + s[m])
        p[m] = pL * fan ** (2.0 * g / (g - 1.0))
    right_of_contact = ~left_of_contact
    if ps > pR:
        rsR = rR * (ps / pR + gm) / (gm * ps / pR + 1.0)
        SR = uR + cR * np.sqrt((g + 1.0) / (2.0 * g) * ps / pR + (g - 1.0) / (2.0 * g))
        m = right_of_contact & (s > SR)
        rho[m], u[m], p[m] = rR, uR, pR
        m = right_of_contact & (s <= SR)
        rho[m], u[m], p[m] = rsR, us, ps
    else:
        rsR = rR * (ps / pR) ** (1.0 / g)
        csR = cR * (ps / pR) ** ((g - 1.0) / (2.0 * g))
        SHR, STR = uR + cR, us + csR
        m = right_of_contact & (s > SHR)
        rho[m], u[m], p[m] = rR, uR, pR
        m = right_of_contact & (s < STR)
        rho[m], u[m], p[m] = rsR, us, ps
        m = right_of_contact & (s >= STR) & (s <= SHR)
        fan = 2.0 / (g + 1.0) - gm / cR * (uR - s[m])
        rho[m] = rR * fan ** (2.0 / (g - 1.0))
        u[m] = 2.0 / (g + 1.0) * (-cR + 0.5 * (g - 1.0) * uR + s[m])
        p[m] = pR * fan ** (2.0 * g / (g - 1.0))
    return rho, u, p
