"""Ideal-gas Euler physics on conserved states ``(rho, m1, m2, E)``.

Every function accepts arrays whose last axis has length 4 and broadcasts
over the leading axes. These are the reference implementations; the RHS
hot path uses the fused kernels in :mod:`mehdsg.kernels`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class InadmissibleStateError(ValueError):
    """Raised when a state outside the admissible set reaches physics code."""

    def __init__(self, message, where=None, state=None):
        super().__init__(message)
        self.where = where
        self.state = None if state is None else np.asarray(state)


class Direction(enum.IntEnum):
    X = 0
    Y = 1


@dataclass(frozen=True)
class GasModel:
    gamma: float = 1.4

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"adiabatic constant must exceed 1, got {self.gamma}")


AIR = GasModel(1.4)


def _as_state(u):
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != 4:
        raise ValueError("conserved states have four components")
    return u


def pressure(u, gas: GasModel = AIR):
    u = _as_state(u)
    rho = u[..., 0]
    if np.any(rho == 0.0):
        raise ZeroDivisionError("zero density reached pressure evaluation")
    return (gas.gamma - 1.0) * (u[..., 3] - 0.5 * (u[..., 1] ** 2 + u[..., 2] ** 2) / rho)


def is_admissible(u, gas: GasModel = AIR):
    """True where rho > 0 and p > 0 (strict). NaN entries give False."""
    u = _as_state(u)
    rho = u[..., 0]
    e = rho * u[..., 3] - 0.5 * (u[..., 1] ** 2 + u[..., 2] ** 2)
    # rho*p/(gamma-1) avoids dividing by a possibly vanishing density
    return (rho > 0.0) & (e > 0.0)


def _require_admissible(u, gas, what):
    ok = is_admissible(u, gas)
    if not np.all(ok):
        okf = np.ravel(ok)
        i = int(np.argmin(okf))
        where = np.unravel_index(i, np.shape(ok)) if np.ndim(ok) else ()
        state = u.reshape(-1, 4)[i]
        raise InadmissibleStateError(f"{what}: inadmissible state {state} at index {where}", where, state)


def flux(u, gas: GasModel = AIR, direction: Direction = Direction.X):
    u = _as_state(u)
    if np.any(~(u[..., 0] > 0.0)):
        raise InadmissibleStateError("flux evaluated at nonpositive density")
    d = int(direction)
    rho = u[..., 0]
    p = pressure(u, gas)
    vn = u[..., 1 + d] / rho
    f = np.empty_like(u)
    f[..., 0] = u[..., 1 + d]
    f[..., 1] = u[..., 1] * vn
    f[..., 2] = u[..., 2] * vn
    f[..., 1 + d] += p
    f[..., 3] = (u[..., 3] + p) * vn
    return f


def sound_speed(u, gas: GasModel = AIR):
    u = _as_state(u)
    return np.sqrt(gas.gamma * pressure(u, gas) / u[..., 0])


def wave_speeds(u, gas: GasModel = AIR, direction: Direction = Direction.X):
    """Smallest and largest eigenvalue ``(v - c, v + c)`` in ``direction``."""
    u = _as_state(u)
    _require_admissible(u, gas, "wave_speeds")
    v = u[..., 1 + int(direction)] / u[..., 0]
    c = sound_speed(u, gas)
    return v - c, v + c


def max_abs_speed(u, gas: GasModel = AIR, direction: Direction = Direction.X):
    lo, hi = wave_speeds(u, gas, direction)
    return np.maximum(np.abs(lo), np.abs(hi))


def lax_friedrichs_flux(uL, uR, lambda_max, gas: GasModel = AIR, direction: Direction = Direction.X):
    uL, uR = _as_state(uL), _as_state(uR)
    _require_admissible(uL, gas, "LF flux (left)")
    _require_admissible(uR, gas, "LF flux (right)")
    lam = np.asarray(lambda_max, dtype=float)[..., None]
    return 0.5 * (flux(uL, gas, direction) + flux(uR, gas, direction) - lam * (uR - uL))


def roe_average(uL, uR, gas: GasModel = AIR):
    """Roe-averaged velocity (..., 2) and total enthalpy (...)."""
    uL, uR = _as_state(uL), _as_state(uR)
    if np.any(~(uL[..., 0] > 0.0)) or np.any(~(uR[..., 0] > 0.0)):
        raise InadmissibleStateError("Roe average needs positive densities")
    sL, sR = np.sqrt(uL[..., 0]), np.sqrt(uR[..., 0])
    HL = (uL[..., 3] + pressure(uL, gas)) / uL[..., 0]
    HR = (uR[..., 3] + pressure(uR, gas)) / uR[..., 0]
    vL = uL[..., 1:3] / uL[..., 0:1]
    vR = uR[..., 1:3] / uR[..., 0:1]
    w = (sL + sR)[..., None]
    v = (sL[..., None] * vL + sR[..., None] * vR) / w
    H = (sL * HL + sR * HR) / (sL + sR)
    return v, H


def hlle_signal_speeds(uL, uR, gas: GasModel = AIR, direction: Direction = Direction.X):
    d = int(direction)
    v, H = roe_average(uL, uR, gas)
    vn = v[..., d]
    c2 = (gas.gamma - 1.0) * (H - 0.5 * np.sum(v**2, axis=-1))
    c = np.sqrt(np.maximum(c2, 0.0))
    lminL, _ = wave_speeds(uL, gas, direction)
    _, lmaxR = wave_speeds(uR, gas, direction)
    bm = np.minimum(np.minimum(vn - c, lminL), 0.0)
    bp = np.maximum(np.maximum(vn + c, lmaxR), 0.0)
    return bm, bp


def hlle_flux(uL, uR, gas: GasModel = AIR, direction: Direction = Direction.X):
    uL, uR = _as_state(uL), _as_state(uR)
    _require_admissible(uL, gas, "HLLE flux (left)")
    _require_admissible(uR, gas, "HLLE flux (right)")
    bm, bp = hlle_signal_speeds(uL, uR, gas, direction)
    fL, fR = flux(uL, gas, direction), flux(uR, gas, direction)
    bm, bp = bm[..., None], bp[..., None]
    return (bp * fL - bm * fR + bp * bm * (uR - uL)) / (bp - bm)


def limiter_theta(mean, point, gas: GasModel = AIR):
    """Smallest theta in [0,1] with theta*mean + (1-theta)*point on the closure of
    the admissible set, such that every larger theta gives an admissible state.

    Vectorized over leading axes. The mean must be admissible.
    """
    mean, point = np.broadcast_arrays(_as_state(mean), _as_state(point))
    if not np.all(is_admissible(mean, gas)):
        raise InadmissibleStateError("limiter_theta: mean state is inadmissible")
    rho, m, E = point[..., 0], point[..., 1:3], point[..., 3]
    drho = rho - mean[..., 0]
    dm = m - mean[..., 1:3]
    dE = E - mean[..., 3]
    with np.errstate(divide="ignore", invalid="ignore"):
        th1 = np.where(drho != 0.0, rho / np.where(drho != 0.0, drho, 1.0), 0.0)
        # rho(t) p(t) / (gamma-1) along u(t) = point - t (point - mean)
        a = dE * drho - 0.5 * np.sum(dm * dm, axis=-1)
        b = np.sum(m * dm, axis=-1) - E * drho - rho * dE
        c = E * rho - 0.5 * np.sum(m * m, axis=-1)
        disc = b * b - 4.0 * a * c
        sq = np.sqrt(np.maximum(disc, 0.0))
        q = -0.5 * (b + np.where(b >= 0.0, sq, -sq))
        quad = a != 0.0
        r1 = np.where(quad & (disc >= 0.0), q / np.where(a != 0.0, a, 1.0), 0.0)
        r2 = np.where(quad & (disc >= 0.0) & (q != 0.0), c / np.where(q != 0.0, q, 1.0), 0.0)
        lin = (~quad) & (b != 0.0)
        r1 = np.where(lin, -c / np.where(b != 0.0, b, 1.0), r1)
        r2 = np.where(lin, 0.0, r2)
    theta = np.maximum(np.maximum(_cut(th1), _cut(r1)), _cut(r2))
    return np.where(is_admissible(point, gas), 0.0, theta)


def _cut(x):
    return np.where((x >= 0.0) & (x <= 1.0), x, 0.0)


def theta_bisection(mean, point, gas: GasModel = AIR, iters: int = 200, tol: float = 1e-15):
    """Scalar bisection oracle for :func:`limiter_theta`."""
    mean = _as_state(mean)
    point = _as_state(point)
    if is_admissible(point, gas):
        return 0.0
    lo, hi = 0.0, 1.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if is_admissible(mid * mean + (1.0 - mid) * point, gas):
            hi = mid
        else:
            lo = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def primitive_to_conserved(rho, vx, vy, p, gas: GasModel = AIR):
    rho, vx, vy, p = np.broadcast_arrays(*[np.asarray(a, dtype=float) for a in (rho, vx, vy, p)])
    E = p / (gas.gamma - 1.0) + 0.5 * rho * (vx**2 + vy**2)
    return np.stack([rho, rho * vx, rho * vy, E], axis=-1)


def conserved_to_primitive(u, gas: GasModel = AIR):
    u = _as_state(u)
    rho = u[..., 0]
    return rho, u[..., 1] / rho, u[..., 2] / rho, pressure(u, gas)
