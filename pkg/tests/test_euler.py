import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mehdsg import kernels
from mehdsg.checks import random_state_pairs
from mehdsg.euler import (
    AIR,
    Direction,
    GasModel,
    InadmissibleStateError,
    conserved_to_primitive,
    flux,
    hlle_flux,
    hlle_signal_speeds,
    is_admissible,
    lax_friedrichs_flux,
    limiter_theta,
    max_abs_speed,
    pressure,
    primitive_to_conserved,
    roe_average,
    theta_bisection,
    wave_speeds,
)
from mehdsg.riemann import RiemannError, exact_riemann_solve, star_state

SOD_L = np.array([1.0, 0.0, 0.0, 2.5])
SOD_R = np.array([0.125, 0.0, 0.0, 0.25])


def states(rho=(0.05, 5.0), v=(-4.0, 4.0), p=(0.01, 5.0)):
    return st.tuples(st.floats(*rho), st.floats(*v), st.floats(*v), st.floats(*p)).map(
        lambda t: primitive_to_conserved(t[0], t[1], t[2], t[3])
    )


# ---- gas, pressure, flux ---------------------------------------------------

def test_gas_model_rejects_gamma_le_one():
    with pytest.raises(ValueError):
        GasModel(1.0)
    with pytest.raises(ValueError):
        GasModel(0.5)


def test_direction_has_two_values():
    assert [int(d) for d in Direction] == [0, 1]


@pytest.mark.parametrize("u, p", [
    ((1.0, 0.0, 0.0, 2.5), 1.0),
    ((0.125, 0.0, 0.0, 0.25), 0.1),
    ((2.0, 2.0, 0.0, 3.0), 0.8),
])
def test_pressure_examples(u, p):
    assert pressure(u) == pytest.approx(p, abs=1e-15)


def test_pressure_zero_density_raises():
    with pytest.raises(ZeroDivisionError):
        pressure((0.0, 0.0, 0.0, 1.0))


def test_pressure_may_be_negative():
    assert pressure((1.0, 3.0, 0.0, 2.5)) < 0.0


def test_flux_examples():
    u = (1.0, 0.0, 0.0, 2.5)
    np.testing.assert_allclose(flux(u, AIR, Direction.X), [0, 1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(flux(u, AIR, Direction.Y), [0, 0, 1, 0], atol=1e-15)
    # p = 0.4 (2.5 - 0.5) = 0.8
    np.testing.assert_allclose(flux((1.0, 1.0, 0.0, 2.5)), [1.0, 1.8, 0.0, 3.3], atol=1e-15)


def test_flux_nonpositive_density_raises():
    with pytest.raises(InadmissibleStateError):
        flux((-1.0, 0.0, 0.0, 1.0))
    with pytest.raises(InadmissibleStateError):
        flux((0.0, 0.0, 0.0, 1.0))


def test_wave_speed_examples():
    lo, hi = wave_speeds((1.0, 0.0, 0.0, 2.5))
    assert (lo, hi) == pytest.approx((-math.sqrt(1.4), math.sqrt(1.4)), abs=1e-15)
    c = math.sqrt(1.4 * 0.8)
    assert wave_speeds((1.0, 1.0, 0.0, 2.5)) == pytest.approx((1 - c, 1 + c), abs=1e-15)
    lo, hi = wave_speeds((1.0, 1.0, 0.0, 2.5), AIR, Direction.Y)
    assert lo == pytest.approx(-hi, abs=1e-15)


def test_wave_speeds_inadmissible_raises():
    with pytest.raises(InadmissibleStateError):
        wave_speeds((1.0, 3.0, 0.0, 2.5))


@pytest.mark.parametrize("u, ok", [
    ((1.0, 0.0, 0.0, 2.5), True),
    ((-0.1, 0.0, 0.0, 2.5), False),
    ((1.0, 3.0, 0.0, 2.5), False),
    ((1.0, 0.0, 0.0, 0.0), False),
    ((np.nan, 0.0, 0.0, 2.5), False),
    ((1.0, 0.0, np.nan, 2.5), False),
])
def test_is_admissible_examples(u, ok):
    assert bool(is_admissible(u)) is ok


def test_primitive_roundtrip(rng):
    rho = rng.uniform(0.1, 3, 50)
    vx, vy = rng.uniform(-2, 2, (2, 50))
    p = rng.uniform(0.1, 3, 50)
    u = primitive_to_conserved(rho, vx, vy, p)
    back = conserved_to_primitive(u)
    np.testing.assert_allclose(np.stack(back, -1), np.stack([rho, vx, vy, p], -1), rtol=1e-13)


# ---- convexity and limiter root -------------------------------------------

def test_admissible_set_convex_on_random_pairs():
    rng = np.random.default_rng(7)
    a, _ = random_state_pairs(10_000, rng)
    b, _ = random_state_pairs(10_000, rng)
    t = rng.uniform(0, 1, (10_000, 1))
    assert np.all(is_admissible(t * a + (1 - t) * b))


def test_theta_zero_for_admissible_point():
    assert limiter_theta(SOD_L, SOD_R) == 0.0


def test_theta_density_only_constraint():
    # rho(theta) = theta - (1 - theta) vanishes at 1/2, pressure never binds
    th = limiter_theta((1.0, 0.0, 0.0, 2.5), (-1.0, 0.0, 0.0, 2.5))
    assert th == pytest.approx(0.5, abs=1e-15)


def test_theta_inadmissible_mean_raises():
    with pytest.raises(InadmissibleStateError):
        limiter_theta((1.0, 3.0, 0.0, 2.5), (1.0, 0.0, 0.0, 2.5))


def test_theta_matches_bisection_1000_pairs():
    rng = np.random.default_rng(11)
    mean, point = random_state_pairs(1000, rng)
    th = limiter_theta(mean, point)
    ref = np.array([theta_bisection(m, p) for m, p in zip(mean, point)])
    assert np.max(np.abs(th - ref)) < 1e-10


@given(states(), st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.floats(0.1, 4.0))
def test_theta_properties(mean, dirn, scale):
    point = mean + scale * np.abs(mean).max() * np.array(dirn)
    th = float(limiter_theta(mean, point))
    assert 0.0 <= th <= 1.0
    assert abs(th - theta_bisection(mean, point)) < 1e-10
    if is_admissible(point):
        assert th == 0.0
    else:
        for d in (1e-9, 1e-6, 1e-3):
            t = min(th + d, 1.0)
            assert is_admissible(t * mean + (1 - t) * point)


# ---- numerical fluxes ------------------------------------------------------

@given(states())
def test_fluxes_consistent(u):
    f = flux(u)
    lam = max_abs_speed(u)
    scale = max(1.0, float(np.abs(f).max()))
    assert np.max(np.abs(lax_friedrichs_flux(u, u, lam) - f)) < 1e-13 * scale
    assert np.max(np.abs(hlle_flux(u, u) - f)) < 1e-13 * scale
    fy = flux(u, AIR, Direction.Y)
    assert np.max(np.abs(hlle_flux(u, u, AIR, Direction.Y) - fy)) < 1e-13 * max(1.0, float(np.abs(fy).max()))


def test_lf_sod_matches_scripted_formula():
    g = 1.4
    # independent evaluation of 1/2 (f(uL) + f(uR) - lambda (uR - uL)) from primitives
    def f_prim(rho, u, p):
        E = p / (g - 1) + 0.5 * rho * u * u
        return [rho * u, rho * u * u + p, 0.0, (E + p) * u]
    fl, fr = f_prim(1.0, 0.0, 1.0), f_prim(0.125, 0.0, 0.1)
    ref = [0.5 * (a + b - 10.0 * (r - l)) for a, b, l, r in zip(fl, fr, SOD_L, SOD_R)]
    np.testing.assert_allclose(lax_friedrichs_flux(SOD_L, SOD_R, 10.0), ref, atol=1e-15)
    np.testing.assert_allclose(ref, [4.375, 0.55, 0.0, 11.25], atol=1e-14)


def test_hlle_sod_matches_scripted_oracle():
    g = 1.4
    rl, ul, pl, rr, ur, pr = 1.0, 0.0, 1.0, 0.125, 0.0, 0.1
    El = pl / (g - 1) + 0.5 * rl * ul**2
    Er = pr / (g - 1) + 0.5 * rr * ur**2
    Hl, Hr = (El + pl) / rl, (Er + pr) / rr
    w = math.sqrt(rl) + math.sqrt(rr)
    u_roe = (math.sqrt(rl) * ul + math.sqrt(rr) * ur) / w
    H_roe = (math.sqrt(rl) * Hl + math.sqrt(rr) * Hr) / w
    c_roe = math.sqrt((g - 1) * (H_roe - 0.5 * u_roe**2))
    bm = min(u_roe - c_roe, ul - math.sqrt(g * pl / rl), 0.0)
    bp = max(u_roe + c_roe, ur + math.sqrt(g * pr / rr), 0.0)
    fl = [0.0, pl, 0.0, 0.0]
    fr = [0.0, pr, 0.0, 0.0]
    ref = [(bp * a - bm * b + bp * bm * (r - l)) / (bp - bm) for a, b, l, r in zip(fl, fr, SOD_L, SOD_R)]
    np.testing.assert_allclose(hlle_flux(SOD_L, SOD_R), ref, atol=1e-14)
    v, H = roe_average(SOD_L, SOD_R)
    assert v[0] == pytest.approx(u_roe, abs=1e-15)
    assert H == pytest.approx(H_roe, rel=1e-15)
    assert hlle_signal_speeds(SOD_L, SOD_R) == pytest.approx((bm, bp), rel=1e-14)


def test_hlle_supersonic_upwind():
    u = primitive_to_conserved(1.0, 5.0, 0.0, 1.0)
    u2 = primitive_to_conserved(1.1, 5.2, 0.0, 1.05)
    np.testing.assert_allclose(hlle_flux(u, u2), flux(u), rtol=1e-14)
    np.testing.assert_allclose(hlle_flux(u * [1, -1, 1, 1], u2 * [1, -1, 1, 1]), flux(u2 * [1, -1, 1, 1]), rtol=1e-14)


def test_roe_average_examples():
    u = primitive_to_conserved(1.3, 0.4, -0.2, 0.9)
    v, H = roe_average(u, u)
    np.testing.assert_allclose(v, [0.4, -0.2], rtol=1e-15)
    assert H == pytest.approx((u[3] + pressure(u)) / u[0], rel=1e-15)
    v, _ = roe_average(primitive_to_conserved(1.0, 0.0, 0.0, 1.0), primitive_to_conserved(4.0, 3.0, 0.0, 1.0))
    assert v[0] == pytest.approx(2.0, abs=1e-15)
    with pytest.raises(InadmissibleStateError):
        roe_average((0.0, 0, 0, 1), u)


def test_fluxes_reject_inadmissible():
    bad = np.array([1.0, 3.0, 0.0, 2.5])
    with pytest.raises(InadmissibleStateError):
        lax_friedrichs_flux(bad, SOD_R, 10.0)
    with pytest.raises(InadmissibleStateError):
        hlle_flux(SOD_L, bad)


def test_first_order_fv_update_positivity():
    """Forward-Euler finite-volume step with LF (C=1) and HLLE (C=0.5) keeps means admissible."""
    rng = np.random.default_rng(5)
    n = 10_000
    U = [random_state_pairs(n, rng)[0] for _ in range(3)]
    ul, uc, ur = U
    for d in (Direction.X, Direction.Y):
        lam = np.max([max_abs_speed(u, AIR, d) for u in U], axis=0)
        nu = 1.0 / lam
        F = lax_friedrichs_flux(uc, ur, lam, AIR, d) - lax_friedrichs_flux(ul, uc, lam, AIR, d)
        assert np.all(is_admissible(uc - nu[:, None] * F))
        nu = 0.5 / lam
        F = hlle_flux(uc, ur, AIR, d) - hlle_flux(ul, uc, AIR, d)
        assert np.all(is_admissible(uc - nu[:, None] * F))


# ---- compiled kernels against the numpy reference --------------------------

def test_kernels_match_numpy(rng):
    uL, _ = random_state_pairs(300, rng)
    uR, _ = random_state_pairs(300, rng)
    for d in (0, 1):
        lam = float(max(max_abs_speed(uL, AIR, d).max(), max_abs_speed(uR, AIR, d).max()))
        out = np.empty((4, 300))
        kernels.lf_faces(np.ascontiguousarray(uL.T), np.ascontiguousarray(uR.T), lam, d, 1.4, out)
        np.testing.assert_allclose(out.T, lax_friedrichs_flux(uL, uR, lam, AIR, d), rtol=1e-13, atol=1e-13)
        kernels.hlle_faces(np.ascontiguousarray(uL.T), np.ascontiguousarray(uR.T), d, 1.4, out)
        np.testing.assert_allclose(out.T, hlle_flux(uL, uR, AIR, d), rtol=1e-12, atol=1e-12)
    lx, ly, bad = kernels.max_speeds(np.ascontiguousarray(uL.T), 1.4)
    assert bad == -1
    assert lx == pytest.approx(max_abs_speed(uL, AIR, 0).max(), rel=1e-14)
    assert ly == pytest.approx(max_abs_speed(uL, AIR, 1).max(), rel=1e-14)


def test_kernel_admissibility_matches_numpy(rng):
    _, pts = random_state_pairs(500, rng)
    mask = kernels.admissible_mask(np.ascontiguousarray(pts.T))
    np.testing.assert_array_equal(mask, is_admissible(pts))
    first = kernels.first_inadmissible(np.ascontiguousarray(pts.T))
    assert first == int(np.argmin(is_admissible(pts)))


# ---- exact Riemann solver ---------------------------------------------------

SOD_PRIM = ((1.0, 0.0, 1.0), (0.125, 0.0, 0.1))


def test_star_pressure_sod():
    s = star_state(*SOD_PRIM)
    assert s.p == pytest.approx(0.3031301780506468, abs=1e-14)
    assert s.u == pytest.approx(0.92745, abs=1e-5)
    assert s.residual < 1e-12


def test_riemann_equal_states():
    st_ = (0.7, 0.3, 1.2)
    rho, u, p = exact_riemann_solve(st_, st_, AIR, np.linspace(-3, 3, 13))
    np.testing.assert_allclose(rho, 0.7, rtol=1e-13)
    np.testing.assert_allclose(u, 0.3, atol=1e-13)
    np.testing.assert_allclose(p, 1.2, rtol=1e-13)


def test_riemann_far_field():
    rho, u, p = exact_riemann_solve(*SOD_PRIM, AIR, np.array([-10.0, 10.0]))
    assert (rho[0], u[0], p[0]) == (1.0, 0.0, 1.0)
    assert (rho[1], u[1], p[1]) == (0.125, 0.0, 0.1)


def test_riemann_vacuum_raises():
    with pytest.raises(RiemannError):
        star_state((1.0, -20.0, 1.0), (1.0, 20.0, 1.0))


def test_riemann_integral_conservation():
    """Integral over [-1, 1] at t equals 2 ubar - t (f(uR) - f(uL)); midpoint sampling."""
    t = 0.2
    n = 200_000
    x = -1 + (np.arange(n) + 0.5) * 2 / n
    rho, u, p = exact_riemann_solve(*SOD_PRIM, AIR, x / t)
    U = primitive_to_conserved(rho, u, 0 * u, p)
    integral = U.sum(axis=0) * 2 / n
    uL = primitive_to_conserved(*SOD_PRIM[0][:2], 0.0, SOD_PRIM[0][2])
    uR = primitive_to_conserved(*SOD_PRIM[1][:2], 0.0, SOD_PRIM[1][2])
    ref = uL + uR - t * (flux(uR) - flux(uL))
    np.testing.assert_allclose(integral, ref, atol=1e-4)
