import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mehdsg.euler import InadmissibleStateError, flux
from mehdsg.field import (
    DiscreteSpace,
    SGDGField,
    galerkin_flux_moments,
    legendre_basis,
    legendre_basis_deriv,
    load_snapshot,
    project_function,
    save_snapshot,
)
from mehdsg.mesh import Mesh
from mehdsg.quadrature import gauss_legendre_rule
from mehdsg.scenarios import SodIC
from mehdsg.stochastic import RandomSpace


def space_1d(K_D=2, K_G=2, L=2, nx=4, support=((0.0, 1.0),)):
    return DiscreteSpace(Mesh(1, nx), RandomSpace(support), K_D, K_G, L)


def space_2d(K_D=1, K_G=1, L=1, nx=3, ny=2):
    return DiscreteSpace(Mesh(2, nx, 0.0, 1.0, ny, 0.0, 2.0), RandomSpace(((0.0, 1.0),)), K_D, K_G, L)


def test_legendre_orthonormal():
    g = gauss_legendre_rule(10)
    P = legendre_basis(g.nodes, 6)
    G = (g.weights[:, None] * P).T @ P
    assert np.allclose(G, np.eye(7), atol=1e-13)


def test_legendre_derivative_matches_finite_difference():
    x = np.linspace(0.1, 0.9, 7)
    h = 1e-6
    fd = (legendre_basis(x + h, 5) - legendre_basis(x - h, 5)) / (2 * h)
    assert np.allclose(legendre_basis_deriv(x, 5), fd, atol=1e-6)


def test_shapes_and_mode_counts():
    sp = space_2d(K_D=2, K_G=3)
    assert sp.M == 9 and sp.NK == 4
    assert sp.zeros().coeffs.shape == (6, 1, 9, 4, 4)
    with pytest.raises(ValueError, match="shape"):
        SGDGField(sp, np.zeros((6, 1, 9, 3, 4)))


def test_evaluate_examples():
    sp = space_1d(K_D=1, K_G=1, L=1, nx=1)
    f = sp.zeros()
    f.coeffs[0, 0, 0, 0] = [1.0, 0.0, 0.0, 2.5]
    f.coeffs[0, 0, 1, 0, 0] = 0.1  # linear spatial mode of rho
    f.coeffs[0, 0, 0, 1, 0] = 0.2  # linear stochastic mode of rho
    s3 = np.sqrt(3.0)
    assert f.evaluate(0, 0, 1.0, xi_ref=[0.5])[0] == pytest.approx(1.0 + 0.1 * s3)
    assert f.evaluate(0, 0, 0.5, xi_ref=[1.0])[0] == pytest.approx(1.0 + 0.2 * s3)
    assert f.evaluate(0, 0, 0.5)[3] == pytest.approx(2.5)
    with pytest.raises(IndexError):
        f.evaluate(1, 0, 0.5)
    with pytest.raises(ValueError):
        f.evaluate(0, 0, 1.5)
    with pytest.raises(ValueError):
        f.evaluate(0, 0, 0.5, xi_ref=[-0.1])


def test_projection_reproduces_polynomials():
    sp = space_2d(K_D=2, K_G=2, L=2)

    def func(t, x, y, xi):
        r = 1.0 + 0.3 * x**2 - 0.2 * x * y + 0.1 * xi[0] ** 2 * y
        return np.stack(np.broadcast_arrays(r, 0.5 * r, -r, 3.0 + xi[0] + 0 * x), -1)

    f = project_function(sp, func)
    rng = np.random.default_rng(0)
    for _ in range(10):
        c, l = rng.integers(sp.mesh.n_cells), rng.integers(2)
        xh, yh, sh = rng.uniform(0, 1, 3)
        ox, oy = sp.mesh.cell_origins()
        x, y = ox[c] + sp.mesh.dx * xh, oy[c] + sp.mesh.dy * yh
        lo, hi = sp.grid.bounds[l, 0]
        xi = lo + (hi - lo) * sh
        assert np.allclose(f.evaluate(c, l, xh, yh, [sh]), func(0, np.array(x), np.array(y), (np.array(xi),)),
                           atol=1e-12)


def test_projection_rejects_nonfinite():
    sp = space_1d()
    with pytest.raises(ValueError, match="not finite"):
        project_function(sp, lambda t, x, y, xi: np.full(np.broadcast_shapes(x.shape, xi[0].shape) + (4,), np.nan))


def test_sod_projection_against_midpoint_oracle():
    """Exact piecewise projection vs a 1e6-point midpoint rule in xi (x split at the interface)."""
    sp = DiscreteSpace(Mesh(1, 4), RandomSpace(((-1.0, 1.0),)), 2, 1, 2)
    ic = SodIC(x0=0.5, width=0.2)
    f = ic.project(sp)
    g = gauss_legendre_rule(4)
    n = 10**6
    mid = (np.arange(n) + 0.5) / n
    P = legendre_basis(mid, 1)
    uL, uR = np.array(ic.left), np.array(ic.right)
    worst = 0.0
    for c in (1, 2):  # the cells the interface crosses
        for l in range(2):
            lo, hi = sp.grid.bounds[l, 0]
            yhat = np.clip((ic.interface(lo + (hi - lo) * mid) - c * sp.mesh.dx) / sp.mesh.dx, 0.0, 1.0)
            # int_0^1 phi_m(x) u(x) dx with the jump at yhat, Gauss on both pieces
            left = yhat[:, None] * g.nodes[None, :]
            right = yhat[:, None] + (1.0 - yhat[:, None]) * g.nodes[None, :]
            Il = np.einsum("rq,rqm->rm", yhat[:, None] * g.weights, legendre_basis(left, 2))
            Ir = np.einsum("rq,rqm->rm", (1.0 - yhat[:, None]) * g.weights, legendre_basis(right, 2))
            ref = (np.einsum("rm,rk->mk", Il, P)[..., None] * uL + np.einsum("rm,rk->mk", Ir, P)[..., None] * uR) / n
            worst = max(worst, np.abs(ref - f.coeffs[c, l]).max())
    assert worst < 1e-6


def test_galerkin_flux_moments_of_constant_state():
    sp = space_1d(K_D=2, K_G=2, L=1, nx=2)
    f = sp.zeros()
    u = np.array([1.0, 0.5, 0.0, 2.5])
    f.coeffs[:, :, 0, 0] = u
    G = galerkin_flux_moments(f, 1, 0)
    expect = np.zeros_like(G)
    expect[0, 0] = flux(u, direction=0)
    assert np.allclose(G, expect, atol=1e-14)
    f.coeffs[0, 0, 0, 0, 0] = -1.0
    with pytest.raises(InadmissibleStateError):
        galerkin_flux_moments(f, 0, 0)


def test_snapshot_round_trip(tmp_path):
    sp = space_2d()
    f = sp.zeros()
    f.coeffs[...] = np.random.default_rng(1).normal(size=f.coeffs.shape)
    path = save_snapshot(f, tmp_path / "s.npz", t=0.25, extra={"note": "x"})
    header, coeffs = load_snapshot(path)
    assert np.array_equal(coeffs, f.coeffs)
    assert header["t"] == 0.25 and header["K_D"] == 1 and header["note"] == "x"
    assert header["layout"].startswith("cell,element")


@settings(max_examples=25)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.integers(0, 3))
def test_field_linear_in_coefficients(xh, sh, seed):
    sp = space_1d(K_D=2, K_G=2, L=1, nx=2)
    rng = np.random.default_rng(seed)
    a, b = sp.zeros(), sp.zeros()
    a.coeffs[...] = rng.normal(size=a.coeffs.shape)
    b.coeffs[...] = rng.normal(size=b.coeffs.shape)
    lhs = (a + 2.0 * b).evaluate(1, 0, xh, xi_ref=[sh])
    rhs = a.evaluate(1, 0, xh, xi_ref=[sh]) + 2.0 * b.evaluate(1, 0, xh, xi_ref=[sh])
    assert np.allclose(lhs, rhs, atol=1e-12)
