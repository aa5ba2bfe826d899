"""Space-stochastic DG coefficient tensors and their evaluation grids.

The coefficient tensor has shape ``(cells, elements, spatial modes,
stochastic modes, 4)``. Spatial modes are orthonormal Legendre polynomials
``sqrt(2m+1) P_m(2x-1)`` on the reference cell (tensor products in 2D with
``m = mx*(K_D+1) + my``); stochastic modes are the orthonormal basis of
each random element, ordered like the complete index set.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial import legendre as npleg

from .euler import InadmissibleStateError
from .mesh import Mesh
from .quadrature import gauss_legendre_rule, gauss_lobatto_rule, lobatto_points_for_order, tensor_rule
from .stochastic import (
    LEGENDRE,
    MultiElementGrid,
    RandomSpace,
    build_multi_element_grid,
    complete_index_set,
    default_stoch_points,
    stochastic_rule,
)


def legendre_basis(x, K):
    """Orthonormal Legendre values on [0,1]: shape (len(x), K+1)."""
    return LEGENDRE.evaluate(np.asarray(x, dtype=float), K)


def legendre_basis_deriv(x, K):
    """d/dx of :func:`legendre_basis` on [0,1]."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape + (K + 1,))
    t = 2.0 * x - 1.0
    for m in range(1, K + 1):
        c = np.zeros(m + 1)
        c[m] = 1.0
        out[..., m] = 2.0 * np.sqrt(2 * m + 1) * npleg.legval(t, npleg.legder(c))
    return out


@dataclass(frozen=True)
class PointSet:
    """Reference points of a block with cached basis values."""

    xhat: np.ndarray  # (Ps, dim)
    S: np.ndarray  # spatial basis values (Ps, M)
    B: np.ndarray  # space-stochastic values (Ps*R, M*NK), stochastic index fastest

    @property
    def n_spatial(self):
        return self.xhat.shape[0]


class DiscreteSpace:
    """Mesh, multi-element grid, polynomial orders and all cached grids."""

    def __init__(self, mesh: Mesh, rspace: RandomSpace, K_D: int, K_G: int, n_elements=1,
                 stoch_points=None, face_points=None, vol_points=None, stoch_rule_kind="legendre"):
        if K_D < 0 or K_G < 0:
            raise ValueError("polynomial orders must be nonnegative")
        self.mesh = mesh
        self.rspace = rspace
        self.grid: MultiElementGrid = build_multi_element_grid(rspace, n_elements)
        self.K_D = int(K_D)
        self.K_G = int(K_G)
        self.dim = mesh.dim
        self.index_set = complete_index_set(rspace.dims, self.K_G)
        self.NK = len(self.index_set)
        n1 = self.K_D + 1
        self.M = n1 ** self.dim
        if self.dim == 1:
            self.modes = np.arange(n1)[:, None]
        else:
            mx, my = np.meshgrid(np.arange(n1), np.arange(n1), indexing="ij")
            self.modes = np.stack([mx.ravel(), my.ravel()], axis=-1)

        self.n_stoch = int(stoch_points) if stoch_points else default_stoch_points(self.K_G)
        if stoch_rule_kind == "lobatto" and self.n_stoch < 2:
            self.n_stoch = 2
        self.s_nodes, self.s_weights = stochastic_rule(rspace.dims, self.n_stoch, stoch_rule_kind)
        self.R = len(self.s_weights)
        self.Phi = self.stoch_basis(self.s_nodes)  # (R, NK)
        # physical stochastic nodes per element: (L, R, N)
        self.xi_nodes = self.grid.physical_nodes(self.s_nodes)

        self.lobatto = gauss_lobatto_rule(lobatto_points_for_order(self.K_D))
        self.gl_vol = gauss_legendre_rule(int(vol_points) if vol_points else n1)
        self.gl_face = gauss_legendre_rule(int(face_points) if face_points else n1)
        self.w0 = float(self.lobatto.weights[0])
        self._build_grids()

    # ---- bases -------------------------------------------------------
    def stoch_basis(self, s):
        """Stochastic basis at reference points s (R, N) in [0,1]^N: (R, NK)."""
        s = np.atleast_2d(np.asarray(s, dtype=float))
        idx = self.index_set.indices
        out = np.ones((s.shape[0], self.NK))
        for d in range(s.shape[1]):
            out *= LEGENDRE.evaluate(s[:, d], self.K_G)[:, idx[:, d]]
        return out

    def spatial_basis(self, xhat):
        """Spatial basis at reference points (P, dim): (P, M)."""
        xhat = np.atleast_2d(np.asarray(xhat, dtype=float))
        out = np.ones((xhat.shape[0], self.M))
        for d in range(self.dim):
            out *= legendre_basis(xhat[:, d], self.K_D)[:, self.modes[:, d]]
        return out

    def spatial_basis_grad(self, xhat, axis):
        xhat = np.atleast_2d(np.asarray(xhat, dtype=float))
        out = np.ones((xhat.shape[0], self.M))
        for d in range(self.dim):
            f = legendre_basis_deriv if d == axis else legendre_basis
            out *= f(xhat[:, d], self.K_D)[:, self.modes[:, d]]
        return out

    def kron(self, S, Phi=None):
        Phi = self.Phi if Phi is None else Phi
        P, M = S.shape
        R, K = Phi.shape
        return np.einsum("pm,rk->prmk", S, Phi).reshape(P * R, M * K)

    def point_set(self, xhat) -> PointSet:
        xhat = np.atleast_2d(np.asarray(xhat, dtype=float))
        S = self.spatial_basis(xhat)
        return PointSet(xhat, S, self.kron(S))

    def _build_grids(self):
        K = self.K_D
        gv, gf, lob = self.gl_vol, self.gl_face, self.lobatto
        w_s = self.s_weights
        if self.dim == 1:
            vol_pts, vol_w = gv.nodes[:, None], gv.weights
            self.vol = self.point_set(vol_pts)
            self.trace_x = (self.point_set([[0.0]]), self.point_set([[1.0]]))
            self.trace_y = None
            mon = np.concatenate([lob.nodes, gv.nodes])[:, None]
            face_modes = 1
            face_vals_x = np.ones((1, 1))
            face_w = np.ones(1)
        else:
            vol_pts, vol_w = tensor_rule([gv, gv])
            self.vol = self.point_set(vol_pts)
            q = gf.nodes
            self.trace_x = (self.point_set(np.stack([np.zeros_like(q), q], -1)),
                            self.point_set(np.stack([np.ones_like(q), q], -1)))
            self.trace_y = (self.point_set(np.stack([q, np.zeros_like(q)], -1)),
                            self.point_set(np.stack([q, np.ones_like(q)], -1)))
            a, _ = tensor_rule([lob, gf])
            b, _ = tensor_rule([gf, lob])
            mon = np.concatenate([a, b, vol_pts])
            face_modes = K + 1
            face_vals_x = legendre_basis(q, K)  # (Q, K+1) transverse basis on faces
            face_w = gf.weights
        self.vol_weights = vol_w
        self.monitor = self.point_set(mon)
        W = (vol_w[:, None] * w_s[None, :]).reshape(-1)
        # volume flux matrices: (P*R, M*NK), already multiplied by quadrature weights
        self.vol_grad = []
        for ax in range(self.dim):
            G = self.kron(self.spatial_basis_grad(vol_pts, ax))
            self.vol_grad.append(W[:, None] * G)
        self.vol_proj = W[:, None] * self.vol.B
        # face projection: (Q*R, face_modes*NK)
        self.face_modes = face_modes
        Wf = (face_w[:, None] * w_s[None, :]).reshape(-1)
        self.face_proj = Wf[:, None] * self.kron(face_vals_x)
        end = legendre_basis([0.0, 1.0], K)
        self.phi_at_0 = end[0]
        self.phi_at_1 = end[1]

    # ---- coordinates --------------------------------------------------
    def physical_points(self, ps: PointSet):
        """Physical spatial coordinates of a point set in every cell: x, y of shape (C, Ps)."""
        ox, oy = self.mesh.cell_origins()
        x = ox[:, None] + self.mesh.dx * ps.xhat[None, :, 0]
        if self.dim == 2:
            y = oy[:, None] + self.mesh.dy * ps.xhat[None, :, 1]
        else:
            y = np.zeros_like(x)
        return x, y

    def xi_tuple(self, xi_nodes=None):
        """Random-node coordinates as a tuple of (L, R) arrays, one per random dim."""
        xi = self.xi_nodes if xi_nodes is None else xi_nodes
        return tuple(xi[..., n] for n in range(xi.shape[-1]))

    def zeros(self) -> "SGDGField":
        return SGDGField(self, np.zeros((self.mesh.n_cells, self.grid.n_elements, self.M, self.NK, 4)))

    def header(self) -> dict:
        m = self.mesh
        return {
            "dim": m.dim, "nx": m.nx, "ny": m.ny, "x0": m.x0, "x1": m.x1, "y0": m.y0, "y1": m.y1,
            "K_D": self.K_D, "K_G": self.K_G, "n_elements": list(self.grid.n_per_dim),
            "supports": [list(s) for s in self.rspace.supports],
            "breakpoints": [bp.tolist() for bp in self.grid.breakpoints],
            "layout": "cell,element,spatial_mode,stochastic_mode,component",
        }


class SGDGField:
    """Coefficient tensor on a :class:`DiscreteSpace`."""

    def __init__(self, space: DiscreteSpace, coeffs: np.ndarray):
        self.space = space
        self.coeffs = np.ascontiguousarray(coeffs, dtype=float)
        expected = (space.mesh.n_cells, space.grid.n_elements, space.M, space.NK, 4)
        if coeffs.shape != expected:
            raise ValueError(f"coefficient tensor has shape {coeffs.shape}, expected {expected}")

    def copy(self) -> "SGDGField":
        return SGDGField(self.space, self.coeffs.copy())

    def means(self) -> np.ndarray:
        """All (cell, element) means, shape (C, L, 4)."""
        return self.coeffs[:, :, 0, 0, :]

    def component_first(self) -> np.ndarray:
        """Copy with shape (4, C*L, M*NK), contiguous."""
        c = self.coeffs
        C, L, M, K, _ = c.shape
        return np.ascontiguousarray(np.moveaxis(c, -1, 0)).reshape(4, C * L, M * K)

    def values(self, ps: PointSet, cf=None) -> np.ndarray:
        """Point values on a point set for all blocks: (4, C, L, Ps*R)."""
        cf = self.component_first() if cf is None else cf
        C, L = self.coeffs.shape[:2]
        return (cf.reshape(4 * C * L, -1) @ ps.B.T).reshape(4, C, L, -1)

    def evaluate(self, cell, element, x_ref, y_ref=None, xi_ref=None):
        """State at one reference point of one (cell, element) block."""
        sp = self.space
        C, L = self.coeffs.shape[:2]
        if not (0 <= cell < C and 0 <= element < L):
            raise IndexError(f"block ({cell}, {element}) out of range")
        xh = [x_ref] if sp.dim == 1 else [x_ref, y_ref]
        if any(v is None or not 0.0 <= v <= 1.0 for v in xh):
            raise ValueError("reference coordinates must lie in [0, 1]")
        if xi_ref is None:
            xi_ref = np.full(sp.rspace.dims, 0.5)
        xi_ref = np.atleast_1d(np.asarray(xi_ref, dtype=float))
        if np.any(xi_ref < 0.0) or np.any(xi_ref > 1.0):
            raise ValueError("stochastic reference coordinates must lie in [0, 1]")
        S = sp.spatial_basis(np.array([xh]))[0]
        Phi = sp.stoch_basis(xi_ref[None, :])[0]
        return np.einsum("m,k,mkc->c", S, Phi, self.coeffs[cell, element])

    def cell_mean(self, cell, element) -> np.ndarray:
        return self.coeffs[cell, element, 0, 0].copy()

    def __add__(self, other):
        return SGDGField(self.space, self.coeffs + other.coeffs)

    def __mul__(self, a):
        return SGDGField(self.space, self.coeffs * a)

    __rmul__ = __mul__


def raise_inadmissible(space: DiscreteSpace, U, flat_index, what):
    """Turn a flat point index of an array (4, C, L, P) into a structured error."""
    _, C, L, P = U.shape
    c, l, p = np.unravel_index(flat_index, (C, L, P))
    state = U[:, c, l, p]
    R = space.R
    ps, r = divmod(int(p), R)
    raise InadmissibleStateError(
        f"{what}: inadmissible state (rho, m1, m2, E) = {state} at cell {c}, element {l}, "
        f"spatial node {ps}, stochastic node {r}",
        (int(c), int(l), int(ps), int(r)), state)


# ---- projection of initial data -----------------------------------------

def _composite_rule(n, refine):
    g = gauss_legendre_rule(n)
    x = (np.arange(refine)[:, None] + g.nodes[None, :]).ravel() / refine
    w = np.tile(g.weights, refine) / refine
    return x, w


def project_function(space: DiscreteSpace, func, t=0.0, refine=1, refine_xi=1, extra_points=2):
    """L2 projection of ``func(t, x, y, xi) -> (..., 4)`` onto the space.

    Composite Gauss-Legendre in space and random variables, exact for
    polynomial data up to the rule's degree.
    """
    nx = space.K_D + 1 + extra_points
    nxi = space.K_G + 1 + extra_points
    xs, wx = _composite_rule(nx, refine)
    ss, ws = _composite_rule(nxi, refine_xi)
    if space.dim == 1:
        xhat, wsp = xs[:, None], wx
    else:
        gridx, gridy = np.meshgrid(xs, xs, indexing="ij")
        xhat = np.stack([gridx.ravel(), gridy.ravel()], -1)
        wsp = np.outer(wx, wx).ravel()
    N = space.rspace.dims
    s_grid = np.stack([g.ravel() for g in np.meshgrid(*([ss] * N), indexing="ij")], -1)
    w_grid = np.prod(np.stack([g.ravel() for g in np.meshgrid(*([ws] * N), indexing="ij")], -1), -1)
    S = space.spatial_basis(xhat)
    Phi = space.stoch_basis(s_grid)
    ox, oy = space.mesh.cell_origins()
    x = ox[:, None, None, None] + space.mesh.dx * xhat[None, None, :, 0, None]
    if space.dim == 2:
        y = oy[:, None, None, None] + space.mesh.dy * xhat[None, None, :, 1, None]
    else:
        y = np.zeros_like(x)
    xi_nodes = space.grid.physical_nodes(s_grid)  # (L, R, N)
    xi = tuple(xi_nodes[None, :, None, :, n] for n in range(N))
    vals = np.asarray(func(t, x, y, xi), dtype=float)
    C, L = space.mesh.n_cells, space.grid.n_elements
    vals = np.broadcast_to(vals, (C, L, len(wsp), len(w_grid), 4))
    if not np.all(np.isfinite(vals)):
        bad = np.argwhere(~np.isfinite(vals))[0]
        raise ValueError(f"initial data not finite at cell {bad[0]}, element {bad[1]}, node {tuple(bad[2:4])}")
    A = (wsp[:, None] * S)  # (P, M)
    Bw = (w_grid[:, None] * Phi)  # (R, K)
    out = np.einsum("pm,clprz,rk->clmkz", A, vals, Bw, optimize=True)
    return SGDGField(space, np.ascontiguousarray(out))


def project_initial(space: DiscreteSpace, ic, t=0.0, **kw) -> SGDGField:
    """Project initial data. Objects with a ``project`` method use their own exact rule."""
    if hasattr(ic, "project"):
        return ic.project(space, t)
    return project_function(space, ic, t, **kw)


def galerkin_flux_moments(field: SGDGField, cell, element, direction=0, flux_fn=None):
    """Projection of the pointwise flux onto the space-stochastic basis of one block.

    Returns shape (M, NK, 4). ``flux_fn`` defaults to the Euler flux.
    """
    from .euler import AIR, flux, is_admissible

    sp = field.space
    U = np.einsum("pm,rk,mkc->prc", sp.vol.S, sp.Phi, field.coeffs[cell, element])
    if flux_fn is None:
        if not np.all(is_admissible(U)):
            p, r = np.argwhere(~is_admissible(U))[0]
            raise InadmissibleStateError(
                f"inadmissible node state at cell {cell}, element {element}, node ({p}, {r})",
                (cell, element, int(p), int(r)), U[p, r])
        F = flux(U, AIR, direction)
    else:
        F = flux_fn(U)
    W = sp.vol_weights[:, None] * sp.s_weights[None, :]
    return np.einsum("pr,prc,pm,rk->mkc", W, F, sp.vol.S, sp.Phi)


# ---- snapshots ----------------------------------------------------------

def save_snapshot(field: SGDGField, path, t=0.0, extra=None):
    """Write ``<path>`` as .npz: coefficient tensor plus a JSON header."""
    header = field.space.header()
    header["t"] = float(t)
    if extra:
        header.update(extra)
    path = Path(path)
    np.savez(path, coeffs=field.coeffs, header=np.array(json.dumps(header)))
    return path


def load_snapshot(path):
    with np.load(path) as data:
        return json.loads(str(data["header"])), data["coeffs"].copy()
