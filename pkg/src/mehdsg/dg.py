"""Semi-discrete DG operator for the stochastic Galerkin Euler system.

For every (cell, element) block the RHS is the weak form

    du_{m,k}/dt = 1/dx [ sum_p w_p f(u_p) . dphi_m/dxhat Phi_k
                         - (G_{i+1/2} phi_m(1) - G_{i-1/2} phi_m(0)) ] (+ y terms) + S_{m,k}

where G is the numerical interface flux projected on the stochastic basis
(and the transverse face basis in 2D). One flux evaluation per face is
shared by both neighbours.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import kernels
from .euler import AIR, GasModel, InadmissibleStateError
from .field import DiscreteSpace, SGDGField, raise_inadmissible
from .mesh import BCKind, BoundaryConditions, ConfigError, ghost_states

FLUXES = ("lf", "hlle")


@dataclass
class Traces:
    """Face traces of a field, component-first: (4, Nx, Ny, L, Q*R)."""

    xl: np.ndarray
    xr: np.ndarray
    yb: Optional[np.ndarray]
    yt: Optional[np.ndarray]


class RhsOperator:
    """Callable ``L(field, t) -> (du/dt coefficients, (lambda_x, lambda_y))``."""

    def __init__(self, space: DiscreteSpace, bc: BoundaryConditions, flux: str = "lf",
                 gas: GasModel = AIR, source: Optional[Callable] = None):
        if flux not in FLUXES:
            raise ConfigError(f"unknown numerical flux '{flux}', expected one of {FLUXES}")
        self.space = space
        self.bc = bc.validate(space.mesh)
        self.flux = flux
        self.gas = gas
        self.source = source
        self._coords()

    def _coords(self):
        sp = self.space
        m = sp.mesh
        R = sp.R
        L = sp.grid.n_elements
        xi = sp.xi_nodes  # (L, R, N)
        if sp.dim == 1:
            Q = 1
            self._face_y = np.zeros((1, 1, R))
        else:
            q = sp.gl_face.nodes
            Q = len(q)
            yc = m.y0 + m.dy * (np.arange(m.ny)[:, None] + q[None, :])  # (Ny, Q)
            self._face_y = np.repeat(yc, R, axis=-1)[:, None, :]  # (Ny, 1, Q*R)
            xc = m.x0 + m.dx * (np.arange(m.nx)[:, None] + q[None, :])
            self._face_x = np.repeat(xc, R, axis=-1)[:, None, :]  # (Nx, 1, Q*R)
        self._face_xi = tuple(np.tile(xi[..., n], Q)[None] for n in range(xi.shape[-1]))  # (1, L, Q*R)
        x, y = sp.physical_points(sp.vol)
        Pv = sp.vol.n_spatial
        self._vol_x = x.reshape(m.n_cells, 1, Pv, 1)
        self._vol_y = y.reshape(m.n_cells, 1, Pv, 1)
        self._vol_xi = tuple(xi[None, :, None, :, n] for n in range(xi.shape[-1]))
        self._L = L

    # ---- traces and ghosts ------------------------------------------------
    def traces(self, cf2) -> Traces:
        sp = self.space
        m = sp.mesh
        shape = (4, m.nx, m.ny, sp.grid.n_elements, -1)
        xl = (cf2 @ sp.trace_x[0].B.T).reshape(shape)
        xr = (cf2 @ sp.trace_x[1].B.T).reshape(shape)
        yb = yt = None
        if sp.dim == 2:
            yb = (cf2 @ sp.trace_y[0].B.T).reshape(shape)
            yt = (cf2 @ sp.trace_y[1].B.T).reshape(shape)
        return Traces(xl, xr, yb, yt)

    def ghost(self, side, interior, t):
        """Ghost traces for ``side`` from interior traces (4, n_transverse, L, Q*R)."""
        bc = self.bc[side]
        m = self.space.mesh
        x = y = None
        if bc.kind is BCKind.DIRICHLET:
            if side in ("left", "right"):
                x = m.x0 if side == "left" else m.x1
                y = self._face_y
            else:
                y = m.y0 if side == "bottom" else m.y1
                x = self._face_x
        g = ghost_states(np.moveaxis(interior, 0, -1), side, bc, t, x, y, self._face_xi)
        return np.ascontiguousarray(np.moveaxis(g, -1, 0))

    def face_states(self, tr: Traces, t, axis):
        """Left/right states at all faces normal to ``axis``: (4, Nf, Ny, L, QR) or (4, Nx, Nf, L, QR)."""
        if axis == 0:
            lo, hi, ax, sides = tr.xl, tr.xr, 1, ("left", "right")
        else:
            lo, hi, ax, sides = tr.yb, tr.yt, 2, ("bottom", "top")
        if self.bc.periodic(axis):
            return np.roll(hi, 1, axis=ax), lo
        first = np.take(lo, 0, axis=ax)
        last = np.take(hi, -1, axis=ax)
        gl = np.expand_dims(self.ghost(sides[0], first, t), ax)
        gr = np.expand_dims(self.ghost(sides[1], last, t), ax)
        return np.concatenate([gl, hi], axis=ax), np.concatenate([lo, gr], axis=ax)

    # ---- numerical flux ----------------------------------------------------
    def numerical_flux(self, UL, UR, lam, axis):
        shp = UL.shape
        ul = np.ascontiguousarray(UL).reshape(4, -1)
        ur = np.ascontiguousarray(UR).reshape(4, -1)
        out = np.empty_like(ul)
        if self.flux == "lf":
            kernels.lf_faces(ul, ur, float(lam), axis, self.gas.gamma, out)
        else:
            kernels.hlle_faces(ul, ur, axis, self.gas.gamma, out)
        return out.reshape(shp)

    def _speeds(self, U, what):
        flat = np.ascontiguousarray(U).reshape(4, -1)
        lx, ly, bad = kernels.max_speeds(flat, self.gas.gamma)
        if bad >= 0:
            where = tuple(int(i) for i in np.unravel_index(bad, U.shape[1:]))
            raise InadmissibleStateError(f"{what}: inadmissible state {flat[:, bad]} at index {where}",
                                         where, flat[:, bad].copy())
        return lx, ly

    # ---- operator ----------------------------------------------------------
    def __call__(self, field: SGDGField, t: float):
        sp = self.space
        m = sp.mesh
        C, L = m.n_cells, sp.grid.n_elements
        MK = sp.M * sp.NK
        cf2 = field.component_first().reshape(4 * C * L, MK)
        g = self.gas.gamma

        Uv = (cf2 @ sp.vol.B.T).reshape(4, -1)
        Fx = np.empty_like(Uv)
        Fy = np.empty_like(Uv) if sp.dim == 2 else Fx
        lx, ly, bad = kernels.flux_and_speeds(Uv, Fx, Fy, sp.dim == 2, g)
        if bad >= 0:
            raise_inadmissible(sp, Uv.reshape(4, C, L, -1), bad, "volume quadrature node")
        P = sp.vol.B.shape[0]
        rhs = (Fx.reshape(4 * C * L, P) @ sp.vol_grad[0]) / m.dx
        if sp.dim == 2:
            rhs += (Fy.reshape(4 * C * L, P) @ sp.vol_grad[1]) / m.dy

        tr = self.traces(cf2)
        faces = []
        for axis in range(sp.dim):
            UL, UR = self.face_states(tr, t, axis)
            a, b = self._speeds(UL, "face trace"), self._speeds(UR, "face trace")
            lx = max(lx, a[0], b[0])
            ly = max(ly, a[1], b[1])
            faces.append((UL, UR))

        Mx = sp.K_D + 1
        Mt = sp.face_modes
        NK = sp.NK
        rhs = rhs.reshape(4, m.nx, m.ny, L, Mx, Mt if sp.dim == 2 else 1, NK)
        lams = (lx, ly)
        for axis, (UL, UR) in enumerate(faces):
            Fh = self.numerical_flux(UL, UR, lams[axis], axis)
            nf = Fh.shape[1 + axis]
            Gsh = list(Fh.shape[:4]) + [Mt, NK]
            G = (Fh.reshape(-1, Fh.shape[-1]) @ sp.face_proj).reshape(Gsh)
            if self.bc.periodic(axis):
                Glo = G
                Ghi = np.roll(G, -1, axis=1 + axis)
            else:
                Glo = np.take(G, np.arange(nf - 1), axis=1 + axis)
                Ghi = np.take(G, np.arange(1, nf), axis=1 + axis)
            if axis == 0:
                # (4, Nx, Ny, L, Mt=my, NK) -> broadcast over mx
                rhs -= (Ghi[:, :, :, :, None, :, :] * sp.phi_at_1[:, None, None]
                        - Glo[:, :, :, :, None, :, :] * sp.phi_at_0[:, None, None]) / m.dx
            else:
                # transverse index is mx
                rhs -= (Ghi[:, :, :, :, :, None, :] * sp.phi_at_1[None, :, None]
                        - Glo[:, :, :, :, :, None, :] * sp.phi_at_0[None, :, None]) / m.dy
        rhs = rhs.reshape(4 * C * L, MK)

        if self.source is not None:
            S = np.asarray(self.source(t, self._vol_x, self._vol_y, self._vol_xi), dtype=float)
            S = np.broadcast_to(S, (C, L, sp.vol.n_spatial, sp.R, 4))
            S = np.ascontiguousarray(np.moveaxis(S, -1, 0)).reshape(4 * C * L, -1)
            rhs += S @ sp.vol_proj

        out = rhs.reshape(4, C, L, sp.M, NK)
        return np.ascontiguousarray(np.moveaxis(out, 0, -1)), (lx, ly if sp.dim == 2 else 0.0)

    def wave_speeds(self, field: SGDGField, t: float = 0.0):
        """Global (lambda_x, lambda_y) over volume nodes, traces and ghost states."""
        sp = self.space
        C, L = sp.mesh.n_cells, sp.grid.n_elements
        cf2 = field.component_first().reshape(4 * C * L, -1)
        Uv = (cf2 @ sp.vol.B.T).reshape(4, C, L, -1)
        lx, ly = self._speeds(Uv, "volume quadrature node")
        tr = self.traces(cf2)
        for axis in range(sp.dim):
            for U in self.face_states(tr, t, axis):
                a = self._speeds(U, "face trace")
                lx, ly = max(lx, a[0]), max(ly, a[1])
        return lx, (ly if sp.dim == 2 else 0.0)


def compute_rhs(field, t, bc, flux_kind="lf", source=None, gas: GasModel = AIR):
    """Functional form of :class:`RhsOperator` (rebuilds caches on each call)."""
    op = RhsOperator(field.space, bc, flux_kind, gas, source)
    return op(field, t)[0]


def estimate_global_wave_speeds(field, bc, gas: GasModel = AIR, t=0.0):
    return RhsOperator(field.space, bc, "lf", gas).wave_speeds(field, t)
