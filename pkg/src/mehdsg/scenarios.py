"""Registered experiment scenarios: manufactured smooth flow, uncertain Sod, DMR.

Initial data, source terms and boundary data are functions of
``(t, x, y, xi)`` where ``x`` and ``y`` are broadcastable arrays and ``xi``
is a tuple with one broadcastable array per random dimension. They return
conserved states with the component axis last.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import legendre as npleg

from .dg import RhsOperator
from .euler import GasModel, primitive_to_conserved
from .field import DiscreteSpace, SGDGField, legendre_basis, project_initial
from .mesh import BCKind, BoundaryConditions, ConfigError, Mesh, SideBC
from .quadrature import gauss_legendre_rule
from .riemann import exact_riemann_solve, star_state
from .stochastic import RandomSpace
from .limiters import TvbmConfig
from .timestepping import SCHEMES, CflConfig, Solver

TWO_PI = 2.0 * np.pi


# ---- manufactured smooth solution ---------------------------------------

MANUFACTURED_SUPPORTS = {"1d": ((0.1, 1.0),), "3d": ((0.1, 1.0), (0.1, 0.3), (1.8, 2.5))}


def _manufactured_params(xi, mode):
    if mode == "1d":
        return xi[0], 0.1, 2.0
    return xi[0], xi[1], xi[2]


def manufactured_r(t, x, xi, mode="1d"):
    a, b, c = _manufactured_params(xi, mode)
    return c + b * np.cos(TWO_PI * (x - a * t))


def ic_manufactured(t, x, y, xi, mode="1d"):
    """Exact manufactured solution (r, r, 0, r^2)."""
    r = manufactured_r(t, np.asarray(x, dtype=float), xi, mode)
    return np.stack([r, r, np.zeros_like(r), r * r], axis=-1)


def source_manufactured(t, x, y, xi, mode="1d", gas: GasModel = GasModel()):
    """Residual of the manufactured solution under the Euler operator.

    With velocity 1 and p = (gamma-1)(r^2 - r/2) the flux is
    (r, r + p, 0, r^2 + p).
    """
    a, b, c = _manufactured_params(xi, mode)
    arg = TWO_PI * (np.asarray(x, dtype=float) - a * t)
    s = np.sin(arg)
    r = c + b * np.cos(arg)
    r_t = TWO_PI * a * b * s
    r_x = -TWO_PI * b * s
    dp = (gas.gamma - 1.0) * (2.0 * r - 0.5) * r_x
    S0 = r_t + r_x
    S1 = r_t + r_x + dp
    S3 = 2.0 * r * r_t + 2.0 * r * r_x + dp
    S0, S1, S3 = np.broadcast_arrays(S0, S1, S3)
    return np.stack([S0, S1, np.zeros_like(S0), S3], axis=-1)


# ---- uncertain Sod problem ---------------------------------------------

SOD_LEFT = (1.0, 0.0, 0.0, 2.5)
SOD_RIGHT = (0.125, 0.0, 0.0, 0.25)


@dataclass
class SodIC:
    """Piecewise-constant data with interface at ``x0 + width*xi``, xi in [-1, 1]."""

    x0: float = 0.5
    width: float = 0.05
    left: tuple = SOD_LEFT
    right: tuple = SOD_RIGHT
    gas: GasModel = field(default_factory=GasModel)

    def interface(self, xi):
        return self.x0 + self.width * np.asarray(xi, dtype=float)

    def __call__(self, t, x, y, xi):
        x = np.asarray(x, dtype=float)
        if np.ndim(t) == 0 and t == 0.0:
            right = x >= self.interface(xi[0])
            return np.where(right[..., None], np.asarray(self.right), np.asarray(self.left))
        return self.exact(t, x, y, xi)

    def primitives(self):
        g = self.gas.gamma
        L, R = self.left, self.right
        pl = (g - 1.0) * (L[3] - 0.5 * (L[1] ** 2 + L[2] ** 2) / L[0])
        pr = (g - 1.0) * (R[3] - 0.5 * (R[1] ** 2 + R[2] ** 2) / R[0])
        return (L[0], L[1] / L[0], pl), (R[0], R[1] / R[0], pr)

    def exact(self, t, x, y, xi):
        x = np.asarray(x, dtype=float)
        left, right = self.primitives()
        if not hasattr(self, "_star"):
            self._star = star_state(left, right, self.gas)
        xs = self.interface(xi[0])
        s = np.broadcast_to((x - xs) / max(float(t), 1e-300), np.broadcast_shapes(np.shape(x), np.shape(xs)))
        rho, u, p = exact_riemann_solve(left, right, self.gas, s, self._star)
        return primitive_to_conserved(rho, u, np.zeros_like(u), p, self.gas)

    def project(self, space: DiscreteSpace, t=0.0):
        """Exact projection of the piecewise-constant data.

        Each (cell, element) block is split in xi where the interface leaves
        the cell; on each piece the x-integral of phi_m up to the interface is
        a polynomial in xi, integrated exactly by Gauss-Legendre.
        """
        if t != 0.0:
            raise ValueError("exact projection is only available at t = 0")
        if space.dim != 1 or space.rspace.dims != 1:
            raise ConfigError("the uncertain Sod problem is one-dimensional in space and random variables")
        m = space.mesh
        K, KG = space.K_D, space.K_G
        xa = m.x0 + m.dx * np.arange(m.nx)  # (C,)
        lo = space.grid.bounds[:, 0, 0]
        hi = space.grid.bounds[:, 0, 1]  # (L,)
        # reference xi coordinate s in [0,1] where the interface passes x = xa and x = xa + dx
        if self.width != 0.0:
            def s_at(xv):
                xi = (xv - self.x0) / self.width
                return np.clip((xi[:, None] - lo[None, :]) / (hi - lo)[None, :], 0.0, 1.0)
            sa, sb = s_at(xa), s_at(xa + m.dx)
            brk = np.sort(np.stack([np.zeros_like(sa), sa, sb, np.ones_like(sa)], -1), axis=-1)
        else:
            brk = np.broadcast_to(np.array([0.0, 1.0]), (m.nx, len(lo), 2))
        g = gauss_legendre_rule(K + KG + 2)
        a, b = brk[..., :-1], brk[..., 1:]  # (C, L, pieces)
        s = a[..., None] + (b - a)[..., None] * g.nodes  # (C, L, P, n)
        w = (b - a)[..., None] * g.weights
        xi = lo[None, :, None, None] + (hi - lo)[None, :, None, None] * s
        yhat = np.clip((self.interface(xi) - xa[:, None, None, None]) / m.dx, 0.0, 1.0)
        A = _legendre_antiderivative(yhat, K)  # (C, L, P, n, M): int_0^y phi_m
        Phi = space.stoch_basis(s.reshape(-1, 1)).reshape(s.shape + (space.NK,))
        I = np.einsum("clpn,clpnm,clpnk->clmk", w, A, Phi)
        uL, uR = np.asarray(self.left), np.asarray(self.right)
        coeffs = I[..., None] * (uL - uR)
        coeffs[:, :, 0, 0, :] += uR
        return SGDGField(space, coeffs)


def _legendre_antiderivative(y, K):
    """int_0^y sqrt(2m+1) P_m(2x-1) dx for m = 0..K, shape y.shape + (K+1,)."""
    out = np.empty(np.shape(y) + (K + 1,))
    t = 2.0 * np.asarray(y) - 1.0
    for m in range(K + 1):
        c = np.zeros(m + 1)
        c[m] = 1.0
        ci = npleg.legint(c, lbnd=-1.0)
        out[..., m] = 0.5 * np.sqrt(2 * m + 1) * npleg.legval(t, ci)
    return out


# ---- double Mach reflection ----------------------------------------------

@dataclass
class DmrIC:
    """Mach 10 shock on a ramp with uncertain angle xi (degrees)."""

    canonical: bool = False
    x_bar: float = 1.0 / 6.0
    gas: GasModel = field(default_factory=GasModel)

    def states(self, xi):
        ang = np.deg2rad(np.asarray(xi, dtype=float))
        if self.canonical:
            rhoR, vx, vy = 1.4, 8.25 * np.cos(ang), -8.25 * np.sin(ang)
        else:
            rhoR, vx, vy = 0.125, 8.25 * np.cos(ang), -8.25 * np.cos(ang)
        return ang, rhoR, vx, vy

    def shock_speed(self, xi):
        ang, rhoR, vx, vy = self.states(xi)
        vn = vx * np.cos(ang) - vy * np.sin(ang)
        return 8.0 * vn / (8.0 - rhoR)

    def __call__(self, t, x, y, xi):
        ang, rhoR, vx, vy = self.states(xi[0])
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        front = self.x_bar + np.tan(ang) * y + self.shock_speed(xi[0]) * t / np.cos(ang)
        post = x < front
        L = primitive_to_conserved(8.0, vx, vy, 116.5, self.gas)
        R = primitive_to_conserved(rhoR, 0.0, 0.0, 1.0, self.gas)
        return np.where(post[..., None], L, R)


def constant_state(state):
    u = np.asarray(state, dtype=float)

    def f(t, x, y, xi):
        return np.broadcast_to(u, np.broadcast_shapes(np.shape(x), *[np.shape(v) for v in xi]) + (4,)).copy()

    return f


def freeze_xi(func, xi_value):
    """Wrap a (t, x, y, xi) function so it ignores xi and uses ``xi_value``."""
    if func is None:
        return None
    vals = tuple(float(v) for v in np.atleast_1d(xi_value))

    def f(t, x, y, xi):
        shape = np.broadcast_shapes(np.shape(x), *[np.shape(v) for v in xi])
        return func(t, x, y, tuple(np.full(shape, v) for v in vals))

    return f


# ---- scenario description -------------------------------------------------

IC_TAGS = ("manufactured", "sod", "dmr", "constant")


def _f(default, section, doc=""):
    return field(default=default, metadata={"section": section, "doc": doc})


@dataclass
class Scenario:
    """Declarative experiment description (all keys settable from config files)."""

    name: str = _f("custom", "scenario", "label used in outputs")
    ic: str = _f("manufactured", "scenario", "one of manufactured, sod, dmr, constant")
    t_end: float = _f(1.0, "scenario", "end time")
    gamma: float = _f(1.4, "scenario", "adiabatic constant")
    manufactured_mode: str = _f("1d", "scenario", "1d (one random variable) or 3d")
    source: bool = _f(True, "scenario", "manufactured source term on/off")
    canonical_dmr: bool = _f(False, "scenario", "canonical Woodward-Colella DMR states")
    sod_width: float = _f(0.05, "scenario", "interface uncertainty half-width")
    constant_state: str = _f("1,0,0,2.5", "scenario", "state for ic = constant")
    dim: int = _f(1, "mesh", "spatial dimension")
    nx: int = _f(20, "mesh", "cells in x")
    ny: int = _f(1, "mesh", "cells in y")
    x0: float = _f(0.0, "mesh", "")
    x1: float = _f(1.0, "mesh", "")
    y0: float = _f(0.0, "mesh", "")
    y1: float = _f(1.0, "mesh", "")
    bc: str = _f("default", "mesh", "default (scenario-specific) or periodic")
    K_D: int = _f(1, "discretization", "spatial polynomial degree")
    K_G: int = _f(2, "discretization", "stochastic polynomial degree")
    n_elements: int = _f(1, "discretization", "multi-elements per random dimension")
    stoch_points: int = _f(0, "discretization", "stochastic quadrature points per dim per element (0: default)")
    face_points: int = _f(0, "discretization", "face Gauss points (0: K_D+1)")
    vol_points: int = _f(0, "discretization", "volume Gauss points per direction (0: K_D+1)")
    ic_refine: int = _f(2, "discretization", "composite refinement of the generic initial projection")
    flux: str = _f("lf", "solver", "lf or hlle")
    cfl: float = _f(0.45, "solver", "CFL number C")
    rk_order: int = _f(4, "solver", "SSP-RK order 1-4")
    tvbm: bool = _f(True, "solver", "TVBM minmod limiter on/off")
    tvb_M: float = _f(0.0, "solver", "TVB constant")
    hyperbolic_limiter: bool = _f(True, "solver", "hyperbolicity limiter on/off")
    max_steps: int = _f(10_000_000, "solver", "abort after this many steps")
    check_invariants: bool = _f(False, "solver", "count admissibility invariant violations")
    progress_every: int = _f(0, "solver", "progress line cadence in steps (0: off)")
    output_points: int = _f(15, "output", "Gauss points per cell for statistics and norms")
    output_xi_points: int = _f(20, "output", "Gauss points per multi-element for references")
    reference_points: int = _f(10000, "output", "midpoint xi points for the exact Sod reference")
    mc_samples: int = _f(200000, "output", "Monte Carlo sample count (--mc)")
    seed: int = _f(0, "output", "random seed")

    def validate(self) -> "Scenario":
        """Raise ConfigError with a message starting with the offending key."""
        checks = (
            ("ic", self.ic in IC_TAGS, f"unknown ic '{self.ic}', expected one of {IC_TAGS}"),
            ("K_D", self.K_D >= 0, "spatial degree must be >= 0"),
            ("K_G", self.K_G >= 0, "stochastic degree must be >= 0"),
            ("n_elements", self.n_elements >= 1, "need at least one multi-element per dimension"),
            ("flux", self.flux in ("lf", "hlle"), f"unknown flux '{self.flux}', expected lf or hlle"),
            ("rk_order", self.rk_order in SCHEMES, f"must be one of {sorted(SCHEMES)}"),
            ("manufactured_mode", self.manufactured_mode in MANUFACTURED_SUPPORTS, "must be 1d or 3d"),
            ("bc", self.bc in ("default", "periodic"), "must be 'default' or 'periodic'"),
            ("t_end", self.t_end >= 0.0, "end time must be nonnegative"),
            ("dim", self.dim in (1, 2), "spatial dimension must be 1 or 2"),
            ("nx", self.nx >= 1, "need at least one cell"),
            ("ny", self.ny >= 1 and (self.dim == 2 or self.ny == 1), "1D scenarios need ny = 1"),
            ("cfl", 0.0 < self.cfl <= 1.0, "CFL number must lie in (0, 1]"),
            ("stoch_points", self.stoch_points >= 0, "must be >= 0"),
            ("output_points", self.output_points >= 1, "must be >= 1"),
            ("mc_samples", self.mc_samples >= 1, "must be >= 1"),
        )
        for key, ok, msg in checks:
            if not ok:
                raise ConfigError(f"{key}: {msg}")
        return self

    def replace(self, **kw) -> "Scenario":
        return dataclasses.replace(self, **kw).validate()

    def random_supports(self):
        if self.ic == "manufactured":
            return MANUFACTURED_SUPPORTS[self.manufactured_mode]
        if self.ic == "sod":
            return ((-1.0, 1.0),)
        if self.ic == "dmr":
            return ((28.0, 32.0),)
        return ((0.0, 1.0),)


def sod_scenario(**kw) -> Scenario:
    base = dict(name="sod", ic="sod", t_end=0.2, nx=500, K_D=3, K_G=1, n_elements=2, flux="lf",
                stoch_points=20)
    base.update(kw)
    return Scenario(**base).validate()


def manufactured_scenario(**kw) -> Scenario:
    base = dict(name="smooth1d", ic="manufactured", t_end=1.0, nx=10, K_D=1, K_G=10, n_elements=1,
                flux="lf", tvbm=False, stoch_points=20)
    base.update(kw)
    return Scenario(**base).validate()


def dmr_scenario(**kw) -> Scenario:
    base = dict(name="dmr", ic="dmr", t_end=0.2, dim=2, nx=60, ny=16, x1=4.0, y1=1.0, K_D=2, K_G=2,
                n_elements=2, flux="hlle", ic_refine=4)
    base.update(kw)
    return Scenario(**base).validate()


PRESETS = {"sod": sod_scenario, "smooth1d": manufactured_scenario, "dmr": dmr_scenario}


# ---- problem assembly ----------------------------------------------------

@dataclass
class Problem:
    scenario: Scenario
    space: DiscreteSpace
    gas: GasModel
    ic: object
    bc: BoundaryConditions
    source: Optional[object]
    exact: Optional[object] = None  # exact solution (t, x, y, xi) if known
    xi_fixed: Optional[tuple] = None

    def rhs(self) -> RhsOperator:
        return RhsOperator(self.space, self.bc, self.scenario.flux, self.gas, self.source)

    def solver(self, **kw) -> Solver:
        sc = self.scenario
        opts = dict(scheme=SCHEMES[sc.rk_order], cfl=CflConfig(sc.cfl),
                    tvbm=TvbmConfig(sc.tvb_M, sc.tvbm), hyperbolicity_limiter=sc.hyperbolic_limiter,
                    gas=self.gas, check=sc.check_invariants, progress_every=sc.progress_every,
                    max_steps=sc.max_steps)
        opts.update(kw)
        return Solver(self.rhs(), **opts)

    def initial_field(self) -> SGDGField:
        return project_initial(self.space, self.ic, 0.0, refine=self.scenario.ic_refine,
                               refine_xi=self.scenario.ic_refine)

    def solve(self, **kw):
        return self.solver(**kw).run(self.initial_field(), self.scenario.t_end)


def build_problem(scenario: Scenario, xi_fixed=None, **overrides) -> Problem:
    """Assemble mesh, spaces, data and boundary conditions.

    With ``xi_fixed`` the problem is the deterministic one at that random
    point (one element, K_G = 0, one stochastic node), as used by collocation.
    """
    sc = scenario.replace(**overrides) if overrides else scenario.validate()
    gas = GasModel(sc.gamma)
    mesh = Mesh(sc.dim, sc.nx, sc.x0, sc.x1, sc.ny if sc.dim == 2 else 1, sc.y0, sc.y1)
    supports = sc.random_supports()
    source = None
    exact = None
    if sc.ic == "manufactured":
        mode = sc.manufactured_mode

        def ic(t, x, y, xi):
            return ic_manufactured(t, x, y, xi, mode)

        if sc.source:
            def source(t, x, y, xi):
                return source_manufactured(t, x, y, xi, mode, gas)
        exact = ic
        bc = BoundaryConditions.all_periodic(mesh)
    elif sc.ic == "sod":
        ic = SodIC(width=sc.sod_width, gas=gas)
        exact = ic
        if sc.bc == "periodic":
            bc = BoundaryConditions.all_periodic(mesh)
        else:
            bc = BoundaryConditions({"left": SideBC(BCKind.DIRICHLET, ic), "right": SideBC(BCKind.DIRICHLET, ic)})
    elif sc.ic == "dmr":
        ic = DmrIC(sc.canonical_dmr, gas=gas)
        if sc.bc == "periodic":
            raise ConfigError("the DMR problem does not support periodic boundaries")
        bc = BoundaryConditions({
            "left": SideBC(BCKind.DIRICHLET, ic), "right": SideBC(BCKind.OUTFLOW),
            "bottom": SideBC(BCKind.REFLECTIVE), "top": SideBC(BCKind.DIRICHLET, ic)})
    else:
        state = [float(v) for v in sc.constant_state.split(",")]
        if len(state) != 4:
            raise ConfigError("constant_state needs four comma-separated values")
        ic = constant_state(state)
        exact = ic
        bc = BoundaryConditions.all_periodic(mesh) if sc.bc == "periodic" else BoundaryConditions(
            {s: SideBC(BCKind.OUTFLOW) for s in mesh.sides()})

    if xi_fixed is not None:
        xi_fixed = tuple(float(v) for v in np.atleast_1d(xi_fixed))
        if isinstance(ic, SodIC):
            ic = SodIC(float(ic.interface(xi_fixed[0])), 0.0, ic.left, ic.right, gas)
            frozen_ic = ic
        else:
            frozen_ic = freeze_xi(ic, xi_fixed)
        source = freeze_xi(source, xi_fixed)
        exact = freeze_xi(exact, xi_fixed) if exact is not None else None
        sides = {}
        for s, b in bc.sides.items():
            sides[s] = SideBC(b.kind, freeze_xi(b.func, xi_fixed)) if b.func is not None else b
        bc = BoundaryConditions(sides)
        space = DiscreteSpace(mesh, RandomSpace(((0.0, 1.0),)), sc.K_D, 0, 1, stoch_points=1,
                              face_points=sc.face_points or None, vol_points=sc.vol_points or None)
        return Problem(sc, space, gas, frozen_ic, bc, source, exact, xi_fixed)

    space = DiscreteSpace(mesh, RandomSpace(supports), sc.K_D, sc.K_G, sc.n_elements,
                          stoch_points=sc.stoch_points or None, face_points=sc.face_points or None,
                          vol_points=sc.vol_points or None)
    return Problem(sc, space, gas, ic, bc, source, exact)
