"""Uniform Cartesian meshes and boundary condition descriptions."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


class ConfigError(ValueError):
    """Invalid scenario or solver configuration."""


@dataclass(frozen=True)
class Mesh:
    """Uniform mesh on ``[x0, x1]`` (x ``[y0, y1]``); cells row-major ``c = i*ny + j``."""

    dim: int
    nx: int
    x0: float = 0.0
    x1: float = 1.0
    ny: int = 1
    y0: float = 0.0
    y1: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigError("mesh dimension must be 1 or 2")
        if self.nx < 1 or self.ny < 1 or not self.x1 > self.x0 or not self.y1 > self.y0:
            raise ConfigError("mesh needs positive cell counts and extents")
        if self.dim == 1 and self.ny != 1:
            raise ConfigError("1D mesh has ny = 1")

    @property
    def dx(self) -> float:
        return (self.x1 - self.x0) / self.nx

    @property
    def dy(self) -> float:
        return (self.y1 - self.y0) / self.ny if self.dim == 2 else 1.0

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def cell_volume(self) -> float:
        return self.dx * self.dy

    def cell_index(self, i, j=0):
        return i * self.ny + j

    def cell_origins(self):
        """Lower-left corners (x, y) of all cells, shape (n_cells,) each."""
        i = np.repeat(np.arange(self.nx), self.ny)
        j = np.tile(np.arange(self.ny), self.nx)
        return self.x0 + i * self.dx, self.y0 + j * self.dy

    def sides(self):
        return ("left", "right") if self.dim == 1 else ("left", "right", "bottom", "top")


class BCKind(enum.Enum):
    PERIODIC = "periodic"
    DIRICHLET = "dirichlet"
    REFLECTIVE = "reflective"
    OUTFLOW = "outflow"


@dataclass(frozen=True)
class SideBC:
    kind: BCKind
    # conserved state as a function of (t, x, y, xi) with broadcasting, returning (..., 4)
    func: Optional[Callable] = None


OPPOSITE = {"left": "right", "right": "left", "bottom": "top", "top": "bottom"}
NORMAL_AXIS = {"left": 0, "right": 0, "bottom": 1, "top": 1}


@dataclass(frozen=True)
class BoundaryConditions:
    sides: dict = field(default_factory=dict)

    def __getitem__(self, side) -> SideBC:
        return self.sides[side]

    def validate(self, mesh: Mesh):
        for s in mesh.sides():
            if s not in self.sides:
                raise ConfigError(f"missing boundary condition for side '{s}'")
            bc = self.sides[s]
            if bc.kind is BCKind.PERIODIC and self.sides.get(OPPOSITE[s], SideBC(BCKind.OUTFLOW)).kind is not BCKind.PERIODIC:
                raise ConfigError(f"periodic boundary on '{s}' is not paired with '{OPPOSITE[s]}'")
            if bc.kind is BCKind.DIRICHLET and bc.func is None:
                raise ConfigError(f"Dirichlet boundary on '{s}' needs a state function")
        return self

    def periodic(self, axis: int) -> bool:
        s = "left" if axis == 0 else "bottom"
        return self.sides[s].kind is BCKind.PERIODIC

    @staticmethod
    def all_periodic(mesh: Mesh) -> "BoundaryConditions":
        return BoundaryConditions({s: SideBC(BCKind.PERIODIC) for s in mesh.sides()})


def ghost_states(interior, side: str, bc: SideBC, t=0.0, x=None, y=None, xi=None):
    """Ghost traces for a non-periodic side.

    ``interior`` has the component axis last. For Dirichlet, ``x``, ``y``
    and ``xi`` are broadcastable coordinate arrays matching ``interior``'s
    leading shape.
    """
    if bc.kind is BCKind.OUTFLOW:
        return interior.copy()
    if bc.kind is BCKind.REFLECTIVE:
        g = interior.copy()
        g[..., 1 + NORMAL_AXIS[side]] *= -1.0
        return g
    if bc.kind is BCKind.DIRICHLET:
        val = np.asarray(bc.func(t, x, y, xi), dtype=float)
        return np.broadcast_to(val, interior.shape).copy()
    raise ConfigError("periodic sides have no ghost states")
