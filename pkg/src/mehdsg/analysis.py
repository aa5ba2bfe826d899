"""Statistics on output grids, reference statistics, error norms and eoc tables."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .field import SGDGField
from .quadrature import gauss_legendre_rule
from .stochastic import combine_statistics, me_mean, me_variance

COMPONENTS = ("rho", "m1", "m2", "E")


@dataclass
class OutputGrid:
    """Cellwise tensor Gauss points with weights integrating over the domain."""

    x: np.ndarray
    y: Optional[np.ndarray]
    weights: np.ndarray
    xhat: np.ndarray  # reference points in a cell (P, dim)
    n_cells: int

    @property
    def n_points(self):
        return len(self.weights)


def output_grid(mesh, n_points: int = 15) -> OutputGrid:
    g = gauss_legendre_rule(n_points)
    ox, oy = mesh.cell_origins()
    if mesh.dim == 1:
        xhat = g.nodes[:, None]
        w = g.weights
    else:
        X, Y = np.meshgrid(g.nodes, g.nodes, indexing="ij")
        xhat = np.stack([X.ravel(), Y.ravel()], -1)
        w = np.outer(g.weights, g.weights).ravel()
    x = (ox[:, None] + mesh.dx * xhat[None, :, 0]).ravel()
    y = (oy[:, None] + mesh.dy * xhat[None, :, 1]).ravel() if mesh.dim == 2 else None
    weights = np.tile(w * mesh.cell_volume, mesh.n_cells)
    return OutputGrid(x, y, weights, xhat, mesh.n_cells)


@dataclass
class StatisticsField:
    """Mean and variance 4-vectors per output point."""

    grid: OutputGrid
    mean: np.ndarray  # (P, 4)
    var: np.ndarray  # (P, 4)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.var = np.maximum(self.var, 0.0)


def field_statistics(f: SGDGField, grid: Optional[OutputGrid] = None, n_points: int = 15) -> StatisticsField:
    """Mean and variance of a ME-SG field at the output grid points."""
    sp = f.space
    grid = grid if grid is not None else output_grid(sp.mesh, n_points)
    S = sp.spatial_basis(grid.xhat)  # (P, M)
    # per-element stochastic moments at every output point: (L, C*P, NK, 4)
    mom = np.einsum("pm,clmkz->lcpkz", S, f.coeffs, optimize=True)
    L = mom.shape[0]
    mom = np.moveaxis(mom.reshape(L, -1, sp.NK, 4), 2, 1)  # (L, NK, points, 4)
    mean = me_mean(mom[:, 0], sp.grid)
    var = me_variance(mom, sp.grid, mean)
    return StatisticsField(grid, mean, var, {"method": "hdsg"})


def function_statistics(func, t, grid: OutputGrid, me_grid, n_xi: int = 20) -> StatisticsField:
    """Statistics of an exact solution ``func(t, x, y, xi)`` by Gauss quadrature in every element."""
    g = gauss_legendre_rule(n_xi)
    N = me_grid.dims
    s = np.stack([m.ravel() for m in np.meshgrid(*([g.nodes] * N), indexing="ij")], -1)
    w = np.prod(np.stack([m.ravel() for m in np.meshgrid(*([g.weights] * N), indexing="ij")], -1), -1)
    xi = me_grid.physical_nodes(s)  # (L, R, N)
    x = grid.x[:, None]
    y = grid.y[:, None] if grid.y is not None else np.zeros_like(x)
    means, vars_ = [], []
    for l in range(me_grid.n_elements):
        vals = np.asarray(func(t, x, y, tuple(xi[l][None, :, n] for n in range(N))), dtype=float)
        vals = np.broadcast_to(vals, (grid.n_points, len(w), 4))
        m = np.einsum("r,prz->pz", w, vals)
        v = np.einsum("r,prz->pz", w, (vals - m[:, None]) ** 2)
        means.append(m)
        vars_.append(v)
    mean, var = combine_statistics(np.array(means), np.array(vars_), me_grid.probabilities)
    return StatisticsField(grid, mean, var, {"method": "exact"})


def midpoint_statistics(func, t, grid: OutputGrid, support, n_xi: int = 10_000, chunk: int = 200) -> StatisticsField:
    """Statistics over one uniform random variable by an n-point midpoint rule (chunked)."""
    a, b = support
    xi_all = a + (b - a) * (np.arange(n_xi) + 0.5) / n_xi
    x = grid.x[:, None]
    y = grid.y[:, None] if grid.y is not None else np.zeros_like(x)
    # shifted accumulation around the first sample keeps the variance accurate
    shift = None
    s1 = np.zeros((grid.n_points, 4))
    s2 = np.zeros((grid.n_points, 4))
    for k in range(0, n_xi, chunk):
        xi = xi_all[k:k + chunk][None, :]
        vals = np.asarray(func(t, x, y, (xi,)), dtype=float)
        vals = np.broadcast_to(vals, (grid.n_points, xi.shape[1], 4))
        if shift is None:
            shift = vals[:, 0].copy()
        d = vals - shift[:, None]
        s1 += d.sum(axis=1)
        s2 += (d * d).sum(axis=1)
    m = s1 / n_xi
    var = s2 / n_xi - m * m
    return StatisticsField(grid, shift + m, var, {"method": "midpoint", "n": n_xi})


def error_norms(stats: StatisticsField, reference, norm: str = "L1", quantity: str = "mean",
                component: int = 0, t: float = 0.0) -> float:
    """||stat(u_h) - stat(u_ref)|| over the domain with the output-grid quadrature.

    ``reference`` is a StatisticsField on the same grid or a callable of
    (t, x, y) returning (mean, var) arrays of shape (P, 4).
    """
    g = stats.grid
    if isinstance(reference, StatisticsField):
        if reference.grid.n_points != g.n_points or not np.allclose(reference.grid.x, g.x):
            raise ValueError("reference statistics live on a different output grid")
        ref = reference.mean if quantity == "mean" else reference.var
    else:
        rm, rv = reference(t, g.x, g.y)
        ref = rm if quantity == "mean" else rv
    val = stats.mean if quantity == "mean" else stats.var
    comp = slice(None) if component is None else component
    d = np.abs(val[:, comp] - ref[:, comp])
    if norm.upper() == "L1":
        e = np.tensordot(g.weights, d, axes=(0, 0))
    elif norm.upper() == "L2":
        e = np.sqrt(np.tensordot(g.weights, d * d, axes=(0, 0)))
    else:
        raise ValueError(f"unknown norm '{norm}'")
    return float(e) if np.ndim(e) == 0 else e


def compute_eoc(errors, dofs):
    """eoc_r = log(e_r / e_{r+1}) / log(dof_{r+1} / dof_r)."""
    e = np.asarray(errors, dtype=float)
    n = np.asarray(dofs, dtype=float)
    if len(e) != len(n):
        raise ValueError("errors and dofs differ in length")
    if np.any(e <= 0.0) or np.any(n <= 0.0):
        raise ValueError("errors and dofs must be positive")
    if np.any(np.diff(n) <= 0.0):
        raise ValueError("dofs must increase strictly")
    return list(np.log(e[:-1] / e[1:]) / np.log(n[1:] / n[:-1]))


# ---- CSV output ------------------------------------------------------------

def _coord_columns(grid):
    return (["x"], [grid.x]) if grid.y is None else (["x", "y"], [grid.x, grid.y])


def write_statistics(stats: StatisticsField, out_dir) -> dict:
    """Write mean.csv, variance.csv and statistics.csv (both) into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names, cols = _coord_columns(stats.grid)
    mean_h = [f"mean_{c}" for c in COMPONENTS]
    var_h = [f"var_{c}" for c in COMPONENTS]
    coords = np.stack(cols, axis=-1)
    files = {}
    for fname, header, data in (
            ("mean.csv", names + mean_h, np.hstack([coords, stats.mean])),
            ("variance.csv", names + var_h, np.hstack([coords, stats.var])),
            ("statistics.csv", names + mean_h + var_h, np.hstack([coords, stats.mean, stats.var]))):
        p = out / fname
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in data:
                w.writerow([repr(float(v)) for v in row])
        files[fname] = p
    return files


def write_limiter_csv(rows, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "stage", "fraction_limited", "max_theta"])
        for step, stage, frac, th in rows:
            w.writerow([step, stage, repr(float(frac)), repr(float(th))])
    return path


def write_table(rows, header, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow(r)
    return path


def read_statistics(path):
    """Read a mean/variance/statistics CSV back into (header, array)."""
    with open(path) as fh:
        r = csv.reader(fh)
        header = next(r)
        data = np.array([[float(v) for v in row] for row in r])
    return header, data
