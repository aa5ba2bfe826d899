"""Non-intrusive references: tensor-grid stochastic collocation and Monte Carlo for Sod."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analysis import OutputGrid, StatisticsField, field_statistics, midpoint_statistics, output_grid
from .stochastic import RandomSpace, build_multi_element_grid, combine_statistics, stochastic_rule


class CollocationError(RuntimeError):
    """A deterministic node run failed; ``node`` names the element and xi."""

    def __init__(self, message, node):
        super().__init__(message)
        self.node = node


@dataclass
class CollocationPlan:
    """Tensor Gauss-Legendre nodes on every multi-element (K_G+1 per dim)."""

    nodes: np.ndarray  # (L, R, N) physical xi
    weights: np.ndarray  # (R,) reference weights, sum 1
    probabilities: np.ndarray  # (L,)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0] * self.nodes.shape[1]


def collocation_plan(supports, K_G: int, n_elements: int = 1) -> CollocationPlan:
    space = RandomSpace(tuple(tuple(s) for s in supports))
    grid = build_multi_element_grid(space, n_elements)
    s, w = stochastic_rule(space.dims, K_G + 1)
    return CollocationPlan(grid.physical_nodes(s), w, grid.probabilities)


def _node_values(scenario, xi, grid: OutputGrid, build_problem):
    prob = build_problem(scenario, xi_fixed=xi)
    res = prob.solve()
    return field_statistics(res.field, grid).mean


def stochastic_collocation_run(scenario, plan: Optional[CollocationPlan] = None, threads: int = 1,
                               grid: Optional[OutputGrid] = None) -> StatisticsField:
    """Run the deterministic DG solver at every node and recombine mean/variance."""
    from .scenarios import build_problem

    if plan is None:
        plan = collocation_plan(scenario.random_supports(), scenario.K_G, scenario.n_elements)
    if grid is None:
        grid = output_grid(build_problem(scenario, xi_fixed=plan.nodes[0, 0]).space.mesh, scenario.output_points)
    L, R, _ = plan.nodes.shape
    jobs = [(l, r) for l in range(L) for r in range(R)]

    def work(job):
        l, r = job
        xi = plan.nodes[l, r]
        try:
            return _node_values(scenario, xi, grid, build_problem)
        except Exception as exc:  # name the failing node
            raise CollocationError(f"collocation node {r} of element {l} (xi = {tuple(xi)}) failed: {exc}",
                                   (l, tuple(float(v) for v in xi))) from exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            vals = list(ex.map(work, jobs))
    else:
        vals = [work(j) for j in jobs]
    # fixed reduction order: (element, node)
    U = np.array(vals).reshape(L, R, grid.n_points, 4)
    w = plan.weights
    means = np.einsum("r,lrpz->lpz", w, U)
    vars_ = np.einsum("r,lrpz->lpz", w, (U - means[:, None]) ** 2)
    mean, var = combine_statistics(means, vars_, plan.probabilities)
    return StatisticsField(grid, mean, var, {"method": "sc", "nodes": plan.n_nodes})


# ---- Monte Carlo over the exact Riemann solver -----------------------------

@dataclass(frozen=True)
class McPlan:
    n_samples: int = 200_000
    seed: int = 0
    support: tuple = (-1.0, 1.0)

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("Monte Carlo needs at least one sample")

    def samples(self) -> np.ndarray:
        a, b = self.support
        return np.random.default_rng(self.seed).uniform(a, b, self.n_samples)


def monte_carlo_sod(ic, plan: McPlan, grid: OutputGrid, t: float, chunk: int = 500):
    """Streaming MC statistics of the exact solution. Returns (StatisticsField, standard error (P, 4))."""
    xi_all = plan.samples()
    x = grid.x[:, None]
    y = np.zeros_like(x)
    shift = None
    s1 = np.zeros((grid.n_points, 4))
    s2 = np.zeros((grid.n_points, 4))
    n = len(xi_all)
    for k in range(0, n, chunk):
        xi = xi_all[k:k + chunk][None, :]
        vals = np.asarray(ic.exact(t, x, y, (xi,)) if t > 0.0 else ic(t, x, y, (xi,)), dtype=float)
        if shift is None:
            shift = vals[:, 0].copy()
        d = vals - shift[:, None]
        s1 += d.sum(axis=1)
        s2 += (d * d).sum(axis=1)
    m = s1 / n
    var = np.maximum(s2 / n - m * m, 0.0)
    stderr = np.sqrt(var * n / max(n - 1, 1) / n)
    return StatisticsField(grid, shift + m, var, {"method": "mc", "n": n, "seed": plan.seed}), stderr


def sod_exact_statistics(ic, grid: OutputGrid, t: float, n_points: int = 10_000) -> StatisticsField:
    """Deterministic reference: exact solver on an n-point midpoint rule over xi in [-1, 1]."""
    func = ic.exact if t > 0.0 else ic
    return midpoint_statistics(func, t, grid, (-1.0, 1.0), n_points)
