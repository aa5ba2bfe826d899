"""One-dimensional quadrature rules on the unit interval.

All rules are normalized so that the weights sum to one, i.e. they
approximate the mean value of a function over the interval.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and unit-sum weights on ``[lo, hi]`` (default ``[0, 1]``)."""

    kind: str
    nodes: np.ndarray
    weights: np.ndarray
    lo: float = 0.0
    hi: float = 1.0

    @property
    def n(self) -> int:
        return len(self.nodes)

    def mapped(self, lo: float, hi: float) -> "QuadratureRule":
        """Same rule on ``[lo, hi]``; weights stay normalized to sum 1."""
        x = lo + (hi - lo) * (self.nodes - self.lo) / (self.hi - self.lo)
        if self.kind == "lobatto":
            x[0], x[-1] = lo, hi
        return QuadratureRule(self.kind, x, self.weights.copy(), lo, hi)

    def mean(self, f) -> float:
        """Approximate mean of ``f`` over the interval."""
        return float(np.dot(self.weights, f(self.nodes)))

    def exactness_degree(self) -> int:
        return 2 * self.n - 1 if self.kind == "legendre" else 2 * self.n - 3


@lru_cache(maxsize=None)
def _legendre(n):
    x, w = npleg.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def _lobatto(n):
    # interior nodes are the roots of P'_{n-1}; Newton on the Chebyshev-Gauss-Lobatto guess
    N = n - 1
    x = -np.cos(np.pi * np.arange(n) / N)
    P = np.zeros((n, n))
    xold = 2.0
    for _ in range(100):
        xold = x.copy()
        P[:, 0] = 1.0
        P[:, 1] = x
        for k in range(2, n):
            P[:, k] = ((2 * k - 1) * x * P[:, k - 1] - (k - 1) * P[:, k - 2]) / k
        x = xold - (x * P[:, N] - P[:, N - 1]) / (n * P[:, N])
        if np.max(np.abs(x - xold)) < 1e-16:
            break
    x[0], x[-1] = -1.0, 1.0
    P[:, 0] = 1.0
    P[:, 1] = x
    for k in range(2, n):
        P[:, k] = ((2 * k - 1) * x * P[:, k - 1] - (k - 1) * P[:, k - 2]) / k
    w = 2.0 / (N * n * P[:, N] ** 2)
    # enforce symmetry exactly
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return 0.5 * (x + 1.0), 0.5 * w


def gauss_legendre_rule(n_points: int) -> QuadratureRule:
    """Gauss-Legendre rule with ``n_points`` interior nodes on [0, 1]."""
    if n_points < 1:
        raise ValueError("Gauss-Legendre rule needs at least one point")
    x, w = _legendre(int(n_points))
    return QuadratureRule("legendre", x.copy(), w.copy())


def gauss_lobatto_rule(n_points: int) -> QuadratureRule:
    """Gauss-Lobatto rule including both endpoints of [0, 1]."""
    if n_points < 2:
        raise ValueError("Gauss-Lobatto rule needs at least two points")
    if n_points == 2:
        return QuadratureRule("lobatto", np.array([0.0, 1.0]), np.array([0.5, 0.5]))
    x, w = _lobatto(int(n_points))
    return QuadratureRule("lobatto", x.copy(), w.copy())


def lobatto_points_for_order(K_D: int) -> int:
    """Number of Lobatto points Q_D + 1 with Q_D = ceil((K_D + 1) / 2)."""
    return -(-(K_D + 1) // 2) + 1


def tensor_rule(rules):
    """Tensor product of 1D rules: returns (points (n, d), weights (n,)).

    The last rule varies fastest.
    """
    grids = np.meshgrid(*[r.nodes for r in rules], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    wgrid = np.meshgrid(*[r.weights for r in rules], indexing="ij")
    w = np.prod(np.stack([g.ravel() for g in wgrid], axis=-1), axis=-1)
    return pts, w
