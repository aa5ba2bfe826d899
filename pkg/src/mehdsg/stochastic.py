"""Random space discretization: multi-element grids, orthonormal bases, statistics."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .quadrature import QuadratureRule, gauss_legendre_rule, gauss_lobatto_rule, tensor_rule


@dataclass(frozen=True)
class RandomSpace:
    """Independent uniform random variables with supports ``[a_n, b_n]``."""

    supports: tuple

    def __post_init__(self):
        sup = tuple((float(a), float(b)) for a, b in self.supports)
        if len(sup) < 1:
            raise ValueError("random space needs at least one dimension")
        for a, b in sup:
            if not a < b:
                raise ValueError(f"empty support [{a}, {b}]")
        object.__setattr__(self, "supports", sup)

    @property
    def dims(self) -> int:
        return len(self.supports)

    def density(self, xi) -> np.ndarray:
        xi = np.atleast_2d(xi)
        out = np.ones(xi.shape[0])
        for n, (a, b) in enumerate(self.supports):
            inside = (xi[:, n] >= a) & (xi[:, n] <= b)
            out *= np.where(inside, 1.0 / (b - a), 0.0)
        return out


class PolynomialFamily:
    """Orthonormal polynomials on a reference interval via a three-term recurrence.

    ``b_{k+1} p_{k+1}(t) = (t - a_k) p_k(t) - b_k p_{k-1}(t)`` with ``p_0 = 1``.
    Subclasses provide the recurrence coefficients and the map from [0, 1]
    to the family's natural variable ``t``.
    """

    name = "abstract"

    def recurrence(self, k: int) -> tuple[float, float]:
        raise NotImplementedError

    def to_t(self, s):
        return s

    def evaluate(self, s, K: int) -> np.ndarray:
        """Values of p_0..p_K at reference points ``s`` in [0, 1]; shape (len(s), K+1)."""
        t = self.to_t(np.asarray(s, dtype=float))
        P = np.empty(t.shape + (K + 1,))
        P[..., 0] = 1.0
        if K == 0:
            return P
        a0, _ = self.recurrence(0)
        _, b1 = self.recurrence(1)
        P[..., 1] = (t - a0) / b1
        for k in range(1, K):
            ak, bk = self.recurrence(k)
            _, bk1 = self.recurrence(k + 1)
            P[..., k + 1] = ((t - ak) * P[..., k] - bk * P[..., k - 1]) / bk1
        return P


class UniformLegendre(PolynomialFamily):
    """Legendre polynomials orthonormal w.r.t. the uniform density on [0, 1]."""

    name = "legendre"

    def recurrence(self, k):
        if k == 0:
            return 0.0, 0.0
        return 0.0, k / np.sqrt(4.0 * k * k - 1.0)

    def to_t(self, s):
        return 2.0 * s - 1.0


LEGENDRE = UniformLegendre()


@dataclass(frozen=True)
class MultiIndexSet:
    kind: str
    order: int
    indices: np.ndarray  # (n_indices, N) int

    def __len__(self):
        return len(self.indices)

    @property
    def dims(self):
        return self.indices.shape[1]


def complete_index_set(N: int, K: int) -> MultiIndexSet:
    """All multi-indices with total degree at most K, lexicographically sorted."""
    if N < 1 or K < 0:
        raise ValueError("need N >= 1 and K >= 0")
    idx = [k for k in itertools.product(range(K + 1), repeat=N) if sum(k) <= K]
    idx.sort()
    arr = np.array(idx, dtype=int).reshape(-1, N)
    assert len(arr) == comb(N + K, N)
    return MultiIndexSet("complete", K, arr)


def tensor_index_set(N: int, Q: int) -> MultiIndexSet:
    if N < 1 or Q < 0:
        raise ValueError("need N >= 1 and Q >= 0")
    arr = np.array(list(itertools.product(range(Q + 1), repeat=N)), dtype=int).reshape(-1, N)
    return MultiIndexSet("tensor", Q, arr)


@dataclass(frozen=True)
class MultiElementGrid:
    """Uniform tensor partition of the random support into elements."""

    space: RandomSpace
    n_per_dim: tuple
    breakpoints: tuple  # per-dim arrays of N_Γ + 1 points
    elements: np.ndarray  # (L, N) per-dim element indices, last dim fastest
    bounds: np.ndarray  # (L, N, 2)
    probabilities: np.ndarray  # (L,)

    @property
    def n_elements(self) -> int:
        return len(self.probabilities)

    @property
    def dims(self) -> int:
        return self.space.dims

    def volumes(self) -> np.ndarray:
        return np.prod(self.bounds[:, :, 1] - self.bounds[:, :, 0], axis=1)

    def to_physical(self, l: int, s) -> np.ndarray:
        """Map reference coordinates ``s`` in [0,1]^N to element ``l``."""
        lo, hi = self.bounds[l, :, 0], self.bounds[l, :, 1]
        return lo + (hi - lo) * np.asarray(s)

    def physical_nodes(self, s) -> np.ndarray:
        """Reference nodes (R, N) mapped into every element: (L, R, N)."""
        lo = self.bounds[:, None, :, 0]
        hi = self.bounds[:, None, :, 1]
        return lo + (hi - lo) * np.asarray(s)[None]

    def conditional_density(self, l: int) -> float:
        return float(1.0 / np.prod(self.bounds[l, :, 1] - self.bounds[l, :, 0]))


def build_multi_element_grid(space: RandomSpace, n_elements_per_dim) -> MultiElementGrid:
    if np.isscalar(n_elements_per_dim):
        n_elements_per_dim = (int(n_elements_per_dim),) * space.dims
    n_per = tuple(int(n) for n in n_elements_per_dim)
    if len(n_per) != space.dims or min(n_per) < 1:
        raise ValueError("need one positive element count per random dimension")
    bps = tuple(np.linspace(a, b, n + 1) for (a, b), n in zip(space.supports, n_per))
    elems = np.array(list(itertools.product(*[range(n) for n in n_per])), dtype=int)
    bounds = np.empty((len(elems), space.dims, 2))
    probs = np.ones(len(elems))
    for d in range(space.dims):
        a, b = space.supports[d]
        bounds[:, d, 0] = bps[d][elems[:, d]]
        bounds[:, d, 1] = bps[d][elems[:, d] + 1]
        probs *= (bounds[:, d, 1] - bounds[:, d, 0]) / (b - a)
    return MultiElementGrid(space, n_per, bps, elems, bounds, probs)


@dataclass(frozen=True)
class OrthonormalBasis:
    """Products of per-dim orthonormal polynomials on one random element."""

    bounds: np.ndarray  # (N, 2)
    index_set: MultiIndexSet
    family: PolynomialFamily = field(default=LEGENDRE)

    @property
    def size(self) -> int:
        return len(self.index_set)

    def evaluate_reference(self, s) -> np.ndarray:
        """Basis values at reference points s (R, N) in [0,1]^N: shape (R, N_K)."""
        s = np.atleast_2d(np.asarray(s, dtype=float))
        K = self.index_set.order
        idx = self.index_set.indices
        out = np.ones((s.shape[0], len(idx)))
        for d in range(s.shape[1]):
            P = self.family.evaluate(s[:, d], K)
            out *= P[:, idx[:, d]]
        return out

    def evaluate(self, xi) -> np.ndarray:
        """Basis values at physical points xi (R, N) inside the element."""
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        return self.evaluate_reference((xi - lo) / (hi - lo))


def orthonormal_basis_for(grid: MultiElementGrid, l: int, K: int, kind: str = "complete") -> OrthonormalBasis:
    iset = complete_index_set(grid.dims, K) if kind == "complete" else tensor_index_set(grid.dims, K)
    return OrthonormalBasis(grid.bounds[l].copy(), iset)


def default_stoch_points(K: int) -> int:
    return max(-(-(K + 1) // 2) + 1, K + 1)


def stochastic_rule(N: int, n_points: int, kind: str = "legendre"):
    """Tensor rule on the reference element [0,1]^N: (nodes (R, N), weights (R,))."""
    r = gauss_legendre_rule(n_points) if kind == "legendre" else gauss_lobatto_rule(n_points)
    return tensor_rule([r] * N)


def me_mean(zero_moments, grid: MultiElementGrid) -> np.ndarray:
    """Probability-weighted sum of per-element zeroth moments (element axis first)."""
    u0 = np.asarray(zero_moments, dtype=float)
    if u0.shape[0] != grid.n_elements:
        raise ValueError(f"expected moments for {grid.n_elements} elements, got {u0.shape[0]}")
    return np.tensordot(grid.probabilities, u0, axes=(0, 0))


def me_variance(moments, grid: MultiElementGrid, global_mean=None) -> np.ndarray:
    """Variance from per-element orthonormal moments of shape (L, N_K, ...)."""
    u = np.asarray(moments, dtype=float)
    if u.shape[0] != grid.n_elements:
        raise ValueError(f"expected moments for {grid.n_elements} elements, got {u.shape[0]}")
    if global_mean is None:
        global_mean = me_mean(u[:, 0], grid)
    local = np.sum(u[:, 1:] ** 2, axis=1) + (u[:, 0] - global_mean) ** 2
    var = np.tensordot(grid.probabilities, local, axes=(0, 0))
    return np.maximum(var, 0.0)


def combine_statistics(local_means, local_vars, probabilities):
    """Recombine per-element mean/variance (element axis first) into global ones.

    Shared by the intrusive scheme and the collocation reference.
    """
    m = np.asarray(local_means, dtype=float)
    v = np.asarray(local_vars, dtype=float)
    P = np.asarray(probabilities, dtype=float)
    mean = np.tensordot(P, m, axes=(0, 0))
    var = np.tensordot(P, v + (m - mean) ** 2, axes=(0, 0))
    return mean, np.maximum(var, 0.0)
