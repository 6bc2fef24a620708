"""Orthonormal polynomial chaos basis over independent uniform inputs on [-1, 1]."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np


def legendre_orthonormal(n: int, y: np.ndarray) -> np.ndarray:
    """Values of the first ``n + 1`` Legendre polynomials normalized against the
    uniform probability density 1/2 on [-1, 1].

    Returns an array of shape ``(n + 1,) + y.shape``.
    """
    y = np.asarray(y, dtype=float)
    vals = np.empty((n + 1,) + y.shape)
    vals[0] = 1.0
    if n > 0:
        vals[1] = y
    for i in range(1, n):
        vals[i + 1] = ((2 * i + 1) * y * vals[i] - i * vals[i - 1]) / (i + 1)
    scale = np.sqrt(2 * np.arange(n + 1) + 1.0)
    return vals * scale.reshape((-1,) + (1,) * y.ndim)


@dataclass(frozen=True)
class MultiIndexSet:
    dims: int
    total_degree: int
    indices: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.indices)

    def as_array(self) -> np.ndarray:
        return np.array(self.indices, dtype=int).reshape(self.size, self.dims)


def build_index_set(dims: int, total_degree: int) -> MultiIndexSet:
    """Total-degree index set, graded by degree then lexicographic (descending
    in the first coordinate), so the first entry is the all-zero index."""
    if dims < 1:
        raise ValueError(f"number of random dimensions must be >= 1, got {dims}")
    if total_degree < 0:
        raise ValueError(f"total degree must be >= 0, got {total_degree}")
    indices = []
    for deg in range(total_degree + 1):
        level = [
            alpha
            for alpha in itertools.product(range(deg + 1), repeat=dims)
            if sum(alpha) == deg
        ]
        level.sort(reverse=True)
        indices.extend(level)
    out = MultiIndexSet(dims, total_degree, tuple(indices))
    assert out.size == comb(dims + total_degree, dims)
    return out


def gauss_rule(n: int, dims: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Legendre rule weighted by the uniform density on [-1, 1]^dims.

    Returns ``(nodes, weights)`` with ``nodes`` of shape ``(n**dims, dims)``;
    the weights sum to one.
    """
    if n < 1:
        raise ValueError(f"Gauss rule needs at least one node, got {n}")
    if dims < 1:
        raise ValueError(f"dims must be >= 1, got {dims}")
    x, w = np.polynomial.legendre.leggauss(n)
    w = w / 2.0
    grids = np.meshgrid(*([x] * dims), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    wgrids = np.meshgrid(*([w] * dims), indexing="ij")
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return nodes, weights


@dataclass(frozen=True)
class GpcBasis:
    """Orthonormal product basis Phi_m(y) = prod_i phi_{alpha_i}(y_i).

    Modes are numbered from 0 here; mode 0 is the constant (mean) mode.
    """

    index_set: MultiIndexSet
    quad_nodes_per_dim: int
    family: str = "legendre"
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)
    values: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.family != "legendre":
            raise ValueError(f"unsupported polynomial family {self.family!r}")
        if self.quad_nodes_per_dim < self.index_set.total_degree + 1:
            raise ValueError("y-quadrature needs at least P+1 nodes per dimension")
        nodes, weights = gauss_rule(self.quad_nodes_per_dim, self.index_set.dims)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "values", self.evaluate(nodes))
        for arr in (self.nodes, self.weights, self.values):
            arr.setflags(write=False)

    @property
    def dims(self) -> int:
        return self.index_set.dims

    @property
    def size(self) -> int:
        return self.index_set.size

    def evaluate(self, y: np.ndarray) -> np.ndarray:
        """All basis functions at points ``y`` of shape ``(..., dims)``.

        Returns shape ``(M, ...)``.
        """
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.dims:
            raise ValueError(f"expected points with {self.dims} coordinates")
        alpha = self.index_set.as_array()
        P = self.index_set.total_degree
        out = np.ones((self.size,) + y.shape[:-1])
        for i in range(self.dims):
            uni = legendre_orthonormal(P, y[..., i])
            out *= uni[alpha[:, i]]
        return out

    def project(self, samples: np.ndarray) -> np.ndarray:
        """gPC coefficients of a function sampled at the quadrature nodes.

        ``samples`` has the node axis last; returns shape ``samples.shape[:-1] + (M,)``.
        """
        return np.einsum("...q,q,mq->...m", samples, self.weights, self.values)


def eval_basis(basis: GpcBasis, m: int, y) -> float:
    """Phi_m(y) for a single mode (numbered from 0)."""
    if not 0 <= m < basis.size:
        raise IndexError(f"mode {m} out of range for basis of size {basis.size}")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    return float(basis.evaluate(y)[m])


def make_basis(dims: int, total_degree: int, quad_nodes: int | None = None) -> GpcBasis:
    """Basis with the default y-quadrature of P+5 nodes per dimension."""
    idx = build_index_set(dims, total_degree)
    n = total_degree + 5 if quad_nodes is None else quad_nodes
    return GpcBasis(idx, n)
