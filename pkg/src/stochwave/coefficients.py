"""Random wave-speed coefficients, their stochastic Galerkin matrices, and the
two manufactured-solution presets.

Evaluation convention: physical points ``x, z`` are arrays of a common shape
``S``, random points ``y`` have shape ``(Q, N)`` and results have shape
``S + (Q,)``. ``region`` is an integer array broadcastable to ``S``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .gpc import GpcBasis
from .mesh import LocalBasis, Mesh2D


def _y(y: np.ndarray, i: int) -> np.ndarray:
    return np.asarray(y, dtype=float)[:, i]


def _grid(x, z, y):
    x = np.asarray(x, dtype=float)[..., None]
    z = np.asarray(z, dtype=float)[..., None]
    return x, z


@dataclass(frozen=True)
class CoefficientModel:
    """a(x, y) given through a^2 and its spatial gradient.

    ``x_independent`` declares that a is constant in x inside every region,
    letting the assembly store one matrix per cell.
    """

    name: str
    a_squared: Callable
    grad_a_squared: Callable
    bounds: tuple[float, float]
    interfaces_x: tuple[float, ...] = ()
    interfaces_z: tuple[float, ...] = ()
    region_fn: Callable | None = None
    x_independent: bool = False

    def region_of(self, x, z) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.region_fn is None:
            return np.zeros(np.broadcast(x, np.asarray(z)).shape, dtype=int)
        return np.asarray(self.region_fn(x, np.asarray(z, dtype=float)), dtype=int)

    def on_interface(self, x: float, z: float) -> bool:
        return any(np.isclose(x, xi) for xi in self.interfaces_x) or \
            any(np.isclose(z, zi) for zi in self.interfaces_z)

    def region_at(self, x: float, z: float, side: str | None = None) -> int:
        """Region owning a point; on an interface ``side`` picks the one-sided limit."""
        if self.on_interface(x, z):
            if side not in ("-", "+"):
                raise ValueError(f"point ({x}, {z}) is on a coefficient interface; a side is required")
            eps = 1e-9 if side == "+" else -1e-9
            dx = eps if any(np.isclose(x, xi) for xi in self.interfaces_x) else 0.0
            dz = eps if any(np.isclose(z, zi) for zi in self.interfaces_z) else 0.0
            return int(self.region_of(x + dx, z + dz))
        return int(self.region_of(x, z))

    def a(self, x, z, y, region=0) -> np.ndarray:
        a2 = self.a_squared(x, z, y, region)
        if np.any(a2 <= 0):
            raise ValueError(f"coefficient {self.name} is not positive")
        return np.sqrt(a2)

    def grad_a(self, x, z, y, region=0) -> tuple[np.ndarray, np.ndarray]:
        a = self.a(x, z, y, region)
        gx, gz = self.grad_a_squared(x, z, y, region)
        return gx / (2 * a), gz / (2 * a)


def perturbed(model: CoefficientModel, eps: float) -> CoefficientModel:
    """The model with a^2 shifted by the constant ``eps``."""
    base = model.a_squared
    lo, hi = model.bounds
    if lo ** 2 + eps <= 0:
        raise ValueError("perturbation changes the sign of the coefficient")
    return replace(
        model,
        name=f"{model.name}+{eps:g}",
        a_squared=lambda x, z, y, r=0: base(x, z, y, r) + eps,
        bounds=(float(np.sqrt(lo ** 2 + eps)), float(np.sqrt(hi ** 2 + eps))),
    )


def constant_model(c: float) -> CoefficientModel:
    def a2(x, z, y, r=0):
        x, z = _grid(x, z, y)
        return np.full(np.broadcast(x, z).shape[:-1] + (len(y),), c * c)

    def ga2(x, z, y, r=0):
        zero = np.zeros_like(a2(x, z, y))
        return zero, zero

    return CoefficientModel(f"const{c:g}", a2, ga2, (c, c), x_independent=True)


def _test1_a2(delta):
    def a2(x, z, y, r=0):
        x, z = _grid(x, z, y)
        s = (1 + delta * _y(y, 0)) ** 2 + (1 + delta * _y(y, 1)) ** 2
        return np.broadcast_to(2.0 / s, np.broadcast(x, z).shape[:-1] + (len(y),)).copy()
    return a2


def _test2_a2(delta):
    def a2(x, z, y, r=0):
        x, z = _grid(x, z, y)
        r = np.asarray(r)[..., None]
        p1 = 1 + delta * _y(y, 0)
        p2 = 1 + delta * _y(y, 1)
        d1 = 1.0 / (p1 ** 2 + p2 ** 2)
        d2 = 9.0 / (25 * p1 ** 2 + 9 * p2 ** 2)
        shape = np.broadcast(x, z, r).shape[:-1] + (len(y),)
        return np.broadcast_to(np.where(r == 0, d1, d2), shape).copy()
    return a2


def _zero_grad(a2):
    def ga2(x, z, y, r=0):
        zero = np.zeros_like(a2(x, z, y, r))
        return zero, zero
    return ga2


def _test2_region(x, z):
    return (np.asarray(x) > 0).astype(int)


# --------------------------------------------------------------------------
# Galerkin matrices


def galerkin_matrix(values: np.ndarray, gpc: GpcBasis) -> np.ndarray:
    """M x M matrices int f(y) Phi_k Phi_j rho dy from samples ``(..., Q)``."""
    return np.einsum("...q,q,kq,jq->...kj", values, gpc.weights, gpc.values, gpc.values)


def assemble_A(model: CoefficientModel, gpc: GpcBasis, x: float, z: float,
               side: str | None = None) -> np.ndarray:
    region = model.region_at(x, z, side)
    vals = model.a(np.array(x), np.array(z), gpc.nodes, region)
    A = galerkin_matrix(vals, gpc)
    return 0.5 * (A + A.T)


def assemble_grad_A(model: CoefficientModel, gpc: GpcBasis, x: float, z: float,
                    side: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    region = model.region_at(x, z, side)
    gx, gz = model.grad_a(np.array(x), np.array(z), gpc.nodes, region)
    Ax = galerkin_matrix(gx, gpc)
    Az = galerkin_matrix(gz, gpc)
    return 0.5 * (Ax + Ax.T), 0.5 * (Az + Az.T)


@dataclass
class GalerkinCoeffField:
    """A and its gradient matrices on a mesh, evaluated from inside each cell.

    When ``cellwise_constant`` is set, ``cell`` has shape ``(nx, nz, M, M)``
    and serves every cell and edge point. Otherwise ``cell`` has shape
    ``(nx, nz, nq, nq, M, M)``, the edge arrays ``(nx, nz, nq, M, M)`` and
    ``grad`` holds (A_x, A_z) at the cell points.
    """

    mesh: Mesh2D
    basis: LocalBasis
    n_modes: int
    cell: np.ndarray
    edges: dict[str, np.ndarray] | None = None
    grad: tuple[np.ndarray, np.ndarray] | None = None
    regions: np.ndarray = field(default=None, repr=False)

    @property
    def cellwise_constant(self) -> bool:
        return self.edges is None

    def apply(self, vals: np.ndarray) -> np.ndarray:
        """A times cell-point values of shape ``(nx, nz, M, nq, nq)``."""
        if self.cellwise_constant:
            shp = vals.shape
            return (self.cell @ vals.reshape(shp[:3] + (-1,))).reshape(shp)
        return np.einsum("xzpqkj,xzjpq->xzkpq", self.cell, vals)

    def apply_grad(self, i: int, vals: np.ndarray) -> np.ndarray:
        return np.einsum("xzpqkj,xzjpq->xzkpq", self.grad[i], vals)

    def apply_edge(self, side: str, vals: np.ndarray) -> np.ndarray:
        """A on one edge of every cell times traces of shape ``(nx, nz, M, nq)``."""
        if self.cellwise_constant:
            return self.cell @ vals
        return np.einsum("xzqkj,xzjq->xzkq", self.edges[side], vals)

    def cell_points(self) -> np.ndarray:
        """A at every cell quadrature point, shape ``(nx, nz, nq, nq, M, M)``."""
        nq = self.basis.n_quad
        if self.cellwise_constant:
            return np.broadcast_to(self.cell[:, :, None, None], self.cell.shape[:2] + (nq, nq) + self.cell.shape[2:])
        return self.cell

    def edge_points(self, side: str) -> np.ndarray:
        nq = self.basis.n_quad
        if self.cellwise_constant:
            return np.broadcast_to(self.cell[:, :, None], self.cell.shape[:2] + (nq,) + self.cell.shape[2:])
        return self.edges[side]

    def lambda_max(self) -> float:
        mats = self.cell.reshape((-1, self.n_modes, self.n_modes))
        return float(np.max(np.linalg.eigvalsh(mats)))


def _sym(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + np.swapaxes(A, -1, -2))


def assemble_field(model: CoefficientModel, gpc: GpcBasis, mesh: Mesh2D,
                   basis: LocalBasis) -> GalerkinCoeffField:
    """Evaluate A (and grad A) at all quadrature points of ``mesh``.

    Each cell evaluates a in its own region, so one-sided values are used on
    coefficient interfaces.
    """
    for xi in model.interfaces_x:
        if not np.any(np.isclose(mesh.x_lines, xi)):
            raise ValueError(f"coefficient interface x={xi} is not a mesh line")
    for zi in model.interfaces_z:
        if not np.any(np.isclose(mesh.z_lines, zi)):
            raise ValueError(f"coefficient interface z={zi} is not a mesh line")
    xc, zc = mesh.cell_centers()
    regions = model.region_of(xc, zc)
    nodes = gpc.nodes

    def mats(x, z, reg):
        return _sym(galerkin_matrix(model.a(x, z, nodes, reg), gpc))

    if model.x_independent:
        return GalerkinCoeffField(mesh, basis, gpc.size, mats(xc, zc, regions), regions=regions)

    X, Z = basis.quad_points(mesh)
    reg4 = regions[:, :, None, None]
    gx, gz = model.grad_a(X, Z, nodes, reg4)
    grad = (_sym(galerkin_matrix(gx, gpc)), _sym(galerkin_matrix(gz, gpc)))
    XV, ZV = basis.vertical_edge_points(mesh)
    XH, ZH = basis.horizontal_edge_points(mesh)
    reg3 = regions[:, :, None]
    edges = {
        "left": mats(XV[:-1], ZV[:-1], reg3),
        "right": mats(XV[1:], ZV[1:], reg3),
        "bottom": mats(XH[:, :-1], ZH[:, :-1], reg3),
        "top": mats(XH[:, 1:], ZH[:, 1:], reg3),
    }
    return GalerkinCoeffField(mesh, basis, gpc.size, mats(X, Z, reg4), edges, grad, regions)


# --------------------------------------------------------------------------
# Exact-solution presets


@dataclass(frozen=True)
class ExactSolutionPreset:
    """Manufactured solution u with q = a grad u; ``u(t, x, z, y, region)``."""

    name: str
    delta: float
    model: CoefficientModel
    domain: tuple[float, float, float, float]
    u: Callable
    u_t: Callable
    grad_u: Callable
    n_random: int = 2
    time_factor: Callable | None = None
    """When set, u(t) = time_factor(t) * u(0) (and likewise grad u)."""

    def q(self, t, x, z, y, region=0):
        a = self.model.a(x, z, y, region)
        gx, gz = self.grad_u(t, x, z, y, region)
        return a * gx, a * gz

    def boundary(self, t, x, z, y, region=0):
        return self.u(t, x, z, y, region)

    def region_of(self, x, z):
        return self.model.region_of(x, z)


def _test1(delta: float) -> ExactSolutionPreset:
    w = np.sqrt(2.0) * np.pi

    def parts(x, z, y):
        x, z = _grid(x, z, y)
        k1 = np.pi * (1 + delta * _y(y, 0))
        k2 = np.pi * (1 + delta * _y(y, 1))
        return x, z, k1, k2

    def u(t, x, z, y, r=0):
        x, z, k1, k2 = parts(x, z, y)
        return np.cos(w * t) * np.sin(k1 * x) * np.sin(k2 * z)

    def u_t(t, x, z, y, r=0):
        x, z, k1, k2 = parts(x, z, y)
        return -w * np.sin(w * t) * np.sin(k1 * x) * np.sin(k2 * z)

    def grad_u(t, x, z, y, r=0):
        x, z, k1, k2 = parts(x, z, y)
        c = np.cos(w * t)
        return c * k1 * np.cos(k1 * x) * np.sin(k2 * z), c * k2 * np.sin(k1 * x) * np.cos(k2 * z)

    a2 = _test1_a2(delta)
    lo = 1.0 / (1 + delta)
    hi = 1.0 / (1 - delta) if delta < 1 else np.inf
    model = CoefficientModel(f"test1(delta={delta:g})", a2, _zero_grad(a2), (lo, hi), x_independent=True)
    return ExactSolutionPreset("test1", delta, model, (0.0, 2.0, 0.0, 2.0), u, u_t, grad_u,
                                time_factor=lambda t: np.cos(w * t))


def _test2(delta: float) -> ExactSolutionPreset:
    w = 3 * np.pi

    def parts(x, z, y, r):
        x, z = _grid(x, z, y)
        r = np.asarray(r)[..., None]
        kx = np.where(r == 0, 3.0, 5.0) * np.pi * (1 + delta * _y(y, 0))
        kz = 3 * np.pi * (1 + delta * _y(y, 1))
        return x, z, kx, kz

    def u(t, x, z, y, r=0):
        x, z, kx, kz = parts(x, z, y, r)
        return np.cos(w * t) * np.sin(kx * x) * np.sin(kz * z)

    def u_t(t, x, z, y, r=0):
        x, z, kx, kz = parts(x, z, y, r)
        return -w * np.sin(w * t) * np.sin(kx * x) * np.sin(kz * z)

    def grad_u(t, x, z, y, r=0):
        x, z, kx, kz = parts(x, z, y, r)
        c = np.cos(w * t)
        return c * kx * np.cos(kx * x) * np.sin(kz * z), c * kz * np.sin(kx * x) * np.cos(kz * z)

    a2 = _test2_a2(delta)
    lo = min(1 / np.sqrt(2) / (1 + delta), 3 / np.sqrt(34) / (1 + delta))
    hi = max(1 / np.sqrt(2) / (1 - delta), 3 / np.sqrt(34) / (1 - delta)) if delta < 1 else np.inf
    model = CoefficientModel(f"test2(delta={delta:g})", a2, _zero_grad(a2), (lo, hi),
                             interfaces_x=(0.0,), region_fn=_test2_region, x_independent=True)
    return ExactSolutionPreset("test2", delta, model, (-1.0, 1.0, -1.0, 1.0), u, u_t, grad_u,
                                time_factor=lambda t: np.cos(w * t))


PRESETS = {"test1": _test1, "test2": _test2}


def build_preset(name: str, delta: float) -> ExactSolutionPreset:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    if delta < 0:
        raise ValueError(f"noise magnitude must be >= 0, got {delta}")
    if delta >= 1:
        raise ValueError("noise magnitude must be < 1 to keep (1 + delta*y) positive")
    return PRESETS[name](float(delta))


def with_model(preset: ExactSolutionPreset, model: CoefficientModel) -> ExactSolutionPreset:
    """Same initial/boundary data driven by a different coefficient."""
    return replace(preset, model=model)
