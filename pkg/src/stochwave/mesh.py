"""Uniform rectangular meshes and the tensor-product modal DG space Q^k.

Field layout used throughout the package: a scalar DG field is an array of
shape ``(Nx, Nz, M, nb)`` (cell column, cell row, gPC mode, local basis
function) with ``nb = (k+1)**2`` and local index ``b = a*(k+1) + c`` for the
product of the degree-``a`` polynomial in x and degree-``c`` polynomial in z.
A vector field stacks two scalar fields along a leading axis of length 2.
Values at cell quadrature points use ``(Nx, Nz, M, nq, nq)`` and edge traces
``(Nx, Nz, M, nq)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gpc import GpcBasis

MINUS, PLUS = "-", "+"


def _legendre_1d(k: int, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of Legendre polynomials orthonormal on [-1, 1]
    (unweighted). Shapes ``(len(s), k+1)``."""
    s = np.asarray(s, dtype=float)
    vals = np.empty((k + 1,) + s.shape)
    ders = np.zeros((k + 1,) + s.shape)
    vals[0] = 1.0
    if k > 0:
        vals[1] = s
        ders[1] = 1.0
    for n in range(1, k):
        vals[n + 1] = ((2 * n + 1) * s * vals[n] - n * vals[n - 1]) / (n + 1)
        ders[n + 1] = (n + 1) * vals[n] + s * ders[n]
    scale = np.sqrt((2 * np.arange(k + 1) + 1.0) / 2.0).reshape((-1,) + (1,) * s.ndim)
    return np.moveaxis(vals * scale, 0, -1), np.moveaxis(ders * scale, 0, -1)


@dataclass(frozen=True)
class Mesh2D:
    x_lo: float
    x_hi: float
    z_lo: float
    z_hi: float
    nx: int
    nz: int

    @property
    def hx(self) -> float:
        return (self.x_hi - self.x_lo) / self.nx

    @property
    def hz(self) -> float:
        return (self.z_hi - self.z_lo) / self.nz

    @property
    def h(self) -> float:
        return min(self.hx, self.hz)

    @property
    def n_cells(self) -> int:
        return self.nx * self.nz

    @property
    def x_lines(self) -> np.ndarray:
        return self.x_lo + self.hx * np.arange(self.nx + 1)

    @property
    def z_lines(self) -> np.ndarray:
        return self.z_lo + self.hz * np.arange(self.nz + 1)

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Center coordinates, each of shape ``(nx, nz)``."""
        xc = self.x_lo + self.hx * (np.arange(self.nx) + 0.5)
        zc = self.z_lo + self.hz * (np.arange(self.nz) + 0.5)
        return np.meshgrid(xc, zc, indexing="ij")

    def locate(self, x: float, z: float) -> tuple[int, int]:
        if not (self.x_lo <= x <= self.x_hi and self.z_lo <= z <= self.z_hi):
            raise ValueError(f"point ({x}, {z}) outside the domain")
        i = min(int((x - self.x_lo) // self.hx), self.nx - 1)
        j = min(int((z - self.z_lo) // self.hz), self.nz - 1)
        return i, j

    def edges(self):
        """Enumerate edges as ``(direction, line, cell_index, minus_cell, plus_cell)``.

        ``direction`` is ``"x"`` for vertical edges (normal along x) and ``"z"``
        for horizontal ones; boundary edges have one of the cells set to None.
        """
        for e in range(self.nx + 1):
            for j in range(self.nz):
                minus = (e - 1, j) if e > 0 else None
                plus = (e, j) if e < self.nx else None
                yield ("x", e, j, minus, plus)
        for e in range(self.nz + 1):
            for i in range(self.nx):
                minus = (i, e - 1) if e > 0 else None
                plus = (i, e) if e < self.nz else None
                yield ("z", e, i, minus, plus)


def build_mesh(domain, nx: int, nz: int, interface_x=(), interface_z=()) -> Mesh2D:
    """Uniform mesh of ``domain = (x_lo, x_hi, z_lo, z_hi)``.

    Interface lines of the coefficient must coincide with mesh lines.
    """
    if nx < 1 or nz < 1:
        raise ValueError("cell counts must be >= 1")
    x_lo, x_hi, z_lo, z_hi = map(float, domain)
    if not (x_hi > x_lo and z_hi > z_lo):
        raise ValueError(f"degenerate domain {domain}")
    mesh = Mesh2D(x_lo, x_hi, z_lo, z_hi, int(nx), int(nz))
    for xi in interface_x:
        if not np.any(np.isclose(mesh.x_lines, xi, atol=1e-12 * (x_hi - x_lo))):
            raise ValueError(f"interface x={xi} is not a mesh line for nx={nx}")
    for zi in interface_z:
        if not np.any(np.isclose(mesh.z_lines, zi, atol=1e-12 * (z_hi - z_lo))):
            raise ValueError(f"interface z={zi} is not a mesh line for nz={nz}")
    return mesh


@dataclass(frozen=True)
class LocalBasis:
    """Orthonormal Q^k modal basis on each physical cell with Gauss rules.

    On a cell of size ``hx x hz`` the basis is
    ``phi_b(x, z) = scale * psi_a(xi) * psi_c(eta)`` with ``scale = 2/sqrt(hx*hz)``
    so the unweighted cell mass matrix is the identity.
    """

    degree: int
    n_quad: int | None = None
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)
    vals: np.ndarray = field(init=False, repr=False, compare=False)
    ders: np.ndarray = field(init=False, repr=False, compare=False)
    left: np.ndarray = field(init=False, repr=False, compare=False)
    right: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("DG degree must be >= 0")
        n = self.degree + 2 if self.n_quad is None else self.n_quad
        if n < self.degree + 1:
            raise ValueError("cell quadrature needs at least k+1 points per direction")
        object.__setattr__(self, "n_quad", n)
        s, w = np.polynomial.legendre.leggauss(n)
        vals, ders = _legendre_1d(self.degree, s)
        ends, _ = _legendre_1d(self.degree, np.array([-1.0, 1.0]))
        for name, arr in (("nodes", s), ("weights", w), ("vals", vals), ("ders", ders),
                          ("left", ends[0]), ("right", ends[1])):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n1(self) -> int:
        return self.degree + 1

    @property
    def size(self) -> int:
        return self.n1 ** 2

    def scale(self, mesh: Mesh2D) -> float:
        return 2.0 / np.sqrt(mesh.hx * mesh.hz)

    def quad_points(self, mesh: Mesh2D) -> tuple[np.ndarray, np.ndarray]:
        """Physical cell quadrature points, each of shape ``(nx, nz, nq, nq)``."""
        xc, zc = mesh.cell_centers()
        X = xc[:, :, None, None] + 0.5 * mesh.hx * self.nodes[None, None, :, None]
        Z = zc[:, :, None, None] + 0.5 * mesh.hz * self.nodes[None, None, None, :]
        return np.broadcast_arrays(X, Z)

    def vertical_edge_points(self, mesh: Mesh2D) -> tuple[np.ndarray, np.ndarray]:
        """Quadrature points on the nx+1 vertical lines, shape ``(nx+1, nz, nq)``."""
        _, zc = mesh.cell_centers()
        Z = zc[0][None, :, None] + 0.5 * mesh.hz * self.nodes[None, None, :]
        X = mesh.x_lines[:, None, None]
        return np.broadcast_arrays(X, Z)

    def horizontal_edge_points(self, mesh: Mesh2D) -> tuple[np.ndarray, np.ndarray]:
        """Quadrature points on the nz+1 horizontal lines, shape ``(nx, nz+1, nq)``."""
        xc, _ = mesh.cell_centers()
        X = xc[:, 0][:, None, None] + 0.5 * mesh.hx * self.nodes[None, None, :]
        Z = mesh.z_lines[None, :, None]
        return np.broadcast_arrays(X, Z)

    def point_values(self, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        """Reference basis products psi_a(xi) psi_c(eta), shape ``xi.shape + (nb,)``
        (without the physical scale factor)."""
        px, _ = _legendre_1d(self.degree, xi)
        pz, _ = _legendre_1d(self.degree, eta)
        return (px[..., :, None] * pz[..., None, :]).reshape(np.shape(xi) + (self.size,))


def zeros_field(mesh: Mesh2D, basis: LocalBasis, n_modes: int) -> np.ndarray:
    return np.zeros((mesh.nx, mesh.nz, n_modes, basis.size))


def as_tensor(field: np.ndarray, basis: LocalBasis) -> np.ndarray:
    """View with the local index split into its x and z degrees."""
    return field.reshape(field.shape[:-1] + (basis.n1, basis.n1))


def to_quad(t: np.ndarray, bx: np.ndarray, bz: np.ndarray) -> np.ndarray:
    """Tensor transform ``(..., a, c) -> (..., p, q)`` with tables ``bx[p, a]``, ``bz[q, c]``."""
    return bx @ t @ bz.T


def from_quad(vals: np.ndarray, bx: np.ndarray, bz: np.ndarray) -> np.ndarray:
    """Adjoint transform ``(..., p, q) -> (..., a, c)``."""
    return bx.T @ vals @ bz


def cell_values(field: np.ndarray, mesh: Mesh2D, basis: LocalBasis) -> np.ndarray:
    """Field values at cell quadrature points, shape ``(nx, nz, M, nq, nq)``."""
    return basis.scale(mesh) * to_quad(as_tensor(field, basis), basis.vals, basis.vals)


def edge_traces(field: np.ndarray, mesh: Mesh2D, basis: LocalBasis) -> dict[str, np.ndarray]:
    """One-sided traces of every cell on its four edges at edge quadrature points.

    Each entry has shape ``(nx, nz, M, nq)``; ``left``/``right`` run over the
    z-points of the vertical edges, ``bottom``/``top`` over the x-points.
    """
    t = as_tensor(field, basis)
    s = basis.scale(mesh)
    V = basis.vals
    return {
        "left": s * (basis.left @ t) @ V.T,
        "right": s * (basis.right @ t) @ V.T,
        "bottom": s * (t @ basis.left) @ V.T,
        "top": s * (t @ basis.right) @ V.T,
    }


def evaluate_field(field: np.ndarray, mesh: Mesh2D, basis: LocalBasis, gpc: GpcBasis | None,
                   x: float, z: float, y=None, cell: tuple[int, int] | None = None):
    """Point value of a DG field.

    With ``gpc`` and ``y`` the stochastic value sum_m v_m(x) Phi_m(y) is
    returned; otherwise the vector of mode values at ``x``. On an interior
    mesh line the owning cell must be given with ``cell``.
    """
    if not (mesh.x_lo <= x <= mesh.x_hi and mesh.z_lo <= z <= mesh.z_hi):
        raise ValueError(f"point ({x}, {z}) outside the domain")
    if cell is None:
        fx = (x - mesh.x_lo) / mesh.hx
        fz = (z - mesh.z_lo) / mesh.hz
        on_x = mesh.x_lo < x < mesh.x_hi and np.isclose(fx, np.round(fx))
        on_z = mesh.z_lo < z < mesh.z_hi and np.isclose(fz, np.round(fz))
        if on_x or on_z:
            raise ValueError("point lies on an interior mesh line; pass the owning cell")
        i, j = mesh.locate(x, z)
    else:
        i, j = cell
    xi = 2.0 * (x - mesh.x_lo) / mesh.hx - (2 * i + 1)
    eta = 2.0 * (z - mesh.z_lo) / mesh.hz - (2 * j + 1)
    if abs(xi) > 1 + 1e-12 or abs(eta) > 1 + 1e-12:
        raise ValueError(f"point ({x}, {z}) is not in cell {(i, j)}")
    phi = basis.scale(mesh) * basis.point_values(np.array(xi), np.array(eta))
    modes = field[i, j] @ phi
    if gpc is None or y is None:
        return modes
    return float(modes @ gpc.evaluate(np.asarray(y, dtype=float)))


def trace(field: np.ndarray, mesh: Mesh2D, basis: LocalBasis, direction: str, line: int,
          index: int, side: str) -> np.ndarray:
    """One-sided trace on one edge at its quadrature points, shape ``(M, nq)``.

    ``direction="x"``: vertical line ``line`` (0..nx) and cell row ``index``;
    ``direction="z"``: horizontal line ``line`` (0..nz) and cell column ``index``.
    ``side`` selects the cell on the lower-coordinate (``"-"``) or upper side.
    """
    if side not in (MINUS, PLUS):
        raise ValueError(f"side must be '-' or '+', got {side!r}")
    if direction not in ("x", "z"):
        raise ValueError(f"direction must be 'x' or 'z', got {direction!r}")
    n_lines = mesh.nx if direction == "x" else mesh.nz
    if not 0 <= line <= n_lines:
        raise ValueError(f"invalid edge line {line}")
    if (side == MINUS and line == 0) or (side == PLUS and line == n_lines):
        raise ValueError("the exterior side of a boundary edge has no trace")
    tr = edge_traces(field, mesh, basis)
    if direction == "x":
        return tr["right"][line - 1, index] if side == MINUS else tr["left"][line, index]
    return tr["top"][index, line - 1] if side == MINUS else tr["bottom"][index, line]


def project_point_values(vals: np.ndarray, mesh: Mesh2D, basis: LocalBasis) -> np.ndarray:
    """Unweighted L2 projection of values sampled at the cell quadrature
    points, ``vals`` of shape ``(nx, nz, M, nq, nq)``."""
    wv = basis.weights[:, None] * basis.vals
    t = 0.25 * mesh.hx * mesh.hz * basis.scale(mesh) * from_quad(vals, wv, wv)
    return t.reshape(t.shape[:-2] + (basis.size,))


def l2_project(func, mesh: Mesh2D, basis: LocalBasis) -> np.ndarray:
    """Cellwise L2 projection of ``func(X, Z)`` returning values with a
    trailing mode axis (or none, for a single mode)."""
    X, Z = basis.quad_points(mesh)
    vals = np.asarray(func(X, Z), dtype=float)
    if vals.ndim == 4:
        vals = vals[..., None]
    return project_point_values(np.moveaxis(vals, -1, 2), mesh, basis)
