"""LDG spatial operators with alternating fluxes and the initial projections.

``compute_S`` solves the auxiliary equation for S = A grad v and
``compute_acceleration`` evaluates div(A S) in weak form; both are explicit
because the local basis is orthonormal.

Boundary closure: on every boundary edge the v-flux is the Dirichlet value
g_D and the (A S)-flux is the interior one-sided trace. With g_D = 0 the
discrete energy is conserved exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coefficients import ExactSolutionPreset, GalerkinCoeffField
from .gpc import GpcBasis
from .mesh import cell_values, edge_traces, from_quad

FLUX_CHOICES = ("-+", "+-")


@dataclass(frozen=True)
class FluxConvention:
    """Per direction, the pair (side of the A S trace, side of the v trace).

    ``"-+"`` takes A^- S^- and v^+; ``"+-"`` takes A^+ S^+ and v^-.
    """

    x: str = "-+"
    z: str = "-+"

    def __post_init__(self):
        for d in (self.x, self.z):
            if d not in FLUX_CHOICES:
                raise ValueError(f"flux choice must be one of {FLUX_CHOICES}, got {d!r}")

    @classmethod
    def parse(cls, name: str) -> "FluxConvention":
        names = {"minus_plus": "-+", "plus_minus": "+-", "-+": "-+", "+-": "+-"}
        if name not in names:
            raise ValueError(f"unknown flux convention {name!r}")
        return cls(names[name], names[name])

    @property
    def name(self) -> str:
        names = {"-+": "minus_plus", "+-": "plus_minus"}
        if self.x == self.z:
            return names[self.x]
        return f"{names[self.x]}/{names[self.z]}"


class BoundaryData:
    """Dirichlet data for v as gPC mode values on the boundary.

    ``func(t, X, Z, region)`` returns mode values with a trailing axis of
    length M; ``func=None`` means homogeneous data.
    """

    def __init__(self, func: Callable | None = None):
        self.func = func
        self._points = None

    @property
    def homogeneous(self) -> bool:
        return self.func is None

    @classmethod
    def from_preset(cls, preset: ExactSolutionPreset, gpc: GpcBasis) -> "BoundaryData":
        def modes(t, X, Z, R):
            return gpc.project(preset.boundary(t, X, Z, gpc.nodes, R))
        return cls(modes)

    def values(self, t: float, coeff: GalerkinCoeffField) -> dict[str, np.ndarray] | None:
        """g_D modes on the four sides: ``left/right`` of shape ``(nz, M, nq)``,
        ``bottom/top`` of shape ``(nx, M, nq)``; None when homogeneous."""
        if self.func is None:
            return None
        mesh, basis = coeff.mesh, coeff.basis
        key = (mesh, basis)
        if self._points is None or self._points[0] != key:
            XV, ZV = basis.vertical_edge_points(mesh)
            XH, ZH = basis.horizontal_edge_points(mesh)
            reg = coeff.regions
            pts = {
                "left": (XV[0], ZV[0], reg[0][:, None]),
                "right": (XV[-1], ZV[-1], reg[-1][:, None]),
                "bottom": (XH[:, 0], ZH[:, 0], reg[:, 0][:, None]),
                "top": (XH[:, -1], ZH[:, -1], reg[:, -1][:, None]),
            }
            self._points = (key, pts)
        return {side: np.swapaxes(self.func(t, X, Z, R), -1, -2)
                for side, (X, Z, R) in self._points[1].items()}


HOMOGENEOUS = BoundaryData(None)


def _check(field: np.ndarray, coeff: GalerkinCoeffField, vector: bool):
    mesh, basis = coeff.mesh, coeff.basis
    shape = (mesh.nx, mesh.nz, coeff.n_modes, basis.size)
    if vector:
        shape = (2,) + shape
    if field.shape != shape:
        raise ValueError(f"field shape {field.shape} does not match {shape}")
    if not np.all(np.isfinite(field)):
        raise ValueError("field has non-finite coefficients")


def _tables(coeff: GalerkinCoeffField):
    basis = coeff.basis
    w = basis.weights[:, None]
    return w * basis.vals, w * basis.ders, basis.left, basis.right


def _flat(t: np.ndarray) -> np.ndarray:
    return t.reshape(t.shape[:-2] + (-1,))


def compute_S(v: np.ndarray, coeff: GalerkinCoeffField, flux: FluxConvention = FluxConvention(),
              bc: BoundaryData = HOMOGENEOUS, t: float = 0.0) -> np.ndarray:
    """Auxiliary variable S = (S^1, S^2) of shape ``(2, nx, nz, M, nb)``."""
    _check(v, coeff, vector=False)
    mesh, basis = coeff.mesh, coeff.basis
    s = basis.scale(mesh)
    hx, hz = mesh.hx, mesh.hz
    jac = 0.25 * hx * hz
    WV, WD, L, R = _tables(coeff)

    Vq = cell_values(v, mesh, basis)
    AV = coeff.apply(Vq)
    S1 = (-jac * s * 2 / hx) * from_quad(AV, WD, WV)
    S2 = (-jac * s * 2 / hz) * from_quad(AV, WV, WD)
    if coeff.grad is not None:
        S1 -= jac * s * from_quad(coeff.apply_grad(0, Vq), WV, WV)
        S2 -= jac * s * from_quad(coeff.apply_grad(1, Vq), WV, WV)

    tr = edge_traces(v, mesh, basis)
    vx = np.empty((mesh.nx + 1,) + tr["left"].shape[1:])
    vx[1:-1] = tr["left"][1:] if flux.x == "-+" else tr["right"][:-1]
    vz = np.empty((mesh.nx, mesh.nz + 1) + tr["bottom"].shape[2:])
    vz[:, 1:-1] = tr["bottom"][:, 1:] if flux.z == "-+" else tr["top"][:, :-1]
    g = bc.values(t, coeff)
    if g is None:
        vx[0] = vx[-1] = 0.0
        vz[:, 0] = vz[:, -1] = 0.0
    else:
        vx[0], vx[-1] = g["left"], g["right"]
        vz[:, 0], vz[:, -1] = g["bottom"], g["top"]

    right = coeff.apply_edge("right", vx[1:]) @ WV
    left = coeff.apply_edge("left", vx[:-1]) @ WV
    S1 += (0.5 * hz * s) * (R[:, None] * right[..., None, :] - L[:, None] * left[..., None, :])
    top = coeff.apply_edge("top", vz[:, 1:]) @ WV
    bottom = coeff.apply_edge("bottom", vz[:, :-1]) @ WV
    S2 += (0.5 * hx * s) * (top[..., :, None] * R - bottom[..., :, None] * L)
    return np.stack([_flat(S1), _flat(S2)])


def compute_acceleration(S: np.ndarray, coeff: GalerkinCoeffField,
                         flux: FluxConvention = FluxConvention(),
                         bc: BoundaryData = HOMOGENEOUS, t: float = 0.0) -> np.ndarray:
    """Discrete div(A S): the second time derivative of v, shape ``(nx, nz, M, nb)``.

    Boundary data do not enter: the (A S)-flux on boundary edges is interior.
    """
    _check(S, coeff, vector=True)
    mesh, basis = coeff.mesh, coeff.basis
    s = basis.scale(mesh)
    hx, hz = mesh.hx, mesh.hz
    jac = 0.25 * hx * hz
    WV, WD, L, R = _tables(coeff)

    AS1 = coeff.apply(cell_values(S[0], mesh, basis))
    AS2 = coeff.apply(cell_values(S[1], mesh, basis))
    r = (-jac * s) * ((2 / hx) * from_quad(AS1, WD, WV) + (2 / hz) * from_quad(AS2, WV, WD))

    t1 = edge_traces(S[0], mesh, basis)
    t2 = edge_traces(S[1], mesh, basis)
    ASl, ASr = coeff.apply_edge("left", t1["left"]), coeff.apply_edge("right", t1["right"])
    ASb, ASt = coeff.apply_edge("bottom", t2["bottom"]), coeff.apply_edge("top", t2["top"])

    Fx = np.empty((mesh.nx + 1,) + ASl.shape[1:])
    Fx[1:-1] = ASr[:-1] if flux.x == "-+" else ASl[1:]
    Fx[0], Fx[-1] = ASl[0], ASr[-1]
    Fz = np.empty((mesh.nx, mesh.nz + 1) + ASb.shape[2:])
    Fz[:, 1:-1] = ASt[:, :-1] if flux.z == "-+" else ASb[:, 1:]
    Fz[:, 0], Fz[:, -1] = ASb[:, 0], ASt[:, -1]

    right, left = Fx[1:] @ WV, Fx[:-1] @ WV
    r += (0.5 * hz * s) * (R[:, None] * right[..., None, :] - L[:, None] * left[..., None, :])
    top, bottom = Fz[:, 1:] @ WV, Fz[:, :-1] @ WV
    r += (0.5 * hx * s) * (top[..., :, None] * R - bottom[..., :, None] * L)
    return _flat(r)


# --------------------------------------------------------------------------
# Initial projections


def _modes_at(func, X, Z, R) -> np.ndarray:
    return np.asarray(func(X, Z, R), dtype=float)


def project_initial_plain(func: Callable, coeff: GalerkinCoeffField) -> np.ndarray:
    """A-weighted cellwise projection: (P u - u, A w) = 0 for all w in Q^k.

    ``func(X, Z, region)`` returns gPC mode values with a trailing axis of length M.
    """
    mesh, basis = coeff.mesh, coeff.basis
    X, Z = basis.quad_points(mesh)
    U = _modes_at(func, X, Z, coeff.regions[:, :, None, None])      # (x,z,p,q,M)
    s = basis.scale(mesh)
    jac = 0.25 * mesh.hx * mesh.hz
    w, V = basis.weights, basis.vals
    nq, nb, M = basis.n_quad, basis.size, coeff.n_modes
    phi = s * np.einsum("pa,qc->pqac", V, V).reshape(nq, nq, nb)
    wphi = jac * np.einsum("p,q,pqb->pqb", w, w, phi)
    if coeff.cellwise_constant:
        # A is invertible and constant per cell, so it drops out of the conditions
        return np.einsum("xzpqm,pqb->xzmb", U, wphi)
    A = coeff.cell_points()
    G = np.einsum("xzpqkj,pqa,pqb->xzkajb", A, wphi, phi, optimize=True)
    rhs = np.einsum("xzpqkj,xzpqj,pqa->xzka", A, U, wphi, optimize=True)
    shp = (mesh.nx, mesh.nz, M * nb)
    sol = np.linalg.solve(G.reshape(shp + (M * nb,)), rhs.reshape(shp + (1,)))[..., 0]
    return sol.reshape(mesh.nx, mesh.nz, M, nb)


def project_initial_vplus(func: Callable, coeff: GalerkinCoeffField,
                          flux: FluxConvention = FluxConvention()) -> np.ndarray:
    """Trace-matching projection onto Q^k, the tensor product of the 1D
    Radau-type projections on the side where the v-flux reads this cell.

    Per cell and mode: A-weighted moments against Q^{k-1} on the cell,
    A-weighted moments against P^{k-1} on the matched x-edge and z-edge, and
    the value at their shared corner; (k+1)^2 conditions in all.
    """
    mesh, basis = coeff.mesh, coeff.basis
    k, nq, nb, M = basis.degree, basis.n_quad, basis.size, coeff.n_modes
    nx, nz = mesh.nx, mesh.nz
    s = basis.scale(mesh)
    hx, hz = mesh.hx, mesh.hz
    jac = 0.25 * hx * hz
    w, V = basis.weights, basis.vals
    sx = -1.0 if flux.x == "-+" else 1.0
    sz = -1.0 if flux.z == "-+" else 1.0
    ex = basis.left if sx < 0 else basis.right
    ez = basis.left if sz < 0 else basis.right
    side_x = "left" if sx < 0 else "right"
    side_z = "bottom" if sz < 0 else "top"

    X, Z = basis.quad_points(mesh)
    reg = coeff.regions
    xc, zc = mesh.cell_centers()
    xe = np.broadcast_to((xc + 0.5 * sx * hx)[:, :, None], (nx, nz, nq))
    ze = np.broadcast_to((zc + 0.5 * sz * hz)[:, :, None], (nx, nz, nq))
    U = _modes_at(func, X, Z, reg[:, :, None, None])                    # (x,z,p,q,M)
    Ux = _modes_at(func, xe, Z[:, :, 0, :], reg[:, :, None])            # (x,z,q,M)
    Uz = _modes_at(func, X[:, :, :, 0], ze, reg[:, :, None])            # (x,z,p,M)
    Uc = _modes_at(func, xc + 0.5 * sx * hx, zc + 0.5 * sz * hz, reg)   # (x,z,M)

    phi = s * np.einsum("pa,qc->pqac", V, V).reshape(nq, nq, nb)
    phi_x = s * np.einsum("a,qc->qac", ex, V).reshape(nq, nb)
    phi_z = s * np.einsum("pa,c->pac", V, ez).reshape(nq, nb)
    phi_c = s * np.outer(ex, ez).reshape(nb)
    t_vol = jac * np.einsum("p,q,pa,qc->pqac", w, w, V[:, :k], V[:, :k]).reshape(nq, nq, k * k)
    t_x = 0.5 * hz * w[:, None] * V[:, :k]
    t_z = 0.5 * hx * w[:, None] * V[:, :k]

    if coeff.cellwise_constant:
        B = np.concatenate([
            np.einsum("pqb,pqt->tb", phi, t_vol),
            np.einsum("qb,qt->tb", phi_x, t_x),
            np.einsum("pb,pt->tb", phi_z, t_z),
            phi_c[None, :],
        ])
        rhs = np.concatenate([
            np.einsum("xzpqm,pqt->xzmt", U, t_vol),
            np.einsum("xzqm,qt->xzmt", Ux, t_x),
            np.einsum("xzpm,pt->xzmt", Uz, t_z),
            Uc[..., None],
        ], axis=-1)
        return rhs @ np.linalg.inv(B).T

    A = coeff.cell_points()
    Ax = coeff.edge_points(side_x)
    Az = coeff.edge_points(side_z)
    corner = np.einsum("kj,b->kjb", np.eye(M), phi_c)[:, None]
    rows = np.concatenate([
        np.einsum("xzpqkj,pqb,pqt->xzktjb", A, phi, t_vol, optimize=True),
        np.einsum("xzqkj,qb,qt->xzktjb", Ax, phi_x, t_x, optimize=True),
        np.einsum("xzpkj,pb,pt->xzktjb", Az, phi_z, t_z, optimize=True),
        np.broadcast_to(corner, (nx, nz, M, 1, M, nb)),
    ], axis=3)
    rhs = np.concatenate([
        np.einsum("xzpqkj,xzpqj,pqt->xzkt", A, U, t_vol, optimize=True),
        np.einsum("xzqkj,xzqj,qt->xzkt", Ax, Ux, t_x, optimize=True),
        np.einsum("xzpkj,xzpj,pt->xzkt", Az, Uz, t_z, optimize=True),
        Uc[..., None],
    ], axis=-1)
    sol = np.linalg.solve(rows.reshape(nx, nz, M * nb, M * nb),
                          rhs.reshape(nx, nz, M * nb, 1))[..., 0]
    return sol.reshape(nx, nz, M, nb)


def preset_modes(preset: ExactSolutionPreset, gpc: GpcBasis, t: float = 0.0,
                 which: str = "u") -> Callable:
    """gPC mode values of the preset's ``u`` or ``u_t`` at time t, as ``func(X, Z, region)``."""
    f = {"u": preset.u, "u_t": preset.u_t}[which]

    def modes(X, Z, R):
        return gpc.project(f(t, X, Z, gpc.nodes, R))
    return modes
