"""Errors in expectation, convergence orders, energy traces and the parameter studies.

Error metric: for u the quantity sqrt(int_D E[(u_h - u)^2] dx), maximized
over the visited step times, and the same for both components of q = a grad u.
By default the spatial integral is divided by the area of the domain
(root-mean-square over D), the scale of the reference error values;
``area_normalized=False`` gives the plain L2 norm.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .coefficients import (ExactSolutionPreset, assemble_field, perturbed, with_model)
from .gpc import GpcBasis, make_basis
from .ldg import HOMOGENEOUS, BoundaryData, FluxConvention, preset_modes
from .leapfrog import (Discretization, EnergyRecord, InstabilityError, SolverState,
                       discrete_energy, initialize, initialize_from, step)
from .mesh import LocalBasis, Mesh2D, build_mesh, cell_values

log = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# Problem assembly


@dataclass(frozen=True)
class Case:
    """A preset discretized on one mesh with one gPC basis."""

    preset: ExactSolutionPreset
    gpc: GpcBasis
    mesh: Mesh2D
    basis: LocalBasis
    disc: Discretization

    @property
    def coeff(self):
        return self.disc.coeff


def cells_for(length: float, h: float) -> int:
    n = int(round(length / h))
    if n < 1 or not np.isclose(n * h, length, rtol=1e-9, atol=0.0):
        raise ValueError(f"mesh size {h} does not divide the domain length {length}")
    return n


def build_case(preset: ExactSolutionPreset, P: int, k: int, h: float,
               flux: FluxConvention = FluxConvention(), boundary: str = "exact",
               y_nodes: int | None = None, n_quad: int | None = None) -> Case:
    """Assemble everything needed to time-step ``preset`` at mesh size ``h``.

    ``boundary`` is ``"exact"`` (Dirichlet data from the preset) or
    ``"homogeneous"``.
    """
    if boundary not in ("exact", "homogeneous"):
        raise ValueError(f"boundary mode must be 'exact' or 'homogeneous', got {boundary!r}")
    x_lo, x_hi, z_lo, z_hi = preset.domain
    gpc = make_basis(preset.n_random, P, y_nodes)
    model = preset.model
    mesh = build_mesh(preset.domain, cells_for(x_hi - x_lo, h), cells_for(z_hi - z_lo, h),
                      interface_x=model.interfaces_x, interface_z=model.interfaces_z)
    basis = LocalBasis(k, n_quad)
    coeff = assemble_field(model, gpc, mesh, basis)
    bc = BoundaryData.from_preset(preset, gpc) if boundary == "exact" else HOMOGENEOUS
    return Case(preset, gpc, mesh, basis, Discretization(coeff, flux, bc))


def rebuild(case: Case, model) -> Case:
    """Same case with a different coefficient model (boundary data unchanged)."""
    coeff = assemble_field(model, case.gpc, case.mesh, case.basis)
    return Case(with_model(case.preset, model), case.gpc, case.mesh, case.basis,
                Discretization(coeff, case.disc.flux, case.disc.bc))


def n_steps_for(T: float, dt: float) -> int:
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    if T < dt * (1 - 1e-12):
        raise ValueError(f"final time {T} is shorter than one step {dt}")
    n = int(round(T / dt))
    if not np.isclose(n * dt, T, rtol=1e-9, atol=0.0):
        log.warning("T=%g is not a multiple of dt=%g; running %d steps to t=%g", T, dt, n, n * dt)
    return n


# --------------------------------------------------------------------------
# Error metric


class ErrorEvaluator:
    """(e_u, e_qx, e_qy) of one time level against the preset's exact solution.

    The expectation uses the y-quadrature of ``gpc``. Because the gPC basis
    is orthonormal under that rule, E[(u_h - u)^2] splits into the squared
    mode differences plus the unresolved tail E[(u - sum_m u_m Phi_m)^2], which is
    precomputed when the exact solution separates in time.
    """

    def __init__(self, case: Case, area_normalized: bool = True):
        self.case = case
        mesh, basis = case.mesh, case.basis
        self.X, self.Z = basis.quad_points(mesh)
        self.R = case.coeff.regions[:, :, None, None]
        w = basis.weights
        jac = 0.25 * mesh.hx * mesh.hz
        self.cell_w = jac * np.outer(w, w)
        area = (mesh.x_hi - mesh.x_lo) * (mesh.z_hi - mesh.z_lo)
        self.norm = 1.0 / area if area_normalized else 1.0
        self._static = None
        if case.preset.time_factor is not None:
            self._static = self._exact(0.0)

    def _exact(self, t: float):
        """Mode values (x, z, M, p, q) and tails (x, z, p, q) of u, qx, qy."""
        p, gpc = self.case.preset, self.case.gpc
        y = gpc.nodes
        fields = [p.u(t, self.X, self.Z, y, self.R), *p.q(t, self.X, self.Z, y, self.R)]
        out = []
        for f in fields:
            modes = gpc.project(f)
            tail = (f - modes @ gpc.values) ** 2 @ gpc.weights
            out.append((np.moveaxis(modes, -1, 2), tail))
        return out

    def exact_parts(self, t: float):
        if self._static is None:
            return self._exact(t)
        c = float(self.case.preset.time_factor(t))
        return [(c * m, c * c * tail) for m, tail in self._static]

    def errors(self, v: np.ndarray, S: np.ndarray, t: float) -> np.ndarray:
        mesh, basis = self.case.mesh, self.case.basis
        out = np.empty(3)
        for i, (f, (modes, tail)) in enumerate(zip((v, S[0], S[1]), self.exact_parts(t))):
            diff = cell_values(f, mesh, basis) - modes
            local = np.sum(diff ** 2, axis=2) + tail
            out[i] = np.sqrt(self.norm * np.sum(local * self.cell_w))
        return out

    def __call__(self, state: SolverState) -> np.ndarray:
        return self.errors(state.v_curr, state.S_curr, state.t)


def error_norm(snapshots: Sequence[tuple[np.ndarray, np.ndarray, float]], case: Case,
               area_normalized: bool = True) -> np.ndarray:
    """Max over ``(v, S, t)`` snapshots of (e_u, e_qx, e_qy)."""
    ev = ErrorEvaluator(case, area_normalized)
    errs = [ev.errors(v, S, t) for v, S, t in snapshots]
    if not errs:
        raise ValueError("no snapshots given")
    return np.max(errs, axis=0)


def convergence_order(e_coarse: float, e_fine: float) -> float:
    """Observed order log2(e(h) / e(h/2))."""
    if not (e_coarse > 0 and e_fine > 0):
        raise ValueError(f"errors must be positive, got {e_coarse}, {e_fine}")
    return float(np.log2(e_coarse / e_fine))


# --------------------------------------------------------------------------
# Time marching with observers


@dataclass
class RunResult:
    times: np.ndarray
    errors: np.ndarray | None          # (n_samples, 3)
    energies: list[EnergyRecord]
    final: SolverState

    @property
    def max_errors(self) -> np.ndarray:
        return np.max(self.errors, axis=0)


def simulate(case: Case, dt: float, T: float, track_errors: bool = True,
             track_energy: bool = False, stride: int = 1, area_normalized: bool = True,
             state: SolverState | None = None) -> RunResult:
    """March to time T, sampling errors every ``stride`` steps (and at the
    start and end) and, optionally, the discrete energy at every step."""
    n_steps = n_steps_for(T, dt)
    if stride < 1:
        raise ValueError("stride must be >= 1")
    disc = case.disc
    if state is None:
        state = initialize(case.preset, case.gpc, disc, dt)
    ev = ErrorEvaluator(case, area_normalized) if track_errors else None
    times, errs, energies = [], [], []
    if ev is not None:
        S0 = disc.S(state.v_prev, 0.0)
        times.append(0.0)
        errs.append(ev.errors(state.v_prev, S0, 0.0))
        times.append(state.t)
        errs.append(ev(state))
    while state.n < n_steps:
        nxt = step(state, disc)
        if track_energy:
            rec = discrete_energy(state, nxt)
            if rec.E_fully < 0:
                raise InstabilityError(
                    f"discrete energy became negative at step {nxt.n}; dt={dt:g} "
                    "violates the stability condition")
            energies.append(rec)
        state = nxt
        if ev is not None and (state.n % stride == 0 or state.n == n_steps):
            times.append(state.t)
            errs.append(ev(state))
    return RunResult(np.array(times), np.array(errs) if ev is not None else None,
                     energies, state)


# --------------------------------------------------------------------------
# Convergence tables


@dataclass(frozen=True)
class ErrorReport:
    """Errors per mesh size and observed orders between consecutive sizes.

    ``e_qy`` is the error of the second spatial component of q.
    """

    h: tuple[float, ...]
    e_u: tuple[float, ...]
    e_qx: tuple[float, ...]
    e_qy: tuple[float, ...]

    def __post_init__(self):
        for e in (self.e_u, self.e_qx, self.e_qy):
            if len(e) != len(self.h) or any(x < 0 for x in e):
                raise ValueError("errors must be nonnegative and one per mesh size")

    def orders(self, which: str) -> list[float | None]:
        e = getattr(self, which)
        out = [None]
        for a, b in zip(e[:-1], e[1:]):
            out.append(convergence_order(a, b) if a > 0 and b > 0 else None)
        return out

    def rows(self) -> list[dict]:
        ou, ox, oy = self.orders("e_u"), self.orders("e_qx"), self.orders("e_qy")
        return [dict(h=self.h[i], e_u=self.e_u[i], order_u=ou[i], e_qx=self.e_qx[i],
                     order_qx=ox[i], e_qy=self.e_qy[i], order_qy=oy[i])
                for i in range(len(self.h))]


def convergence_level(preset: ExactSolutionPreset, P: int, k: int, h: float, dt: float, T: float,
                      flux: FluxConvention = FluxConvention(), boundary: str = "exact",
                      y_nodes: int | None = None, area_normalized: bool = True) -> np.ndarray:
    """L-infinity-in-time errors (e_u, e_qx, e_qy) for a single mesh size."""
    case = build_case(preset, P, k, h, flux, boundary, y_nodes)
    return simulate(case, dt, T, area_normalized=area_normalized).max_errors


def convergence_study(preset: ExactSolutionPreset, P: int, k: int, hs: Sequence[float], dt: float,
                      T: float, mapper: Callable = map, **kw) -> ErrorReport:
    """Convergence table over mesh sizes; ``mapper`` may be a pool's map."""
    hs = sorted(hs, reverse=True)
    results = list(mapper(_level_job, [(preset, P, k, h, dt, T, kw) for h in hs]))
    errs = np.array(results)
    return ErrorReport(tuple(hs), tuple(errs[:, 0]), tuple(errs[:, 1]), tuple(errs[:, 2]))


def _level_job(args):
    preset, P, k, h, dt, T, kw = args
    return convergence_level(preset, P, k, h, dt, T, **kw)


# --------------------------------------------------------------------------
# Energy traces


@dataclass(frozen=True)
class EnergyTrace:
    records: tuple[EnergyRecord, ...]

    @property
    def drift(self) -> float:
        """max_n |E^n - E^1| / |E^1| of the fully discrete energy."""
        E = np.array([r.E_fully for r in self.records])
        if E.size == 0:
            return 0.0
        if E[0] == 0:
            return float(np.max(np.abs(E)))
        return float(np.max(np.abs(E - E[0])) / abs(E[0]))

    @property
    def identity_error(self) -> float:
        """Largest relative gap between the two equivalent energy forms."""
        gaps = [abs(r.E_fully - r.E_alt) / max(abs(r.E_fully), 1e-300)
                for r in self.records if r.E_fully != 0 or r.E_alt != 0]
        return float(max(gaps, default=0.0))


def energy_trace(case: Case, dt: float, n_steps: int) -> EnergyTrace:
    res = simulate(case, dt, n_steps * dt, track_errors=False, track_energy=True)
    return EnergyTrace(tuple(res.energies))


# --------------------------------------------------------------------------
# gPC order sweep


@dataclass(frozen=True)
class GpcSweep:
    P: tuple[int, ...]
    e_u: tuple[float, ...]
    plateau_start: int | None
    """First order whose successor no longer improves by the decay ratio (None: no plateau)."""

    def rows(self) -> list[dict]:
        return [dict(P=p, M=None, e_u=e, plateau=(self.plateau_start is not None
                                                 and p >= self.plateau_start))
                for p, e in zip(self.P, self.e_u)]


def detect_plateau(errors: Sequence[float], ratio: float = 0.5) -> int | None:
    """Index of the first entry after which the error stops shrinking by ``ratio``."""
    for i in range(len(errors) - 1):
        if errors[i + 1] > ratio * errors[i]:
            return i
    return None


def gpc_sweep(preset: ExactSolutionPreset, P_values: Sequence[int], k: int, h: float, dt: float,
              T: float, ratio: float = 0.5, mapper: Callable = map, **kw) -> GpcSweep:
    P_values = sorted(P_values)
    errs = list(mapper(_level_job, [(preset, P, k, h, dt, T, kw) for P in P_values]))
    e_u = tuple(float(e[0]) for e in errs)
    start = detect_plateau(e_u, ratio)
    return GpcSweep(tuple(P_values), e_u, None if start is None else P_values[start])


# --------------------------------------------------------------------------
# Coefficient perturbation


@dataclass(frozen=True)
class PerturbationRun:
    eps: float
    times: np.ndarray
    D: np.ndarray

    @property
    def growth(self) -> float:
        """max_t D(t) / (t + 1)."""
        return float(np.max(self.D / (self.times + 1.0)))

    @property
    def slope(self) -> float:
        """Least-squares slope of D(t)/(t+1) against t."""
        if len(self.times) < 2:
            return 0.0
        return float(np.polyfit(self.times, self.D / (self.times + 1.0), 1)[0])


def perturbation_distance(case: Case, other: Case, dt: float, T: float,
                          stride: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """D(t) = sqrt(E||(u - u~)_t||^2) + sqrt(E||q - q~||^2) for two systems
    started from the same discrete data (that of ``case``)."""
    n_steps = n_steps_for(T, dt)
    a = initialize(case.preset, case.gpc, case.disc, dt)
    b = SolverState(a.v_prev, a.v_curr, other.disc.S(a.v_curr, a.t), a.n, dt)

    def dist(x: SolverState, y: SolverState) -> float:
        dv = ((x.v_curr - x.v_prev) - (y.v_curr - y.v_prev)) / dt
        return float(np.sqrt(np.vdot(dv, dv)) + np.linalg.norm(x.S_curr - y.S_curr))

    times, D = [a.t], [dist(a, b)]
    while a.n < n_steps:
        a, b = step(a, case.disc), step(b, other.disc)
        if a.n % stride == 0 or a.n == n_steps:
            times.append(a.t)
            D.append(dist(a, b))
    return np.array(times), np.array(D)


def perturbation_study(case: Case, eps_levels: Sequence[float], dt: float, T: float,
                       stride: int = 1) -> list[PerturbationRun]:
    """Solve with a and with a~^2 = a^2 + eps for each eps."""
    out = []
    for eps in eps_levels:
        other = rebuild(case, perturbed(case.preset.model, eps))
        t, D = perturbation_distance(case, other, dt, T, stride)
        out.append(PerturbationRun(float(eps), t, D))
    return out


def linear_scaling_ratios(runs: Sequence[PerturbationRun]) -> list[float]:
    """Ratios (growth_i / growth_{i+1}) / (eps_i / eps_{i+1}); 1 means exactly linear."""
    return [(a.growth / b.growth) / (a.eps / b.eps) for a, b in zip(runs[:-1], runs[1:])]


# --------------------------------------------------------------------------
# Long-time error growth


@dataclass(frozen=True)
class LongTimeSeries:
    times: np.ndarray
    e_u: np.ndarray

    @property
    def growth(self) -> float:
        """sup_t e_u(t) / (t + 1)."""
        return float(np.max(self.e_u / (self.times + 1.0)))

    @property
    def envelope_exponent(self) -> float:
        """Slope of log(running max of e_u) against log(1 + t)."""
        env = np.maximum.accumulate(self.e_u)
        return float(np.polyfit(np.log1p(self.times), np.log(env), 1)[0])

    def max_until(self, t: float) -> float:
        return float(np.max(self.e_u[self.times <= t + 1e-12]))


def long_time_error(case: Case, dt: float, T: float, stride: int) -> LongTimeSeries:
    res = simulate(case, dt, T, stride=stride)
    return LongTimeSeries(res.times, res.errors[:, 0])


def initial_projection_error(case: Case, area_normalized: bool = True) -> np.ndarray:
    """Errors of the projected initial data (v^0, S(v^0)) at t = 0."""
    u0 = preset_modes(case.preset, case.gpc, 0.0, "u")
    state = initialize_from(u0, u0, case.disc, 1.0)
    ev = ErrorEvaluator(case, area_normalized)
    return ev.errors(state.v_prev, case.disc.S(state.v_prev, 0.0), 0.0)
