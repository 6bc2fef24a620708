"""Leap-frog time stepping for the semi-discrete LDG system and its conserved energy."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterator

import numpy as np

from .coefficients import ExactSolutionPreset, GalerkinCoeffField
from .gpc import GpcBasis
from .ldg import (BoundaryData, FluxConvention, compute_acceleration, compute_S,
                  preset_modes, project_initial_plain, project_initial_vplus)

BLOWUP = 1e12


class InstabilityError(RuntimeError):
    """Raised when the leap-frog iterates blow up, usually from a too large time step."""


@dataclass(frozen=True)
class Discretization:
    """Everything the stepper needs besides the state."""

    coeff: GalerkinCoeffField
    flux: FluxConvention = field(default_factory=FluxConvention)
    bc: BoundaryData = field(default_factory=BoundaryData)

    def S(self, v: np.ndarray, t: float) -> np.ndarray:
        return compute_S(v, self.coeff, self.flux, self.bc, t)

    def acceleration(self, S: np.ndarray, t: float) -> np.ndarray:
        return compute_acceleration(S, self.coeff, self.flux, self.bc, t)


@dataclass(frozen=True)
class SolverState:
    v_prev: np.ndarray
    v_curr: np.ndarray
    S_curr: np.ndarray
    n: int
    dt: float

    @property
    def t(self) -> float:
        return self.n * self.dt


@dataclass(frozen=True)
class EnergyRecord:
    n: int
    E_fully: float
    E_alt: float
    E_semi: float


def initialize_from(u0: Callable, v0: Callable, disc: Discretization, dt: float) -> SolverState:
    """Start from mode functions ``u0, v0 (X, Z, region) -> (..., M)``.

    v^0 is the trace-matching projection of u0, the velocity the A-weighted
    projection of v0, and v^1 a second-order Taylor step.
    """
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    coeff = disc.coeff
    v_0 = project_initial_vplus(u0, coeff, disc.flux)
    w_0 = project_initial_plain(v0, coeff)
    a_0 = disc.acceleration(disc.S(v_0, 0.0), 0.0)
    v_1 = v_0 + dt * w_0 + 0.5 * dt * dt * a_0
    return SolverState(v_0, v_1, disc.S(v_1, dt), 1, float(dt))


def initialize(preset: ExactSolutionPreset, gpc: GpcBasis, disc: Discretization, dt: float) -> SolverState:
    return initialize_from(preset_modes(preset, gpc, 0.0, "u"),
                           preset_modes(preset, gpc, 0.0, "u_t"), disc, dt)


def step(state: SolverState, disc: Discretization) -> SolverState:
    dt = state.dt
    v_next = 2.0 * state.v_curr - state.v_prev + dt * dt * disc.acceleration(state.S_curr, state.t)
    peak = np.max(np.abs(v_next)) if v_next.size else 0.0
    if not np.isfinite(peak) or peak > BLOWUP:
        raise InstabilityError(
            f"leap-frog iterates blew up at step {state.n + 1} (dt={dt:g}); "
            "the time step is probably above the stability limit, try suggest_dt")
    t_next = (state.n + 1) * dt
    return SolverState(state.v_curr, v_next, disc.S(v_next, t_next), state.n + 1, dt)


def march(state: SolverState, disc: Discretization, n_steps: int) -> Iterator[SolverState]:
    """Yield the states after each of ``n_steps`` steps."""
    for _ in range(n_steps):
        state = step(state, disc)
        yield state


def reversed_state(state: SolverState, disc: Discretization) -> SolverState:
    """State that retraces the trajectory backwards (time runs from t_n downwards)."""
    return SolverState(state.v_curr, state.v_prev, disc.S(state.v_prev, state.t - state.dt),
                       state.n, state.dt)


def _sq(a: np.ndarray) -> float:
    return float(np.vdot(a, a))


def discrete_energy(prev: SolverState, curr: SolverState) -> EnergyRecord:
    """Energies of the step pair ``prev`` (level n) and ``curr`` (level n+1).

    Field norms are coefficient 2-norms: the local basis and the gPC basis
    are both orthonormal.
    """
    if curr.n != prev.n + 1:
        raise ValueError("energy needs consecutive states")
    dt = curr.dt
    dv = (curr.v_curr - curr.v_prev) / dt
    S0, S1 = prev.S_curr, curr.S_curr
    kinetic = _sq(dv)
    e_fully = kinetic + _sq(0.5 * (S1 + S0)) - 0.25 * _sq(S1 - S0)
    e_alt = kinetic + float(np.vdot(S0, S1))
    vel = (curr.v_curr - prev.v_prev) / (2 * dt)
    e_semi = _sq(vel) + _sq(S0)
    return EnergyRecord(curr.n, e_fully, e_alt, e_semi)


def suggest_dt(coeff: GalerkinCoeffField, safety: float = 0.1) -> float:
    """Advisory step c * h_min / ((2k+1) * lambda_max(A))."""
    mesh, k = coeff.mesh, coeff.basis.degree
    return safety * min(mesh.hx, mesh.hz) / ((2 * k + 1) * coeff.lambda_max())


def with_dt(state: SolverState, dt: float) -> SolverState:
    return replace(state, dt=dt)
