"""First-order finite-volume semi-discretization with SSP-RK2 time stepping.

Rusanov (local Lax-Friedrichs) interface fluxes on the periodic unit torus,
explicit centred diffusion for the viscous terms, CFL-controlled steps, and
blow-up detection through a density floor and non-finiteness checks.
"""

import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Tuple

import numpy as np

from .core import Coupling, FFMFGError, ModelParams, State
from .analysis import flux_phys, flux_jacobian_entries, _disc
from .oracle import spectral_radius_2x2


class DegenerateSpeedWarning(RuntimeWarning):
    """All wave speeds vanished in an inviscid run; fallback time step used."""


class LossOfHyperbolicityWarning(RuntimeWarning):
    """Complex characteristic speeds encountered in a coupled flux."""


class Termination(str, Enum):
    COMPLETED = "completed"
    BLOW_UP = "blow_up"
    STEP_CAP = "step_cap"


@dataclass(frozen=True)
class SolverConfig:
    cfl: float = 0.4
    limiter: str = "none"
    m_floor: float = 1e-10
    max_steps: int = 5_000_000
    store_every: int = 1

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise FFMFGError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.limiter != "none":
            raise FFMFGError("only the first-order scheme (limiter 'none') exists")
        if self.m_floor <= 0.0:
            raise FFMFGError(f"m_floor must be > 0, got {self.m_floor}")
        if self.max_steps < 1 or self.store_every < 1:
            raise FFMFGError("max_steps and store_every must be >= 1")


@dataclass(eq=False)
class Trajectory:
    """Stored snapshots (state, dt-of-producing-step) and a termination reason."""

    snapshots: List[Tuple[State, float]] = field(default_factory=list)
    reason: Termination = Termination.COMPLETED
    n_steps: int = 0

    @property
    def states(self) -> List[State]:
        return [s for s, _ in self.snapshots]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s, _ in self.snapshots])

    @property
    def final_state(self) -> State:
        return self.snapshots[-1][0]


def _speed_bound(v: np.ndarray, m: np.ndarray, params: ModelParams) -> np.ndarray:
    """Per-cell spectral-radius bound of the flux Jacobian."""
    if params.coupling is Coupling.NONE:
        # exact closed form: max |lambda| = (alpha + disc) |v| / (2 m^alpha)
        return (params.alpha + _disc(params.alpha)) * np.abs(v) / (2.0 * m**params.alpha)
    j11, j12, j21, j22 = flux_jacobian_entries(v, m, params)
    bound, had_complex = spectral_radius_2x2(j11, j12, j21, j22)
    if had_complex:
        warnings.warn(
            "complex characteristic speeds for the coupled flux; using "
            "|trace|/2 + sqrt(|det|) as the speed bound",
            LossOfHyperbolicityWarning,
            stacklevel=3,
        )
    return bound


def rusanov_interface_flux(left, right, params: ModelParams) -> np.ndarray:
    """Rusanov flux between states given as (v, m) pairs (vectorized).

    F_hat = (F(U_L) + F(U_R))/2 - s (U_R - U_L)/2 with s the larger
    spectral-radius bound of the two adjacent Jacobians. Consistency
    F_hat(U, U) = F(U) is exact.
    """
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    fl = flux_phys(left[0], left[1], params)
    fr = flux_phys(right[0], right[1], params)
    s = np.maximum(
        _speed_bound(left[0], left[1], params),
        _speed_bound(right[0], right[1], params),
    )
    return 0.5 * (fl + fr) - 0.5 * s * (right - left)


def _rhs(v: np.ndarray, m: np.ndarray, dx: float, params: ModelParams):
    """Semi-discrete right-hand side on raw arrays (hot path)."""
    U = np.stack([v, m])
    F = flux_phys(v, m, params)
    b = _speed_bound(v, m, params)
    UR = np.roll(U, -1, axis=1)
    FR = np.roll(F, -1, axis=1)
    s = np.maximum(b, np.roll(b, -1))
    fhat = 0.5 * (F + FR) - 0.5 * s * (UR - U)  # interface i+1/2 at index i
    rhs = -(fhat - np.roll(fhat, 1, axis=1)) / dx
    if params.epsilon > 0.0:
        rhs = rhs + params.epsilon * (
            np.roll(U, -1, axis=1) - 2.0 * U + np.roll(U, 1, axis=1)
        ) / (dx * dx)
    return rhs


def semidiscrete_rhs(state: State, params: ModelParams):
    """Finite-volume rates (dv/dt, dm/dt) with periodic wrap.

    Per cell: -(F_hat_{i+1/2} - F_hat_{i-1/2})/dx plus the centred
    second-difference diffusion epsilon (U_{i+1} - 2 U_i + U_{i-1})/dx^2.
    """
    rhs = _rhs(state.v, state.m, state.dx, params)
    return rhs[0], rhs[1]


def cfl_dt(state: State, params: ModelParams, config: SolverConfig) -> float:
    """CFL-limited step: cfl * min(dx / s_max, dx^2 / (2 epsilon)).

    With s_max = 0 and epsilon = 0 there is no limiting scale; the fallback
    cfl * dx is returned and a DegenerateSpeedWarning is recorded.
    """
    dx = state.dx
    s_max = float(np.max(_speed_bound(state.v, state.m, params)))
    bounds = []
    if s_max > 0.0:
        bounds.append(dx / s_max)
    if params.epsilon > 0.0:
        bounds.append(dx * dx / (2.0 * params.epsilon))
    if not bounds:
        warnings.warn(
            "all wave speeds vanish and epsilon = 0; falling back to dt = cfl * dx",
            DegenerateSpeedWarning,
            stacklevel=2,
        )
        return config.cfl * dx
    return config.cfl * min(bounds)


def _healthy(v: np.ndarray, m: np.ndarray, floor: float) -> bool:
    return (
        bool(np.all(np.isfinite(v)))
        and bool(np.all(np.isfinite(m)))
        and bool(np.all(m >= floor))
    )


def advance(
    initial: State,
    t_final: float,
    params: ModelParams,
    config: SolverConfig = SolverConfig(),
    observer: Optional[Callable[[State], None]] = None,
) -> Trajectory:
    """Integrate to t_final with Heun (SSP-RK2) steps.

    The observer is invoked on the initial state and after every accepted
    step. Snapshots are stored every config.store_every steps (always
    including the first and last). Any density below config.m_floor or any
    non-finite value terminates the run as blow_up; validation failures are
    reported through the termination reason, never raised mid-run.
    """
    if t_final <= initial.t:
        raise FFMFGError(f"t_final = {t_final} must exceed initial.t = {initial.t}")

    traj = Trajectory()
    traj.snapshots.append((initial, 0.0))
    if observer is not None:
        observer(initial)
    if not _healthy(initial.v, initial.m, config.m_floor):
        traj.reason = Termination.BLOW_UP
        return traj

    dx = initial.dx
    t = initial.t
    v, m = initial.v, initial.m
    state = initial
    time_tol = 1e-13 * max(1.0, abs(t_final))

    def stop(reason: Termination) -> Trajectory:
        # keep the last accepted state even when thinning snapshots
        if traj.snapshots[-1][0] is not state:
            traj.snapshots.append((state, 0.0))
        traj.reason = reason
        return traj

    while t < t_final - time_tol:
        if traj.n_steps >= config.max_steps:
            return stop(Termination.STEP_CAP)
        dt = min(cfl_dt(state, params, config), t_final - t)

        k1 = _rhs(v, m, dx, params)
        v1 = v + dt * k1[0]
        m1 = m + dt * k1[1]
        if not (np.all(np.isfinite(v1)) and np.all(np.isfinite(m1)) and np.all(m1 > 0.0)):
            return stop(Termination.BLOW_UP)
        k2 = _rhs(v1, m1, dx, params)
        v = 0.5 * v + 0.5 * (v1 + dt * k2[0])
        m = 0.5 * m + 0.5 * (m1 + dt * k2[1])
        if not _healthy(v, m, config.m_floor):
            return stop(Termination.BLOW_UP)

        t = t + dt
        if abs(t - t_final) <= time_tol:
            t = t_final
        state = State(t=t, v=v, m=m)
        traj.n_steps += 1
        if observer is not None:
            observer(state)
        if traj.n_steps % config.store_every == 0 or t >= t_final - time_tol:
            traj.snapshots.append((state, dt))

    return stop(Termination.COMPLETED)
