"""Runtime monitors: mass, norms, entropy integrals and their dissipation,
invariant extrema, the invariant-region check, and PDE residuals on stored
trajectories.

Quadrature is the midpoint rule (spectrally accurate for smooth periodic
integrands); spatial derivatives are second-order periodic central
differences, matching the solver's order.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .core import DomainError, FFMFGError, ModelParams, State
from .analysis import (
    EntropyPair,
    RiemannSpec,
    density_lower_bound,
    entropy_hessian_entries,
    flux_jacobian_entries,
    riemann_values,
)
from .solver import Trajectory


class InsufficientSnapshotsError(FFMFGError):
    pass


@dataclass(frozen=True)
class MonitorRow:
    t: float
    mass: float
    min_m: float
    min_v: float
    max_z: float
    max_w: float
    entropy: float
    dissipation_rhs: float
    lp_m: float
    lq_v: float


COLUMNS = (
    "t",
    "mass",
    "min_m",
    "min_v",
    "max_z",
    "max_w",
    "entropy",
    "dissipation_rhs",
    "lp_m",
    "lq_v",
)


@dataclass(eq=False)
class MonitorSeries:
    """Ordered monitor rows with the exponents and run metadata attached."""

    entropy: EntropyPair
    rspec: RiemannSpec
    p: float
    q: float
    epsilon: float
    rows: List[MonitorRow] = field(default_factory=list)

    def append(self, row: MonitorRow) -> None:
        if self.rows and row.t <= self.rows[-1].t:
            raise FFMFGError(
                f"monitor times must increase strictly: {row.t} after {self.rows[-1].t}"
            )
        self.rows.append(row)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(row, name) for row in self.rows])


def _central_diff(f: np.ndarray, dx: float) -> np.ndarray:
    return (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * dx)


def monitor_row(
    state: State,
    params: ModelParams,
    entropy: EntropyPair,
    rspec: RiemannSpec,
    p: float = 4.0,
    q: float = 4.0,
) -> MonitorRow:
    """All monitored quantities of one snapshot.

    The invariant extrema and the entropy integral need the state in the
    region v > 0; a state outside it raises DomainError.
    """
    v, m, dx = state.v, state.m, state.dx
    if np.any(v <= 0.0):
        raise DomainError("invariants requested but v <= 0 somewhere on the grid")
    z, w = riemann_values(rspec, v, m)
    a, b = entropy.a, entropy.b
    eta = float(np.sum(v**a * m**b) * dx)

    v_x = _central_diff(v, dx)
    m_x = _central_diff(m, dx)
    hvv, hvm, hmm = entropy_hessian_entries(a, b, v, m)
    quad = hvv * v_x * v_x + 2.0 * hvm * v_x * m_x + hmm * m_x * m_x
    dissipation = -params.epsilon * float(np.sum(quad) * dx)

    return MonitorRow(
        t=state.t,
        mass=float(np.sum(m) * dx),
        min_m=float(np.min(m)),
        min_v=float(np.min(v)),
        max_z=float(np.max(z)),
        max_w=float(np.max(w)),
        entropy=eta,
        dissipation_rhs=dissipation,
        lp_m=float((np.sum(np.abs(m) ** p) * dx) ** (1.0 / p)),
        lq_v=float((np.sum(np.abs(v) ** q) * dx) ** (1.0 / q)),
    )


class MonitorCollector:
    """Observer for solver.advance: appends one MonitorRow per state."""

    def __init__(
        self,
        params: ModelParams,
        entropy: EntropyPair,
        rspec: RiemannSpec,
        p: float = 4.0,
        q: float = 4.0,
    ):
        self.params = params
        self.series = MonitorSeries(
            entropy=entropy, rspec=rspec, p=p, q=q, epsilon=params.epsilon
        )

    def __call__(self, state: State) -> None:
        self.series.append(
            monitor_row(
                state,
                self.params,
                self.series.entropy,
                self.series.rspec,
                self.series.p,
                self.series.q,
            )
        )


@dataclass(frozen=True)
class MaxPrincipleReport:
    passed: bool
    level: float
    max_z_seen: float
    max_w_seen: float
    min_m_seen: float
    density_bound: float
    witness_index: Optional[int]


def maximum_principle_check(
    series: MonitorSeries, M: float, tol: float = 1e-2
) -> MaxPrincipleReport:
    """Invariant-region check: z, w stay below M and m above its floor.

    Requires a viscous run (epsilon > 0) whose initial invariant maxima do
    not already exceed M. Passes iff every row keeps max(z, w) <= M (1+tol)
    and min m >= (1-tol) * density_lower_bound(M).
    """
    if series.epsilon <= 0.0:
        raise FFMFGError("maximum principle check requires a viscous run (epsilon > 0)")
    if not series.rows:
        raise FFMFGError("empty monitor series")
    first = series.rows[0]
    if max(first.max_z, first.max_w) > M:
        raise FFMFGError(
            f"initial invariants already exceed M = {M}: "
            f"max_z = {first.max_z}, max_w = {first.max_w}"
        )
    bound = density_lower_bound(M, series.rspec)
    ceiling = M * (1.0 + tol)
    floor = (1.0 - tol) * bound
    witness = None
    for k, row in enumerate(series.rows):
        if max(row.max_z, row.max_w) > ceiling or row.min_m < floor:
            witness = k
            break
    return MaxPrincipleReport(
        passed=witness is None,
        level=M,
        max_z_seen=float(np.max(series.column("max_z"))),
        max_w_seen=float(np.max(series.column("max_w"))),
        min_m_seen=float(np.min(series.column("min_m"))),
        density_bound=bound,
        witness_index=witness,
    )


@dataclass(frozen=True)
class DissipationReport:
    passed: bool
    n_interior: int
    agree_fraction: float
    max_step_increase: float
    monotone_checked: bool
    monotone_ok: Optional[bool]


def entropy_dissipation_check(
    series: MonitorSeries,
    tol_rel: float = 0.05,
    abs_floor: float = 1e-10,
    min_fraction: float = 0.9,
) -> DissipationReport:
    """Compare d/dt of the entropy integral with the recorded dissipation.

    On interior rows the centred difference of the entropy column must match
    dissipation_rhs within tol_rel (relative to the larger magnitude), or
    both must sit below abs_floor. For convex pairs the entropy must also be
    non-increasing within 1e-8 per step.
    """
    if series.epsilon <= 0.0:
        raise FFMFGError("dissipation identity check requires a viscous run (epsilon > 0)")
    rows = series.rows
    if len(rows) < 3:
        raise InsufficientSnapshotsError("need at least 3 monitor rows")
    t = series.column("t")
    eta = series.column("entropy")
    rhs = series.column("dissipation_rhs")
    lhs = (eta[2:] - eta[:-2]) / (t[2:] - t[:-2])
    mid = rhs[1:-1]
    denom = np.maximum(np.abs(lhs), np.abs(mid))
    agree = (np.abs(lhs - mid) <= tol_rel * denom) | (
        (np.abs(lhs) <= abs_floor) & (np.abs(mid) <= abs_floor)
    )
    fraction = float(np.mean(agree))

    convex = series.entropy.is_convex()
    steps = np.diff(eta)
    max_increase = float(np.max(steps)) if steps.size else 0.0
    monotone_ok = bool(max_increase <= 1e-8) if convex else None

    passed = fraction >= min_fraction and (monotone_ok is not False)
    return DissipationReport(
        passed=passed,
        n_interior=int(lhs.size),
        agree_fraction=fraction,
        max_step_increase=max_increase,
        monotone_checked=convex,
        monotone_ok=monotone_ok,
    )


@dataclass(frozen=True, eq=False)
class PdeResidualReport:
    """Max-norm residuals of both equations per interior snapshot."""

    times: np.ndarray
    res_v: np.ndarray
    res_m: np.ndarray


def pde_residual_trajectory(
    traj: "Trajectory | Sequence[State]",
    params: ModelParams,
    flux_sign: float = 1.0,
) -> PdeResidualReport:
    """Nonconservative PDE residuals on uniformly spaced snapshots (alpha = 1).

    First equation: v_t + flux_sign * (dF1/dv v_x + dF1/dm m_x); for the
    monotone coupling this is v_t + (v/m) v_x - (K + v^2/(2 m^2)) m_x.
    Second equation: m_t - v_x. Time derivatives are centred across snapshot
    triples, spatial derivatives centred and periodic, so the residual of an
    exact smooth solution is O(dt^2 + dx^2).
    """
    if params.alpha != 1.0:
        raise FFMFGError("potential-form residuals are defined for alpha = 1 only")
    states = traj.states if isinstance(traj, Trajectory) else list(traj)
    if len(states) < 3:
        raise InsufficientSnapshotsError(
            f"need at least 3 snapshots, got {len(states)}"
        )
    times = np.array([s.t for s in states])
    gaps = np.diff(times)
    if np.any(np.abs(gaps - gaps[0]) > 1e-9 * max(abs(gaps[0]), 1e-300)):
        raise InsufficientSnapshotsError("snapshots must be uniformly spaced in time")
    dt = gaps[0]
    dx = states[0].dx

    out_t, out_v, out_m = [], [], []
    for k in range(1, len(states) - 1):
        sk = states[k]
        v, m = sk.v, sk.m
        v_t = (states[k + 1].v - states[k - 1].v) / (2.0 * dt)
        m_t = (states[k + 1].m - states[k - 1].m) / (2.0 * dt)
        v_x = _central_diff(v, dx)
        m_x = _central_diff(m, dx)
        j11, j12, j21, j22 = flux_jacobian_entries(v, m, params)
        res_v = v_t + flux_sign * (j11 * v_x + j12 * m_x)
        res_m = m_t + j21 * v_x + j22 * m_x
        out_t.append(sk.t)
        out_v.append(float(np.max(np.abs(res_v))))
        out_m.append(float(np.max(np.abs(res_m))))
    return PdeResidualReport(
        times=np.array(out_t), res_v=np.array(out_v), res_m=np.array(out_m)
    )
