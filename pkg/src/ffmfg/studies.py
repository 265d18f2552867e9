"""Reusable experiment drivers: wave convergence runs and monitored viscous runs."""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .core import Grid1D, ModelParams, State
from .analysis import EntropyPair, RiemannSpec, riemann_values
from .diagnostics import MonitorCollector, MonitorSeries
from .solver import SolverConfig, Trajectory, advance
from .waves import ProfileSpec, WaveSpec, build_traveling_wave, exact_traveling_wave_at


def l1_density_error(state: State, exact: State) -> float:
    """L1 distance between the density fields of two states on the same grid."""
    return float(np.sum(np.abs(state.m - exact.m)) / state.n_cells)


@dataclass(frozen=True, eq=False)
class WaveRunResult:
    n_cells: int
    error_l1: float
    trajectory: Trajectory
    exact_final: State


def wave_run(
    profile: ProfileSpec,
    wave: WaveSpec,
    params: ModelParams,
    n_cells: int,
    t_final: float,
    cfl: float = 0.4,
    store_every: int = 1_000_000,
    observer=None,
) -> WaveRunResult:
    """Integrate a traveling wave and measure the final L1 density error."""
    grid = Grid1D(n_cells)
    initial = build_traveling_wave(profile, wave, params, grid)
    config = SolverConfig(cfl=cfl, store_every=store_every)
    traj = advance(initial, t_final, params, config, observer=observer)
    exact = exact_traveling_wave_at(profile, wave, params, grid, t_final)
    return WaveRunResult(
        n_cells=n_cells,
        error_l1=l1_density_error(traj.final_state, exact),
        trajectory=traj,
        exact_final=exact,
    )


@dataclass(frozen=True)
class ConvergenceStudy:
    cells: Tuple[int, ...]
    errors: Tuple[float, ...]
    orders: Tuple[float, ...]


def wave_convergence_study(
    profile: ProfileSpec,
    wave: WaveSpec,
    params: ModelParams,
    cells: List[int],
    t_final: float,
    cfl: float = 0.4,
) -> ConvergenceStudy:
    """Errors and observed orders across a list of resolutions."""
    errors = [
        wave_run(profile, wave, params, n, t_final, cfl=cfl).error_l1 for n in cells
    ]
    orders = []
    for (n0, e0), (n1, e1) in zip(zip(cells, errors), zip(cells[1:], errors[1:])):
        orders.append(float(np.log(e0 / e1) / np.log(n1 / n0)))
    return ConvergenceStudy(
        cells=tuple(cells), errors=tuple(errors), orders=tuple(orders)
    )


@dataclass(frozen=True, eq=False)
class MonitoredRun:
    params: ModelParams
    trajectory: Trajectory
    series: MonitorSeries
    level: float


def invariant_region_run(
    alpha: float,
    epsilon: float = 0.05,
    n_cells: int = 200,
    t_final: float = 10.0,
    cfl: float = 0.4,
    entropy_a: float = 2.0,
    riemann_s: float = -1.0,
    r_factor: float = 1.2,
    p: float = 4.0,
    q: float = 4.0,
    amplitude: float = 0.3,
    level_factor: float = 1.05,
) -> MonitoredRun:
    """Viscous run from wave-shaped data v0 = m0^alpha with full monitoring.

    The invariant level is M = level_factor * max over the initial state of
    (z, w); r sits inside the convexity region at r_factor times its
    boundary value.
    """
    params = ModelParams(alpha=alpha, epsilon=epsilon)
    grid = Grid1D(n_cells)
    profile = ProfileSpec(kind="fourier", mean=1.0, amplitude=amplitude)
    m0 = profile.sample(grid.centers)
    v0 = m0**alpha
    initial = State(t=0.0, v=v0, m=m0)

    rspec_probe = RiemannSpec(alpha=alpha, s=riemann_s, r=-1.0)
    rspec = RiemannSpec(alpha=alpha, s=riemann_s, r=r_factor * rspec_probe.s1_threshold)
    z0, w0 = riemann_values(rspec, v0, m0)
    level = level_factor * float(max(np.max(z0), np.max(w0)))

    entropy = EntropyPair.for_alpha(alpha, entropy_a)
    collector = MonitorCollector(params, entropy, rspec, p=p, q=q)
    config = SolverConfig(cfl=cfl, store_every=1_000_000)
    traj = advance(initial, t_final, params, config, observer=collector)
    return MonitoredRun(
        params=params, trajectory=traj, series=collector.series, level=level
    )
