"""Forward-forward mean-field games with congestion as 2x2 conservation laws.

Library layout:
  core         shared types (parameters, periodic grid, states)
  analysis     closed-form flux, eigenstructure, entropies, invariants
  oracle       independent finite-difference / eigen / level-set checks
  solver       Rusanov finite volumes with SSP-RK2 stepping
  waves        exact traveling waves and initial-data constructors
  diagnostics  runtime monitors and PDE residuals
  studies      convergence and monitored-run drivers
  verification desk-scale machine verification suite
  cli          configuration, simulation runs, sweeps
"""

from .core import (
    Coupling,
    FFMFGError,
    Grid1D,
    ModelParams,
    State,
    validate_params,
    validate_state,
)
from .analysis import (
    EntropyPair,
    EigenPair,
    RiemannSpec,
    convexity_check,
    density_lower_bound,
    eigenstructure,
    entropy_eval,
    entropy_exponent_b,
    entropy_residual_pde,
    flux_jacobian,
    flux_phys,
    genuine_nonlinearity,
    riemann_w,
    riemann_z,
    theta_alpha,
)
from .oracle import FDConfig, eig2_numeric, fd_derivatives, level_set_solve
from .solver import SolverConfig, Termination, Trajectory, advance, cfl_dt, rusanov_interface_flux, semidiscrete_rhs
from .waves import (
    ProfileSpec,
    WaveSpec,
    build_traveling_wave,
    constant_state,
    exact_traveling_wave_at,
    v_from_value_function,
)
from .diagnostics import (
    MonitorCollector,
    MonitorRow,
    MonitorSeries,
    entropy_dissipation_check,
    maximum_principle_check,
    monitor_row,
    pde_residual_trajectory,
)

__version__ = "0.1.0"
