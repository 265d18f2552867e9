"""Shared domain types: model parameters, the periodic grid, and state fields."""

from dataclasses import dataclass
from enum import Enum
from typing import Mapping

import numpy as np


class FFMFGError(ValueError):
    """Base class for validation errors raised by this package."""


class AlphaOutOfRangeError(FFMFGError):
    """Congestion exponent outside the open interval (0, 2)."""


class NegativeViscosityError(FFMFGError):
    pass


class NegativeCouplingError(FFMFGError):
    """Coupling strength K must be nonnegative."""


class NonPositiveDensityError(FFMFGError):
    pass


class NonPositiveVError(FFMFGError):
    """v must be strictly positive when positivity was requested."""


class NonFiniteError(FFMFGError):
    pass


class DomainError(FFMFGError):
    """Pointwise evaluation outside the admissible region v>0, m>0."""


class Coupling(str, Enum):
    NONE = "none"
    MONOTONE_FF = "monotone_ff"
    ANTIMONOTONE = "antimonotone"


@dataclass(frozen=True)
class ModelParams:
    """Problem parameters.

    alpha: congestion exponent, restricted to 0 < alpha < 2.
    epsilon: viscosity, >= 0.
    p: drift offset entering v = p + u_x.
    coupling: density coupling of the first equation.
    K: coupling strength, >= 0 (ignored and stored as 0 when coupling is none).
    """

    alpha: float
    epsilon: float = 0.0
    p: float = 0.0
    coupling: Coupling = Coupling.NONE
    K: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coupling", Coupling(self.coupling))
        for name in ("alpha", "epsilon", "p", "K"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise NonFiniteError(f"parameter {name!r} is not finite: {value}")
        if not 0.0 < self.alpha < 2.0:
            raise AlphaOutOfRangeError(
                f"alpha must lie in (0, 2), got {self.alpha}"
            )
        if self.epsilon < 0.0:
            raise NegativeViscosityError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.K < 0.0:
            raise NegativeCouplingError(f"K must be >= 0, got {self.K}")
        if self.coupling is Coupling.NONE and self.K != 0.0:
            object.__setattr__(self, "K", 0.0)


_PARAM_KEYS = ("alpha", "epsilon", "p", "coupling", "K")


def validate_params(raw: Mapping | None = None, **kwargs) -> ModelParams:
    """Build ModelParams from a raw record, rejecting unknown or invalid keys."""
    merged = dict(raw or {})
    merged.update(kwargs)
    unknown = sorted(set(merged) - set(_PARAM_KEYS))
    if unknown:
        raise FFMFGError(
            f"unknown parameter keys {unknown}; accepted keys are {list(_PARAM_KEYS)}"
        )
    if "alpha" not in merged:
        raise FFMFGError("parameter 'alpha' is required")
    return ModelParams(**merged)


@dataclass(frozen=True)
class Grid1D:
    """Uniform cell-centered periodic grid on the unit torus [0, 1]."""

    n_cells: int

    def __post_init__(self):
        if not isinstance(self.n_cells, (int, np.integer)) or isinstance(self.n_cells, bool):
            raise FFMFGError(f"n_cells must be an integer, got {self.n_cells!r}")
        if self.n_cells < 8:
            raise FFMFGError(f"n_cells must be >= 8, got {self.n_cells}")

    @property
    def dx(self) -> float:
        return 1.0 / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.dx

    def neighbor(self, i: int, offset: int) -> int:
        """Index of the cell `offset` places from cell i, wrapping periodically."""
        return (i + offset) % self.n_cells


@dataclass(frozen=True, eq=False)
class State:
    """Cell fields (v, m) at time t. Arrays are copied and frozen on construction."""

    t: float
    v: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        for name in ("v", "m"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_cells(self) -> int:
        return self.m.shape[0]

    @property
    def dx(self) -> float:
        return 1.0 / self.n_cells


def validate_state(
    grid: Grid1D,
    v: np.ndarray,
    m: np.ndarray,
    require_positive_v: bool = False,
    t: float = 0.0,
) -> State:
    """Validate fields against the grid and return an immutable State.

    m must be strictly positive everywhere; v must be strictly positive when
    require_positive_v is set (region-A experiments).
    """
    v = np.asarray(v, dtype=float)
    m = np.asarray(m, dtype=float)
    if v.shape != (grid.n_cells,) or m.shape != (grid.n_cells,):
        raise FFMFGError(
            f"fields must have shape ({grid.n_cells},); got v {v.shape}, m {m.shape}"
        )
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(m)) and np.isfinite(t)):
        raise NonFiniteError("state contains non-finite entries")
    if np.any(m <= 0.0):
        i = int(np.argmin(m))
        raise NonPositiveDensityError(f"m must be > 0 everywhere; m[{i}] = {m[i]}")
    if require_positive_v and np.any(v <= 0.0):
        i = int(np.argmin(v))
        raise NonPositiveVError(f"v must be > 0 everywhere; v[{i}] = {v[i]}")
    return State(t=float(t), v=v, m=m)
