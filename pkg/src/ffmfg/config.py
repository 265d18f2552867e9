"""Run configuration: TOML document -> validated RunConfig.

Unknown keys are parse errors (listing the accepted keys); values violating
a constraint are validation errors naming the offending key. Both map to
exit code 2 in the CLI.
"""

from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .core import FFMFGError, Grid1D, ModelParams
from .analysis import EntropyPair, RiemannSpec
from .solver import SolverConfig
from .waves import ProfileSpec


class ConfigParseError(FFMFGError):
    pass


class ConfigValidationError(FFMFGError):
    pass


INITIAL_KINDS = ("traveling_wave", "fourier", "constant", "from_value_function")

# section -> key -> (type coercion, default); None default means required
SCHEMA = {
    "problem": {
        "alpha": (float, None),
        "epsilon": (float, 0.0),
        "p": (float, 0.0),
        "coupling": (str, "none"),
        "K": (float, 0.0),
    },
    "grid": {
        "n_cells": (int, None),
    },
    "time": {
        "t_final": (float, None),
        "cfl": (float, 0.4),
    },
    "initial": {
        "kind": (str, "fourier"),
        "mean": (float, 1.0),
        "amplitude": (float, 0.3),
        "mode": (int, 1),
        "phase": (float, 0.0),
        "sign": (int, 1),
    },
    "monitors": {
        "entropy_a": (float, 2.0),
        "riemann_s": (float, -1.0),
        "riemann_r": (float, None),  # default 1.2 * S1 threshold, set late
        "lp_p": (float, 4.0),
        "lq_q": (float, 4.0),
    },
    "output": {
        "dir": (str, "out"),
        "snapshot_every": (int, 100),
    },
    "sweep": {
        "alpha": (list, None),
        "epsilon": (list, None),
        "K": (list, None),
        "n_cells": (list, None),
    },
}

MAX_SWEEP_RUNS = 256


@dataclass(frozen=True)
class InitialSpec:
    kind: str
    profile: ProfileSpec
    sign: int


@dataclass(frozen=True)
class MonitorSpec:
    entropy: EntropyPair
    rspec: RiemannSpec
    p: float
    q: float


@dataclass(frozen=True)
class OutputSpec:
    dir: str
    snapshot_every: int


@dataclass(frozen=True)
class SweepSpec:
    alphas: tuple
    epsilons: tuple
    Ks: tuple
    n_cells: tuple

    @property
    def n_runs(self) -> int:
        return len(self.alphas) * len(self.epsilons) * len(self.Ks) * len(self.n_cells)


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    grid: Grid1D
    t_final: float
    solver: SolverConfig
    initial: InitialSpec
    monitors: MonitorSpec
    output: OutputSpec
    sweep: "SweepSpec | None" = None


def _coerce(section: str, key: str, value, target):
    if target is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigValidationError(f"{section}.{key} must be a number, got {value!r}")
        return float(value)
    if target is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigValidationError(f"{section}.{key} must be an integer, got {value!r}")
        return int(value)
    if target is str:
        if not isinstance(value, str):
            raise ConfigValidationError(f"{section}.{key} must be a string, got {value!r}")
        return value
    if target is list:
        if not isinstance(value, list):
            raise ConfigValidationError(f"{section}.{key} must be a list, got {value!r}")
        return list(value)
    raise AssertionError(target)


def _named(section: str, key: str, build):
    """Run a validator, prefixing errors with the offending key."""
    try:
        return build()
    except ConfigValidationError:
        raise
    except FFMFGError as exc:
        raise ConfigValidationError(f"{section}.{key}: {exc}") from exc


def parse_config(text: str) -> RunConfig:
    """Parse and validate a TOML configuration document."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigParseError(f"malformed configuration document: {exc}") from exc

    unknown_sections = sorted(set(doc) - set(SCHEMA))
    if unknown_sections:
        raise ConfigParseError(
            f"unknown section(s) {unknown_sections}; accepted sections are "
            f"{sorted(SCHEMA)}"
        )
    values = {}
    for section, keys in SCHEMA.items():
        body = doc.get(section, {})
        if not isinstance(body, dict):
            raise ConfigParseError(f"section [{section}] must be a table")
        unknown = sorted(set(body) - set(keys))
        if unknown:
            raise ConfigParseError(
                f"unknown key(s) {[f'{section}.{k}' for k in unknown]}; accepted "
                f"keys in [{section}] are {sorted(keys)}"
            )
        for key, (target, default) in keys.items():
            if key in body:
                values[(section, key)] = _coerce(section, key, body[key], target)
            else:
                values[(section, key)] = default

    for section, key in (("problem", "alpha"), ("grid", "n_cells"), ("time", "t_final")):
        if values[(section, key)] is None:
            raise ConfigValidationError(f"{section}.{key} is required")

    params = _named(
        "problem",
        "alpha",
        lambda: ModelParams(
            alpha=values[("problem", "alpha")],
            epsilon=values[("problem", "epsilon")],
            p=values[("problem", "p")],
            coupling=values[("problem", "coupling")],
            K=values[("problem", "K")],
        ),
    )
    grid = _named("grid", "n_cells", lambda: Grid1D(values[("grid", "n_cells")]))

    t_final = values[("time", "t_final")]
    if t_final <= 0.0:
        raise ConfigValidationError(f"time.t_final must be > 0, got {t_final}")
    solver = _named(
        "time", "cfl", lambda: SolverConfig(cfl=values[("time", "cfl")])
    )

    kind = values[("initial", "kind")]
    if kind not in INITIAL_KINDS:
        raise ConfigValidationError(
            f"initial.kind must be one of {list(INITIAL_KINDS)}, got {kind!r}"
        )
    sign = values[("initial", "sign")]
    if sign not in (1, -1):
        raise ConfigValidationError(f"initial.sign must be 1 or -1, got {sign}")
    profile_kind = "constant" if kind == "constant" else "fourier"
    profile = _named(
        "initial",
        "amplitude",
        lambda: ProfileSpec(
            kind=profile_kind,
            mean=values[("initial", "mean")],
            amplitude=values[("initial", "amplitude")],
            mode=values[("initial", "mode")],
            phase=values[("initial", "phase")],
        ),
    )
    initial = InitialSpec(kind=kind, profile=profile, sign=sign)

    r_default = values[("monitors", "riemann_r")]
    probe = RiemannSpec(alpha=params.alpha, s=-1.0, r=-1.0)
    if r_default is None:
        r_default = 1.2 * probe.s1_threshold
    rspec = _named(
        "monitors",
        "riemann_r",
        lambda: RiemannSpec(
            alpha=params.alpha, s=values[("monitors", "riemann_s")], r=r_default
        ),
    )
    entropy = _named(
        "monitors",
        "entropy_a",
        lambda: EntropyPair.for_alpha(params.alpha, values[("monitors", "entropy_a")]),
    )
    monitors = MonitorSpec(
        entropy=entropy,
        rspec=rspec,
        p=values[("monitors", "lp_p")],
        q=values[("monitors", "lq_q")],
    )

    snapshot_every = values[("output", "snapshot_every")]
    if snapshot_every < 1:
        raise ConfigValidationError(
            f"output.snapshot_every must be >= 1, got {snapshot_every}"
        )
    output = OutputSpec(dir=values[("output", "dir")], snapshot_every=snapshot_every)

    sweep = None
    if "sweep" in doc:
        lists = {}
        base = {
            "alpha": params.alpha,
            "epsilon": params.epsilon,
            "K": params.K,
            "n_cells": grid.n_cells,
        }
        for key in ("alpha", "epsilon", "K", "n_cells"):
            raw = values[("sweep", key)]
            if raw is None:
                lists[key] = (base[key],)
            else:
                if len(raw) == 0:
                    raise ConfigValidationError(f"sweep.{key} must not be empty")
                lists[key] = tuple(raw)
        sweep = SweepSpec(
            alphas=lists["alpha"],
            epsilons=lists["epsilon"],
            Ks=lists["K"],
            n_cells=lists["n_cells"],
        )
        if sweep.n_runs > MAX_SWEEP_RUNS:
            raise ConfigValidationError(
                f"sweep holds {sweep.n_runs} runs; the cap is {MAX_SWEEP_RUNS}"
            )

    return RunConfig(
        params=params,
        grid=grid,
        t_final=t_final,
        solver=solver,
        initial=initial,
        monitors=monitors,
        output=output,
        sweep=sweep,
    )


def load_config(path: "str | Path") -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))
