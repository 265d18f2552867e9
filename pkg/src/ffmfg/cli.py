"""Command-line interface: analyze, simulate, wave-test, verify, sweep.

Exit codes: 0 success, 1 verify failure, 2 config error, 3 blow-up (or any
non-completed run), 4 IO error.
"""

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .core import Coupling, FFMFGError, Grid1D, ModelParams, State, validate_state
from .analysis import (
    EntropyPair,
    RiemannSpec,
    eigenstructure,
    entropy_exponent_b,
    genuine_nonlinearity,
    riemann_values,
    theta_alpha,
)
from .config import (
    ConfigParseError,
    ConfigValidationError,
    MonitorSpec,
    RunConfig,
    load_config,
)
from .csvio import read_monitors, read_snapshot, write_monitors, write_snapshot
from .diagnostics import MonitorRow, MonitorSeries, monitor_row
from .solver import Termination, advance
from .studies import l1_density_error, wave_convergence_study
from .verification import run_suite
from .waves import (
    WaveSpec,
    build_traveling_wave,
    exact_traveling_wave_at,
    v_from_value_function,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_BLOW_UP = 3
EXIT_IO = 4


def _g9(x: float) -> str:
    return f"{x:.9g}"


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------

def build_initial(cfg: RunConfig) -> State:
    """Construct the initial state described by the [initial] section."""
    grid, params, spec = cfg.grid, cfg.params, cfg.initial
    x = grid.centers
    if spec.kind == "traveling_wave":
        if params.coupling is Coupling.NONE:
            # degenerate zero-speed wave of the uncoupled system: v = 0 with
            # an arbitrary positive profile is exactly stationary
            m0 = spec.profile.sample(x)
            return validate_state(grid, np.zeros_like(m0), m0)
        wave = WaveSpec(coupling=params.coupling, K=params.K, sign=spec.sign)
        return build_traveling_wave(spec.profile, wave, params, grid)
    if spec.kind == "fourier":
        m0 = spec.profile.sample(x)
        return validate_state(grid, m0**params.alpha, m0)
    if spec.kind == "constant":
        m0 = np.full(grid.n_cells, spec.profile.mean)
        return validate_state(grid, np.full(grid.n_cells, params.p), m0)
    # from_value_function: u0 is a single-mode sinusoid, m constant
    prof = spec.profile
    u0 = prof.amplitude * np.sin(2.0 * np.pi * prof.mode * x + prof.phase)
    v0 = v_from_value_function(u0, params.p, grid)
    m0 = np.full(grid.n_cells, prof.mean)
    return validate_state(grid, v0, m0)


def exact_final_state(cfg: RunConfig) -> "State | None":
    """Exact solution at t_final when the initial data is a traveling wave."""
    if cfg.initial.kind != "traveling_wave":
        return None
    if cfg.params.coupling is Coupling.NONE:
        m0 = cfg.initial.profile.sample(cfg.grid.centers)
        return validate_state(cfg.grid, np.zeros_like(m0), m0, t=cfg.t_final)
    wave = WaveSpec(coupling=cfg.params.coupling, K=cfg.params.K, sign=cfg.initial.sign)
    return exact_traveling_wave_at(cfg.initial.profile, wave, cfg.params, cfg.grid, cfg.t_final)


def _cli_monitor_row(state: State, params: ModelParams, monitors: MonitorSpec) -> MonitorRow:
    """Monitor row that degrades to NaN invariant columns outside v > 0."""
    if np.min(state.v) > 0.0:
        return monitor_row(
            state, params, monitors.entropy, monitors.rspec, monitors.p, monitors.q
        )
    v, m, dx = state.v, state.m, state.dx
    nan = float("nan")
    return MonitorRow(
        t=state.t,
        mass=float(np.sum(m) * dx),
        min_m=float(np.min(m)),
        min_v=float(np.min(v)),
        max_z=nan,
        max_w=nan,
        entropy=nan,
        dissipation_rhs=nan,
        lp_m=float((np.sum(np.abs(m) ** monitors.p) * dx) ** (1.0 / monitors.p)),
        lq_v=float((np.sum(np.abs(v) ** monitors.q) * dx) ** (1.0 / monitors.q)),
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def run_simulate(cfg: RunConfig, out_dir: "str | None" = None, quiet: bool = False) -> int:
    out = Path(out_dir or cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    initial = build_initial(cfg)

    series = MonitorSeries(
        entropy=cfg.monitors.entropy,
        rspec=cfg.monitors.rspec,
        p=cfg.monitors.p,
        q=cfg.monitors.q,
        epsilon=cfg.params.epsilon,
    )
    step = {"k": 0}

    def observer(state: State) -> None:
        k = step["k"]
        series.append(_cli_monitor_row(state, cfg.params, cfg.monitors))
        if k % cfg.output.snapshot_every == 0:
            write_snapshot(out / "snapshots" / f"snapshot_{k:08d}.csv", cfg.grid, state)
        step["k"] = k + 1

    solver_cfg = replace(cfg.solver, store_every=cfg.output.snapshot_every)
    traj = advance(initial, cfg.t_final, cfg.params, solver_cfg, observer=observer)
    write_snapshot(out / "snapshots" / "snapshot_final.csv", cfg.grid, traj.final_state)
    write_monitors(out / "monitors.csv", series)

    if not quiet:
        final = series.rows[-1]
        print(
            f"run finished: reason={traj.reason.value} steps={traj.n_steps} "
            f"t={traj.final_state.t:.9g} mass={final.mass:.9g} min_m={final.min_m:.9g}"
        )
        if not cfg.initial.profile.is_normalized:
            print("note: initial density mean differs from 1, mass is not normalized")
        exact = exact_final_state(cfg)
        if exact is not None and traj.reason is Termination.COMPLETED:
            err = l1_density_error(traj.final_state, exact)
            print(f"traveling-wave L1 density error vs exact translate: {err:.9g}")
    return EXIT_OK if traj.reason is Termination.COMPLETED else EXIT_BLOW_UP


def run_wave_test(cfg: RunConfig, cells, quiet: bool = False) -> int:
    if cfg.initial.kind != "traveling_wave" or cfg.params.coupling is Coupling.NONE:
        raise ConfigValidationError(
            "wave-test needs initial.kind = 'traveling_wave' and a coupled problem"
        )
    wave = WaveSpec(coupling=cfg.params.coupling, K=cfg.params.K, sign=cfg.initial.sign)
    study = wave_convergence_study(
        cfg.initial.profile, wave, cfg.params, list(cells), cfg.t_final, cfl=cfg.solver.cfl
    )
    if not quiet:
        print(f"traveling wave, speed c = {_g9(wave.speed)}, t_final = {_g9(cfg.t_final)}")
        print("n_cells   l1_error      order")
        for i, (n, err) in enumerate(zip(study.cells, study.errors)):
            order = "" if i == 0 else _g9(study.orders[i - 1])
            print(f"{n:7d}   {err:.9g}   {order}")
    return EXIT_OK


def run_analyze(
    alpha: float,
    a: float = 2.0,
    s: float = -1.0,
    r: float = -2.0,
    v: float = 1.0,
    m: float = 1.0,
) -> str:
    """Closed-form quantities at one parameter point, as a printable table."""
    spec = RiemannSpec(alpha=alpha, s=s, r=r)
    rows = [
        ("alpha", _g9(alpha)),
        ("A", _g9(spec.A)),
        ("B", _g9(spec.B)),
        ("theta", _g9(float(theta_alpha(alpha)))),
        (f"b(alpha, a={_g9(a)})", _g9(entropy_exponent_b(alpha, a))),
        ("S1 threshold 2B/(B+2)", _g9(spec.s1_threshold)),
        (f"s = {_g9(s)} in S0", str(spec.s_in_s0).lower()),
        (f"r = {_g9(r)} in S1", str(spec.r_in_s1).lower()),
    ]
    if spec.s_in_s0 and spec.r_in_s1:
        A, B = spec.A, spec.B
        exponent = 2.0 * (A * r - B * s) / ((A - B) * r * s)
        rows.append(("density bound exponent", _g9(exponent)))
    else:
        rows.append(("density bound exponent", "n/a (outside S0 x S1)"))

    if m <= 0.0:
        raise FFMFGError(f"m must be > 0, got {m}")
    pair = eigenstructure(v, m, alpha)
    rows.append((f"lambda1({_g9(v)}, {_g9(m)})", _g9(pair.lambda1)))
    rows.append((f"lambda2({_g9(v)}, {_g9(m)})", _g9(pair.lambda2)))
    if v == 0.0:
        rows.append(("eigenvectors", "speeds coincide at v = 0, hyperbolicity degenerates"))
    else:
        rows.append(("r1", f"({_g9(pair.r1[0])}, {_g9(pair.r1[1])})"))
        rows.append(("r2", f"({_g9(pair.r2[0])}, {_g9(pair.r2[1])})"))
        g1, g2 = genuine_nonlinearity(v, m, alpha)
        rows.append(("grad_lambda1 . r1", _g9(float(g1))))
        rows.append(("grad_lambda2 . r2", _g9(float(g2))))
    if v > 0.0:
        z, w = riemann_values(spec, v, m)
        rows.append((f"z({_g9(v)}, {_g9(m)})", _g9(float(z))))
        rows.append((f"w({_g9(v)}, {_g9(m)})", _g9(float(w))))
    else:
        rows.append(("z, w", "undefined outside v > 0"))

    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def run_verify(quiet: bool = False) -> int:
    passed, _ = run_suite(quiet=quiet)
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def _sweep_variant(cfg: RunConfig, alpha: float, epsilon: float, K: float, n_cells: int) -> RunConfig:
    params = ModelParams(
        alpha=alpha,
        epsilon=epsilon,
        p=cfg.params.p,
        coupling=cfg.params.coupling,
        K=K,
    )
    probe = RiemannSpec(alpha=alpha, s=cfg.monitors.rspec.s, r=-1.0)
    monitors = MonitorSpec(
        entropy=EntropyPair.for_alpha(alpha, cfg.monitors.entropy.a),
        rspec=RiemannSpec(alpha=alpha, s=cfg.monitors.rspec.s, r=1.2 * probe.s1_threshold),
        p=cfg.monitors.p,
        q=cfg.monitors.q,
    )
    return replace(cfg, params=params, grid=Grid1D(n_cells), monitors=monitors, sweep=None)


def _sweep_worker(task):
    run_id, cfg, out_dir = task
    row = {
        "run_id": run_id,
        "alpha": cfg.params.alpha,
        "epsilon": cfg.params.epsilon,
        "coupling": cfg.params.coupling.value,
        "K": cfg.params.K,
        "n_cells": cfg.grid.n_cells,
        "t_final": cfg.t_final,
    }
    try:
        code = run_simulate(cfg, out_dir=out_dir, quiet=True)
        rows = read_monitors(Path(out_dir) / "monitors.csv")
        final = rows[-1]
        row.update(
            reason="completed" if code == EXIT_OK else "blow_up",
            mass=final.mass,
            min_m=final.min_m,
            min_v=final.min_v,
            max_z=final.max_z,
            max_w=final.max_w,
            entropy=final.entropy,
            lp_m=final.lp_m,
            lq_v=final.lq_v,
        )
        exact = exact_final_state(cfg)
        if exact is not None and code == EXIT_OK:
            _, _, m_num = read_snapshot(Path(out_dir) / "snapshots" / "snapshot_final.csv")
            row["wave_error"] = float(np.mean(np.abs(m_num - exact.m)))
        else:
            row["wave_error"] = ""
        row["error"] = ""
    except Exception as exc:  # record per-row, keep the sweep going
        row.update(reason="error", error=f"{type(exc).__name__}: {exc}")
    return row


_INDEX_COLUMNS = (
    "run_id", "alpha", "epsilon", "coupling", "K", "n_cells", "t_final",
    "reason", "mass", "min_m", "min_v", "max_z", "max_w", "entropy",
    "lp_m", "lq_v", "wave_error", "error",
)


def run_sweep(cfg: RunConfig, out_dir: "str | None" = None, quiet: bool = False) -> int:
    if cfg.sweep is None:
        raise ConfigValidationError("sweep requires a [sweep] section in the config")
    out = Path(out_dir or cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)

    tasks = []
    run_id = 0
    for alpha in cfg.sweep.alphas:
        for epsilon in cfg.sweep.epsilons:
            for K in cfg.sweep.Ks:
                for n in cfg.sweep.n_cells:
                    variant = _sweep_variant(cfg, float(alpha), float(epsilon), float(K), int(n))
                    tasks.append((run_id, variant, str(out / f"run_{run_id:04d}")))
                    run_id += 1

    workers = min(len(tasks), os.cpu_count() or 1, 8)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_worker, tasks))
    else:
        rows = [_sweep_worker(t) for t in tasks]

    import csv

    with open(out / "index.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=_INDEX_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            full = {col: row.get(col, "") for col in _INDEX_COLUMNS}
            for col, val in full.items():
                if isinstance(val, float):
                    full[col] = repr(val)
            writer.writerow(full)

    n_completed = sum(1 for row in rows if row.get("reason") == "completed")
    if not quiet:
        print(f"sweep finished: {n_completed}/{len(rows)} runs completed; index at {out / 'index.csv'}")
    return EXIT_OK if n_completed == len(rows) else EXIT_BLOW_UP


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to a TOML configuration document")
    common.add_argument("--out", help="output directory (overrides output.dir)")
    common.add_argument("--quiet", action="store_true", help="suppress chatter")

    parser = argparse.ArgumentParser(
        prog="ffmfg",
        description="Forward-forward mean-field games with congestion as a "
        "2x2 conservation-law system",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", parents=[common], help="print closed-form quantities")
    analyze.add_argument("--alpha", type=float, default=1.0)
    analyze.add_argument("--entropy-a", type=float, default=2.0, dest="a")
    analyze.add_argument("--riemann-s", type=float, default=-1.0, dest="s")
    analyze.add_argument("--riemann-r", type=float, default=-2.0, dest="r")
    analyze.add_argument("--v", type=float, default=1.0)
    analyze.add_argument("--m", type=float, default=1.0)

    sub.add_parser("simulate", parents=[common], help="run one simulation from a config")
    wave = sub.add_parser("wave-test", parents=[common], help="traveling-wave convergence study")
    wave.add_argument("--cells", default="200,400,800", help="comma-separated resolutions")
    sub.add_parser("verify", parents=[common], help="run the verification suite")
    sub.add_parser("sweep", parents=[common], help="run a parameter sweep")
    return parser


def _require_config(args) -> RunConfig:
    if not args.config:
        raise ConfigValidationError("--config is required for this subcommand")
    return load_config(args.config)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            print(run_analyze(args.alpha, args.a, args.s, args.r, args.v, args.m))
            return EXIT_OK
        if args.command == "simulate":
            return run_simulate(_require_config(args), out_dir=args.out, quiet=args.quiet)
        if args.command == "wave-test":
            cells = [int(c) for c in args.cells.split(",") if c.strip()]
            if not cells:
                raise ConfigValidationError("--cells must list at least one resolution")
            return run_wave_test(_require_config(args), cells, quiet=args.quiet)
        if args.command == "verify":
            return run_verify(quiet=args.quiet)
        if args.command == "sweep":
            return run_sweep(_require_config(args), out_dir=args.out, quiet=args.quiet)
        raise AssertionError(args.command)
    except (ConfigParseError, ConfigValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FFMFGError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
