"""Command-line front door: config parsing, dispatch, deterministic output.

Subcommands: ``solve``, ``tvs``, ``counterexample``, ``exact-eval``,
``verify``.  Configuration is a flat ``key=value`` text file (diff-friendly
for experiment archives); command-line ``--set key=value`` pairs and the
dedicated flags override file values, which override built-in defaults.  All
randomness flows from the single ``seed`` key, so equal configurations write
byte-identical CSV.  Exit codes are a stable contract:

* 0 — success / all verdicts pass,
* 2 — configuration or usage error,
* 3 — numerical or construction failure (infeasible sequences included),
* 4 — at least one experiment verdict is inconclusive,
* 5 — at least one experiment verdict is a failure.
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import Callable, Sequence

import numpy as np

from .errors import (ConstructionError, DomainError, HypothesisViolationError,
                     InfeasibilityError, ParameterError, RangeError,
                     SizeError, StabilityError, UndefinedExponentError)
from . import exact, verify
from .flux import FluxPair, FluxSpec, power_law_flux, shifted_quadratic
from .pvar import signal_from_csv, tv_s_exact
from .solver import Grid, solve, write_snapshot_csv, write_traces_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONSTRUCTION = 3
EXIT_INCONCLUSIVE = 4
EXIT_FAILED = 5

_CONFIG_ERRORS = (ParameterError, SizeError, RangeError, DomainError,
                  HypothesisViolationError, UndefinedExponentError)
_NUMERIC_ERRORS = (ConstructionError, StabilityError)

SUITES = ("smoothing", "blowup", "traces", "outside", "interface", "holder",
          "all")

DEFAULTS: dict[str, str] = {
    # flux pair
    "left_kind": "shifted_quadratic", "left_param": "-1.0",
    "left_domain_bound": "10.0",
    "right_kind": "power_law", "right_param": "2.0",
    "right_domain_bound": "10.0",
    # grid / run
    "half_width": "2.0", "n_cells": "1000", "t_end": "1.0", "cfl": "0.45",
    "snapshot_times": "",
    "u0_amplitude": "1.0", "u0_pieces": "0",
    # variation
    "signal_path": "", "s_values": "0.5,1.0",
    # counter-example chain
    "p": "1.0", "eps": "0.5", "i0": "10", "n_points": "11",
    "seed_gap": "0.5", "mode": "greedy", "margin": "1e-6", "density": "50.0",
    # exact evaluation
    "t_eval": "1.0", "x_min": "", "x_max": "", "x_count": "512",
    # verify
    "suite": "all",
    "verify_grid_list": "500,1000", "verify_t_list": "0.25,0.5,1.0",
    "verify_n_list": "10000,20000,40000,80000,160000,320000,640000",
    "verify_eps_list": "0.4,0.2,0.1,0.05", "verify_t": "0.5",
    "verify_windows": "0.1:0.2,0.2:0.4,0.4:0.8",
    "verify_trace_grids": "2000,4000,8000",
    # plumbing
    "seed": "0", "out": ".", "jobs": "1",
}


# -- configuration ---------------------------------------------------------

def load_config(path: str) -> dict[str, str]:
    """Parse a flat ``key=value`` file; ``#`` starts a comment line.

    Raises:
        ParameterError: on unreadable files, unknown keys, or lines without
            ``=``.
    """
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as err:
        raise ParameterError(f"cannot read config {path!r}: {err}") from err
    out: dict[str, str] = {}
    for ln, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParameterError(
                f"{path}:{ln}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in DEFAULTS:
            raise ParameterError(f"{path}:{ln}: unknown key {key!r}")
        out[key] = value.strip()
    return out


def merge_config(file_cfg: dict[str, str],
                 overrides: dict[str, str]) -> dict[str, str]:
    """Defaults, then file values, then command-line overrides."""
    cfg = dict(DEFAULTS)
    cfg.update(file_cfg)
    for key, value in overrides.items():
        if key not in DEFAULTS:
            raise ParameterError(f"unknown config key {key!r}")
        cfg[key] = value
    return cfg


def _get_float(cfg: dict[str, str], key: str) -> float:
    try:
        return float(cfg[key])
    except ValueError as err:
        raise ParameterError(f"config field {key}={cfg[key]!r} is not a "
                             f"number") from err


def _get_int(cfg: dict[str, str], key: str) -> int:
    try:
        return int(cfg[key])
    except ValueError as err:
        raise ParameterError(f"config field {key}={cfg[key]!r} is not an "
                             f"integer") from err


def _get_floats(cfg: dict[str, str], key: str) -> list[float]:
    text = cfg[key].strip()
    if not text:
        return []
    try:
        return [float(tok) for tok in text.split(",")]
    except ValueError as err:
        raise ParameterError(f"config field {key}={cfg[key]!r} is not a "
                             f"comma-separated number list") from err


def _get_ints(cfg: dict[str, str], key: str) -> list[int]:
    return [int(round(v)) for v in _get_floats(cfg, key)]


def _build_flux(cfg: dict[str, str], side: str) -> FluxSpec:
    kind = cfg[f"{side}_kind"]
    param = _get_float(cfg, f"{side}_param")
    bound = _get_float(cfg, f"{side}_domain_bound")
    if kind == "power_law":
        return power_law_flux(param, domain_bound=bound)
    if kind == "shifted_quadratic":
        return shifted_quadratic(param, domain_bound=bound)
    raise ParameterError(
        f"config field {side}_kind={kind!r} must be power_law or "
        f"shifted_quadratic")


def _build_pair(cfg: dict[str, str]) -> FluxPair:
    return FluxPair(left=_build_flux(cfg, "left"),
                    right=_build_flux(cfg, "right"))


def _out_dir(cfg: dict[str, str]) -> str:
    path = cfg["out"]
    os.makedirs(path, exist_ok=True)
    return path


def _build_chain(cfg: dict[str, str]) -> exact.CounterexampleSpec:
    return exact.build_sequences(
        _get_float(cfg, "p"), _get_float(cfg, "eps"),
        i0=_get_int(cfg, "i0"), n_points=_get_int(cfg, "n_points"),
        seed_gap=_get_float(cfg, "seed_gap"), mode=cfg["mode"],
        margin=_get_float(cfg, "margin"))


# -- subcommands -------------------------------------------------------------

def cmd_solve(cfg: dict[str, str]) -> int:
    """Run the finite-volume scheme and write snapshot/trace CSV files."""
    pair = _build_pair(cfg)
    grid = Grid(half_width=_get_float(cfg, "half_width"),
                n_cells=_get_int(cfg, "n_cells"))
    t_end = _get_float(cfg, "t_end")
    cfl = _get_float(cfg, "cfl")
    pieces = _get_int(cfg, "u0_pieces")
    u0 = verify.random_step_data(
        _get_int(cfg, "seed"), _get_float(cfg, "u0_amplitude"),
        grid.half_width, n_pieces=pieces if pieces > 0 else None)
    snap = _get_floats(cfg, "snapshot_times") or None
    sol = solve(pair, u0, grid, t_end=t_end, cfl=cfl, snapshot_times=snap)
    out = _out_dir(cfg)
    meta_core = {"seed": cfg["seed"], "t_end": repr(t_end),
                 "cfl": repr(cfl), "n_cells": repr(grid.n_cells),
                 "half_width": repr(grid.half_width)}
    for idx, t in enumerate(sol.times):
        path = os.path.join(out, f"snapshot_{idx:03d}.csv")
        write_snapshot_csv(path, grid, sol.snapshots[idx],
                           metadata={**meta_core, "t": repr(float(t))})
        print(f"wrote {path} (t={t:.6g})")
    traces_path = os.path.join(out, "traces.csv")
    write_traces_csv(traces_path, sol.traces, metadata=meta_core)
    print(f"wrote {traces_path}")
    print(f"mass defect {sol.mass_defect:.3e}; amplitude bound "
          f"{sol.amplitude_bound:.6g}; dt {sol.dt:.6g}")
    return EXIT_OK


def cmd_tvs(cfg: dict[str, str], signal_path: str | None = None) -> int:
    """Print ``(s, TV^s, subdivision size)`` for each requested order."""
    path = signal_path or cfg["signal_path"]
    if not path:
        raise ParameterError("no input signal: pass a CSV path or set "
                             "signal_path")
    try:
        signal = signal_from_csv(path)
    except OSError as err:
        raise ParameterError(f"cannot read signal {path!r}: {err}") from err
    s_values = _get_floats(cfg, "s_values")
    if not s_values:
        raise ParameterError("s_values must name at least one order")
    for s in s_values:
        rep = tv_s_exact(signal, s)
        print(f"s={s:g} tv={rep.value:.17g} subdivision={len(rep.subdivision)}")
    return EXIT_OK


def _eval_grid(cfg: dict[str, str], bd: exact.BackwardData) -> np.ndarray:
    x_min = float(cfg["x_min"]) if cfg["x_min"].strip() else -1.0
    x_max = float(cfg["x_max"]) if cfg["x_max"].strip() else 1.05 * bd.r_end
    count = _get_int(cfg, "x_count")
    if count < 2 or not x_max > x_min:
        raise ParameterError(
            f"evaluation grid needs x_min < x_max and x_count >= 2, got "
            f"[{x_min}, {x_max}] with {count} points")
    return np.linspace(x_min, x_max, count)


def cmd_counterexample(cfg: dict[str, str]) -> int:
    """Build the blow-up chain; write profile, initial data, jump series."""
    spec = _build_chain(cfg)
    bd = exact.counterexample_backward_data(
        spec, density=_get_float(cfg, "density"),
        t_end=_get_float(cfg, "t_end"))
    out = _out_dir(cfg)

    profile_path = os.path.join(out, "profile_at_T.csv")
    xs = _eval_grid(cfg, bd)
    exact.export_solution_csv(bd, xs, bd.t_end, profile_path)
    print(f"wrote {profile_path}")

    init_path = os.path.join(out, "initial_data.csv")
    data = exact.backward_initial_data(bd)
    edges = np.concatenate([[-np.inf], data.breakpoints, [np.inf]])
    with open(init_path, "w") as fh:
        fh.write(f"# piecewise-constant initial data; k={bd.k} crossings\n")
        fh.write("left_edge,right_edge,value\n")
        for j, v in enumerate(data.values):
            fh.write(f"{edges[j]:.17g},{edges[j + 1]:.17g},{v:.17g}\n")
    print(f"wrote {init_path}")

    series_path = os.path.join(out, "jump_series.csv")
    p = spec.p
    s_crit = (1.0 + spec.eps) / (p + 1.0)
    s_sub = 1.0 / (p + 1.0)
    n_max = spec.i0 + spec.n_points - 1
    idx = spec.indices()
    jumps = exact.jump_magnitude(spec, idx)
    sums_crit = exact.jump_series(spec, s_crit, n_max)
    sums_sub = exact.jump_series(spec, s_sub, n_max)
    with open(series_path, "w") as fh:
        fh.write(f"# s_crit={s_crit:.17g} s_sub={s_sub:.17g}\n")
        fh.write("i,x_i,jump,partial_sum_crit,partial_sum_sub\n")
        for row in zip(idx, spec.xs, jumps, sums_crit, sums_sub):
            fh.write(f"{row[0]:d}," + ",".join(f"{v:.17g}" for v in row[1:])
                     + "\n")
    print(f"wrote {series_path}")
    return EXIT_OK


def cmd_exact_eval(cfg: dict[str, str]) -> int:
    """Sample the exact solution at one time onto a uniform grid."""
    spec = _build_chain(cfg)
    bd = exact.counterexample_backward_data(
        spec, density=_get_float(cfg, "density"),
        t_end=_get_float(cfg, "t_end"))
    t = _get_float(cfg, "t_eval")
    xs = _eval_grid(cfg, bd)
    out = _out_dir(cfg)
    path = os.path.join(out, "exact_eval.csv")
    exact.export_solution_csv(bd, xs, t, path)
    print(f"wrote {path}")
    return EXIT_OK


def _suite_smoothing(cfg: dict[str, str]) -> verify.ExperimentReport:
    return verify.smoothing_experiment(
        _build_pair(cfg), _get_int(cfg, "seed"),
        _get_float(cfg, "u0_amplitude"), _get_floats(cfg, "verify_t_list"),
        _get_ints(cfg, "verify_grid_list"),
        half_width=_get_float(cfg, "half_width"), cfl=_get_float(cfg, "cfl"))


def _suite_blowup(cfg: dict[str, str]) -> verify.ExperimentReport:
    return verify.blowup_experiment(
        _get_float(cfg, "p"), _get_float(cfg, "eps"),
        _get_ints(cfg, "verify_n_list"), i0=_get_int(cfg, "i0"))


def _arrival_ladder(half_width: float):
    """Left-side steps whose interface arrivals spread over dyadic windows.

    Breakpoints sit at -0.24 * 2^(k/2), so each doubling of the time window
    receives the same number of alternating-value arrivals.
    """
    brk = -0.24 * 2.0 ** (np.arange(8) / 2.0)
    brk = np.sort(brk[brk > -(half_width - 0.05)])
    vals = np.where(np.arange(brk.size) % 2 == 0, 1.5, 1.1)
    return exact.PiecewiseConstantData(
        breakpoints=brk, values=np.concatenate([[1.3], vals]))


def _parse_windows(text: str) -> list[tuple[float, float]]:
    windows = []
    for tok in text.split(","):
        a, _, b = tok.partition(":")
        try:
            windows.append((float(a), float(b)))
        except ValueError as err:
            raise ParameterError(
                f"window {tok!r} must look like a:b") from err
    return windows


def _suite_traces(cfg: dict[str, str]) -> verify.ExperimentReport:
    half = _get_float(cfg, "half_width")
    return verify.trace_experiment(
        _build_pair(cfg), _arrival_ladder(half),
        _parse_windows(cfg["verify_windows"]),
        t_end=_get_float(cfg, "t_end"), half_width=half,
        grid_list=_get_ints(cfg, "verify_trace_grids"),
        cfl=_get_float(cfg, "cfl"))


def _suite_outside(cfg: dict[str, str]) -> verify.ExperimentReport:
    half = _get_float(cfg, "half_width")
    return verify.outside_interface_experiment(
        _build_pair(cfg),
        verify.random_step_data(_get_int(cfg, "seed"),
                                _get_float(cfg, "u0_amplitude"), half),
        _get_floats(cfg, "verify_eps_list"), _get_float(cfg, "verify_t"),
        half_width=half, n_cells=_get_int(cfg, "n_cells"),
        cfl=_get_float(cfg, "cfl"))


def _suite_interface(cfg: dict[str, str]) -> verify.ExperimentReport:
    pair = _build_pair(cfg)
    half = _get_float(cfg, "half_width")
    u0 = verify.random_step_data(_get_int(cfg, "seed"),
                                 _get_float(cfg, "u0_amplitude"), half)
    sols = [solve(pair, u0, Grid(half_width=half, n_cells=n),
                  t_end=_get_float(cfg, "verify_t"),
                  cfl=_get_float(cfg, "cfl"))
            for n in _get_ints(cfg, "verify_grid_list")]
    return verify.interface_conditions_check(pair, sols)


def _suite_holder(cfg: dict[str, str]) -> verify.ExperimentReport:
    return verify.holder_lemma_suite(_build_pair(cfg))


_SUITE_RUNNERS: dict[str, Callable[[dict[str, str]],
                                   verify.ExperimentReport]] = {
    "smoothing": _suite_smoothing,
    "blowup": _suite_blowup,
    "traces": _suite_traces,
    "outside": _suite_outside,
    "interface": _suite_interface,
    "holder": _suite_holder,
}


def cmd_verify(cfg: dict[str, str], suite: str | None = None) -> int:
    """Run one experiment suite (or all) and write its reports."""
    name = suite or cfg["suite"]
    if name not in SUITES:
        print(f"unknown suite {name!r}; choose from {', '.join(SUITES)}",
              file=sys.stderr)
        return EXIT_CONFIG
    names = list(_SUITE_RUNNERS) if name == "all" else [name]
    jobs = max(1, _get_int(cfg, "jobs"))
    out = _out_dir(cfg)

    reports: list[verify.ExperimentReport]
    if jobs > 1 and len(names) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(
                lambda nm: _SUITE_RUNNERS[nm](cfg), names))
    else:
        reports = [_SUITE_RUNNERS[nm](cfg) for nm in names]

    worst = EXIT_OK
    for rep in reports:
        csv_path, _ = verify.write_report(rep, out)
        print(f"{rep.name}: {rep.verdict} ({csv_path})")
        if rep.verdict == "fail":
            worst = EXIT_FAILED
        elif rep.verdict == "inconclusive" and worst != EXIT_FAILED:
            worst = EXIT_INCONCLUSIVE
    return worst


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluxjump",
        description="Numerical laboratory for conservation laws with a flux "
                    "discontinuity at x = 0")
    parser.add_argument("--config", metavar="PATH",
                        help="flat key=value configuration file")
    parser.add_argument("--out", metavar="DIR",
                        help="output directory (created if missing)")
    parser.add_argument("--seed", metavar="INT", type=int,
                        help="seed for all randomness")
    parser.add_argument("--jobs", metavar="INT", type=int,
                        help="concurrent experiment runs for verify")
    parser.add_argument("--set", metavar="KEY=VALUE", action="append",
                        default=[], dest="assignments",
                        help="override one config key (repeatable)")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("solve", help="run the finite-volume scheme")
    tvs = sub.add_parser("tvs", help="fractional variation of a CSV signal")
    tvs.add_argument("signal", nargs="?", default=None,
                     help="two-column x,value CSV (default: signal_path key)")
    sub.add_parser("counterexample",
                   help="build the blow-up chain and write its files")
    sub.add_parser("exact-eval",
                   help="sample the exact solution at one time")
    ver = sub.add_parser("verify", help="run experiment suites")
    ver.add_argument("suite", nargs="?", default=None,
                     help=f"one of {', '.join(SUITES)} (default: suite key)")
    return parser


def _collect_overrides(args: argparse.Namespace) -> dict[str, str]:
    overrides: dict[str, str] = {}
    for item in args.assignments:
        if "=" not in item:
            raise ParameterError(f"--set needs KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        overrides[key.strip()] = value.strip()
    if args.out is not None:
        overrides["out"] = args.out
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    if args.jobs is not None:
        overrides["jobs"] = str(args.jobs)
    return overrides


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        file_cfg = load_config(args.config) if args.config else {}
        cfg = merge_config(file_cfg, _collect_overrides(args))
        if args.subcommand == "solve":
            return cmd_solve(cfg)
        if args.subcommand == "tvs":
            return cmd_tvs(cfg, signal_path=args.signal)
        if args.subcommand == "counterexample":
            return cmd_counterexample(cfg)
        if args.subcommand == "exact-eval":
            return cmd_exact_eval(cfg)
        if args.subcommand == "verify":
            return cmd_verify(cfg, suite=args.suite)
        print(f"unknown subcommand {args.subcommand!r}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibilityError as err:
        print(f"infeasible construction at index {err.failing_index}: {err}",
              file=sys.stderr)
        return EXIT_CONSTRUCTION
    except _NUMERIC_ERRORS as err:
        print(f"construction or numerical failure: {err}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    except _CONFIG_ERRORS as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
