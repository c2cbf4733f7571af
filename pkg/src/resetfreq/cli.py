"""Command-line front end: load a config, run open-/closed-loop sweeps, the
multiple-reset scan, or a time-domain simulation, and export CSV.

Exit codes: 0 success, 1 usage, 2 config schema, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import __version__
from .closed_loop import AnalysisSingularityError, closed_loop_grid
from .config import ConfigError, load_config
from .export import (
    CLOSED_LOOP_FIELDS,
    OPEN_LOOP_FIELDS,
    TRACE_FIELDS,
    closed_loop_rows,
    fmt,
    open_loop_rows,
    rows_to_csv,
    trace_rows,
)
from .lti import FrfTable, LtiError, hurwitz_check
from .open_loop import cr_grid, open_loop_grid, reconstruct_open_loop_output
from .closed_loop import (
    reconstruct_closed_loop_signals,
    reconstruct_disturbance_error,
)
from .reset_controller import ResetSingularityError, open_loop_stability_check
from .presets import MarginError
from .simulation import (
    SimConfig,
    SimulationError,
    multiple_reset_scan,
    prediction_error,
    resets_per_cycle,
    simulate,
    steady_state_window,
)

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

_NUMERICAL_ERRORS = (
    LtiError,
    AnalysisSingularityError,
    ResetSingularityError,
    SimulationError,
    MarginError,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _check_assumptions(system, hurwitz_tol: float) -> list[str]:
    """Pre-flight checks: linear blocks Hurwitz, reset element contractive.

    Violations are reported as warnings, not hard errors; integrators inside
    PI blocks are common and flagged for the user to judge.
    """
    warnings = []
    for name in ("c1", "c2", "c3", "c4", "cs"):
        block = getattr(system, name)
        if isinstance(block, FrfTable):
            continue
        try:
            if not hurwitz_check(block, tol=hurwitz_tol):
                warnings.append(
                    f"block {name} is not strictly Hurwitz (pole with "
                    f"Re >= {-hurwitz_tol:g}); analysis assumes stable blocks"
                )
        except LtiError:
            pass
    scan = open_loop_stability_check(system.cr)
    if scan.marginal:
        warnings.append(
            f"reset element is marginal: worst jump-flow spectral radius "
            f"{scan.worst_radius:.6g} at delta={scan.worst_delta:.3g} s"
        )
    elif not scan.passed:
        warnings.append(
            f"reset element FAILS the contraction test: spectral radius "
            f"{scan.worst_radius:.6g} at delta={scan.worst_delta:.3g} s"
            + (f" ({scan.failure})" if scan.failure else "")
        )
    else:
        print(
            f"reset element contraction: ok "
            f"(worst spectral radius {scan.worst_radius:.6g} "
            f"at delta={scan.worst_delta:.3g} s)"
        )
    return warnings


def _emit_warnings(warnings):
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)


def _report_grid_failures(failures):
    for entry in failures:
        print(f"warning: skipped grid point {entry}", file=sys.stderr)


def _hurwitz_tol(args, cfg) -> float:
    return cfg.sim.hurwitz_tol if args.hurwitz_tol is None else args.hurwitz_tol


def cmd_open_loop(args) -> int:
    cfg = load_config(args.config)
    system = cfg.system()
    _emit_warnings(_check_assumptions(system, _hurwitz_tol(args, cfg)))
    freqs = cfg.frequencies_rad()
    n_h = args.harmonics or cfg.analysis.harmonics
    out = Path(args.output)
    wanted = ("cr", "ln") if args.function == "both" else (args.function,)
    for kind in wanted:
        grid = (cr_grid if kind == "cr" else open_loop_grid)(
            system.open_loop(), freqs, n_h
        )
        _report_grid_failures(grid.failures)
        path = out if len(wanted) == 1 else out.with_name(
            f"{out.stem}_{kind}{out.suffix or '.csv'}"
        )
        path.write_text(rows_to_csv(OPEN_LOOP_FIELDS, open_loop_rows(grid)))
        print(f"wrote {kind} grid ({grid.freqs.size} frequencies, "
              f"harmonics {list(grid.harmonics)}) to {path}")
    return EXIT_OK


def cmd_closed_loop(args) -> int:
    cfg = load_config(args.config)
    system = cfg.system()
    _emit_warnings(_check_assumptions(system, _hurwitz_tol(args, cfg)))
    freqs = cfg.frequencies_rad()
    n_h = args.harmonics or cfg.analysis.harmonics
    grid = closed_loop_grid(system, freqs, n_h, families=(args.function,))
    _report_grid_failures(grid.failures)
    Path(args.output).write_text(
        rows_to_csv(CLOSED_LOOP_FIELDS, closed_loop_rows(grid, args.function))
    )
    print(f"wrote {args.function} grid to {args.output}")
    return EXIT_OK


def cmd_scan(args) -> int:
    if args.step <= 0:
        print("error: --step must be positive", file=sys.stderr)
        return EXIT_USAGE
    cfg = load_config(args.config)
    system = cfg.system()
    report = multiple_reset_scan(
        system, args.f_start, args.f_end, step_hz=args.step,
        steps_per_cycle=cfg.sim.steps_per_cycle,
        settle_cycles=cfg.sim.settle_cycles,
        analysis_cycles=cfg.sim.analysis_cycles,
        stepper=cfg.sim.stepper,
    )
    lines = [
        f"multiple-reset scan over [{fmt(args.f_start)}, {fmt(args.f_end)}] Hz "
        f"at {fmt(args.step)} Hz steps ({report.frequencies_hz.size} points)"
    ]
    if report.intervals_hz:
        for lo, hi in report.intervals_hz:
            lines.append(f"multiple-reset region: {fmt(lo)} to {fmt(hi)} Hz")
    else:
        lines.append("there is no multiple-reset region")
    for f, msg in report.failures:
        lines.append(f"failed at {fmt(f)} Hz: {msg}")
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    system = cfg.system()
    omega = 2.0 * math.pi * args.freq_hz
    sim_cfg = SimConfig(
        system=system.open_loop() if args.input == "eo" else system,
        kind=args.input,
        amplitude=args.amplitude,
        omega=omega,
        steps_per_cycle=cfg.sim.steps_per_cycle,
        settle_cycles=args.settle_cycles or cfg.sim.settle_cycles,
        analysis_cycles=cfg.sim.analysis_cycles,
        refractory=cfg.sim.refractory,
        stepper=cfg.sim.stepper,
    )
    trace = simulate(sim_cfg)
    Path(args.output).write_text(
        rows_to_csv(TRACE_FIELDS, trace_rows(trace, decimate=args.decimate))
    )
    print(f"wrote trace ({trace.n_samples} samples, decimation "
          f"{args.decimate}) to {args.output}")
    for note in trace.notes:
        print(f"note: {note}")

    n_h = args.harmonics or cfg.analysis.harmonics
    try:
        win = steady_state_window(trace)
    except SimulationError as exc:
        print(f"steady state not reached: {exc}")
        return EXIT_OK
    tw = trace.t[win.slice]
    print(f"steady-state window: last {win.periods} periods, "
          f"convergence metric {win.metric:.3e}")
    print(f"resets per cycle: {fmt(resets_per_cycle(trace))}"
          + ("" if trace.effective_resets else " (identity jumps: gamma = 1)"))
    if args.input == "eo":
        pred = reconstruct_open_loop_output(
            system.open_loop(), args.amplitude, 0.0, omega, n_h, tw
        )
        err = prediction_error(trace, pred, signal="y")
        print(f"prediction error (y, harmonics <= {n_h}): {err:.4%} of peak")
    elif args.input == "r":
        rec = reconstruct_closed_loop_signals(system, args.amplitude, omega, n_h, tw)
        for sig, pred in (("e", rec.error), ("y", rec.output), ("u", rec.control)):
            err = prediction_error(trace, pred, signal=sig)
            print(f"prediction error ({sig}, harmonics <= {n_h}): {err:.4%} of peak")
        print("note: the control input carries short reset transients; its "
              "truncated-series prediction underestimates narrow spikes")
    else:
        pred = reconstruct_disturbance_error(system, args.amplitude, omega, n_h, tw)
        err = prediction_error(trace, pred, signal="e")
        print(f"prediction error (e, harmonics <= {n_h}): {err:.4%} of peak")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="resetfreq", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("open-loop", help="open-loop describing-function sweep")
    p.add_argument("config")
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--function", choices=("cr", "ln", "both"), default="both")
    p.add_argument("--harmonics", type=int, default=None)
    p.add_argument("--hurwitz-tol", type=float, default=None,
                   help="tolerance for marginal poles in the pre-flight check")
    p.set_defaults(func=cmd_open_loop)

    p = sub.add_parser("closed-loop", help="closed-loop sensitivity sweep")
    p.add_argument("config")
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--function", choices=("sn", "tn", "csn", "psn"), required=True)
    p.add_argument("--harmonics", type=int, default=None)
    p.add_argument("--hurwitz-tol", type=float, default=None,
                   help="tolerance for marginal poles in the pre-flight check")
    p.set_defaults(func=cmd_closed_loop)

    p = sub.add_parser("scan", help="multiple-reset frequency scan")
    p.add_argument("config")
    p.add_argument("--f-start", type=float, default=1.0)
    p.add_argument("--f-end", type=float, default=1000.0)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("simulate", help="time-domain hybrid simulation")
    p.add_argument("config")
    p.add_argument("--input", choices=("r", "d", "eo"), required=True)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--freq-hz", type=float, required=True)
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--decimate", type=int, default=1)
    p.add_argument("--harmonics", type=int, default=None)
    p.add_argument("--settle-cycles", type=int, default=None)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
