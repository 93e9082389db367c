"""Command-line entry point: ``satfr {sweep,heatmap,verdict,locus}``.

Exit codes: 0 success, 1 scenario or validation error, 2 computation
failure (no usable row, no stable candidate, failed limit-cycle check).
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .cli_io import (emit, load_scenario, run_heatmap, run_locus, run_sweep,
                     verdict_limit_cycle, verdict_string_stability)
from .harmonic_balance import NoRootFound
from .model import ValidationError, default_frequency_grid

EXIT_OK, EXIT_INPUT, EXIT_COMPUTE = 0, 1, 2

log = logging.getLogger("satfr")


def _add_common(p):
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--out", default=".", help="output directory (default: .)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--full-sweep", action="store_true",
                   help="require a stable incremental locus at every grid frequency")


def _add_grid(p):
    p.add_argument("--fmin", type=float, help="lowest frequency [Hz]")
    p.add_argument("--fmax", type=float, help="highest frequency [Hz]")
    p.add_argument("--fpoints", type=int, help="number of frequencies")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="satfr", description="Frequency response of a saturated car-following loop.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="linear / IDF (/ simulated) response per frequency")
    _add_common(p)
    _add_grid(p)
    p.add_argument("--with-sim", action="store_true", help="add the simulated column")
    p.add_argument("--degrees", action="store_true", help="extra phase columns in degrees")

    p = sub.add_parser("heatmap", help="response over frequency x amplitude ratio")
    _add_common(p)
    p.add_argument("--fmin", type=float, default=0.1)
    p.add_argument("--fmax", type=float, default=0.5)
    p.add_argument("--fpoints", type=int, default=40)
    p.add_argument("--ratio-min", type=float, default=0.0)
    p.add_argument("--ratio-max", type=float, default=8.0)
    p.add_argument("--ratio-points", type=int, default=40)

    p = sub.add_parser("verdict", help="string-stability or limit-cycle verdict")
    _add_common(p)
    _add_grid(p)
    p.add_argument("--with-sim", action="store_true")
    p.add_argument("--limit-cycle", action="store_true",
                   help="zero-input checks instead of the string-stability verdict")

    p = sub.add_parser("locus", help="incremental open-loop locus at one frequency")
    _add_common(p)
    p.add_argument("--freq", type=float, required=True, help="frequency [Hz]")
    p.add_argument("--theta-samples", type=int, default=None)
    return parser


def _regrid(scenario, args):
    if args.fmin is None and args.fmax is None and args.fpoints is None:
        return scenario
    grid = scenario.freq_grid
    fmin = grid[0] if args.fmin is None else args.fmin
    fmax = grid[-1] if args.fmax is None else args.fmax
    points = len(grid) if args.fpoints is None else args.fpoints
    return scenario.with_grid(default_frequency_grid(fmin, fmax, points))


def _print_paths(paths):
    for p in paths:
        print(f"wrote {p}")


def _cmd_sweep(scenario, args):
    result = run_sweep(_regrid(scenario, args), args.with_sim, args.full_sweep)
    for w in result.warnings:
        log.warning(w)
    _print_paths(emit(result, args.format, args.out, "sweep", degrees=args.degrees))
    return EXIT_COMPUTE if result.all_failed else EXIT_OK


def _cmd_heatmap(scenario, args):
    result = run_heatmap(scenario, (args.fmin, args.fmax), (args.ratio_min, args.ratio_max),
                         (args.fpoints, args.ratio_points), args.full_sweep)
    _print_paths(emit(result, args.format, args.out, "heatmap"))
    ok = result.layers["mag_idf"]
    return EXIT_COMPUTE if not (ok == ok).any() else EXIT_OK


def _describe(v):
    if v is None:
        return "no usable rows"
    verdict = "Stable" if v.string_stable else "Unstable"
    extra = f", {v.missing_rows} rows missing" if v.missing_rows else ""
    return f"{verdict} (max |F| = {v.max_magnitude:.6g} at {v.argmax_f_hz:.6g} Hz{extra})"


def _cmd_verdict(scenario, args):
    scenario = _regrid(scenario, args)
    if args.limit_cycle:
        report = verdict_limit_cycle(scenario)
        b = report.balance
        print(f"balance roots: {len(b.roots)} (min g/B = {b.min_g_over_B:.6g})")
        for d in report.decays:
            print(f"decay from {d.initial_offset:g} m: envelope {d.final_envelope:.3g} "
                  f"{'pass' if d.passed else 'FAIL'}")
        print("no limit cycle" if report.passed else "limit-cycle check FAILED")
        _print_paths(emit(report, "json", args.out, "limit_cycle", scenario=scenario))
        return EXIT_OK if report.passed else EXIT_COMPUTE
    report = verdict_string_stability(scenario, args.with_sim, args.full_sweep)
    print(f"active limits: {', '.join(report.active_limits) or 'none'}")
    print(f"linear: {_describe(report.linear)}")
    print(f"idf: {_describe(report.idf)}")
    if report.sim is not None:
        print(f"simulation: {_describe(report.sim)}")
    _print_paths(emit(report, "json", args.out, "verdict"))
    return EXIT_COMPUTE if report.idf is None else EXIT_OK


def _cmd_locus(scenario, args):
    result = run_locus(scenario, args.freq, args.theta_samples)
    print(f"B = {result.B:.9g}, winding = {result.winding:.6g}, {result.stability}")
    _print_paths(emit(result, args.format, args.out, "locus", scenario=scenario))
    return EXIT_OK


COMMANDS = {"sweep": _cmd_sweep, "heatmap": _cmd_heatmap,
            "verdict": _cmd_verdict, "locus": _cmd_locus}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        scenario = load_scenario(args.scenario)
        for w in scenario.warnings():
            log.warning(w)
        return COMMANDS[args.command](scenario, args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NoRootFound as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
