"""Command-line entry point.

Exit codes: 0 success, 1 a row was flagged (scientific failure), 2 usage or
input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .errors import GridTooSmall, LGWeakError, ParseError, ValidationError
from .evolution import couple_and_postselect
from .probe_field import dumps_field
from .quantum_core import joint_weak_value_report
from .scenario import bundled, parse_scenario

EXIT_OK, EXIT_FLAGGED, EXIT_USAGE = 0, 1, 2


def _read_scenario(arg: str):
    """Path to a JSON document, or ``bundled:<name>`` for a shipped scenario."""
    if arg.startswith("bundled:"):
        return parse_scenario(bundled(arg.split(":", 1)[1]))
    return parse_scenario(Path(arg).read_bytes())


def _write(data: bytes, out: str | None) -> None:
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _finish(rows, args) -> int:
    _write(harness.emit_report(rows, args.format), args.out)
    hit = harness.first_flagged(rows)
    if hit is not None:
        i, row = hit
        print(f"lgweak: row {i} (g={row.g:.17g}) flagged: {row.flag}", file=sys.stderr)
        return EXIT_FLAGGED
    return EXIT_OK


def cmd_simulate(args) -> int:
    sc = _read_scenario(args.scenario)
    g = sc.g if args.g is None else args.g
    if args.field_out:
        probe = couple_and_postselect(sc.with_(g=g), args.workers)
        Path(args.field_out).write_text(dumps_field(probe.field))
    if sc.l == 0:
        raise ValidationError("simulate reports two-probe estimates and needs |l| >= 1")
    return _finish([harness.run_point(sc, g, args.workers, args.tol)], args)


def cmd_sweep(args) -> int:
    sc = _read_scenario(args.scenario)
    gs = harness.g_grid(args.g_min, args.g_max, args.points, args.log)
    return _finish(harness.run_sweep(sc, gs, args.workers, args.tol), args)


def cmd_extract(args) -> int:
    records = harness.parse_report_csv(Path(args.from_csv).read_bytes())
    sc = _read_scenario(args.scenario) if args.scenario else None
    rows = harness.reports_from_displacements(records, equal_squares=args.equal_squares, sc=sc)
    if args.tol is not None:
        for row in rows:
            harness.check_tolerance(row, args.tol)
    return _finish(rows, args)


def cmd_oracle(args) -> int:
    sc = _read_scenario(args.scenario)
    report = joint_weak_value_report(sc.pre, sc.post, sc.a, sc.b)
    doc = {k: [v.real, v.imag] for k, v in report.as_dict().items()}
    _write((json.dumps(doc, indent=1) + "\n").encode(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lgweak", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario=True):
        if scenario:
            sp.add_argument("scenario", help="scenario JSON file, or bundled:<name> (pauli_zz, identity)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--tol", type=float, help="flag rows whose joint estimate misses the oracle by more (relative)")
        sp.add_argument("--workers", type=int, default=1, help="threads for the per-momentum kick")

    sp = sub.add_parser("simulate", help="one scenario at one coupling")
    common(sp)
    sp.add_argument("--g", type=float, help="override the scenario coupling")
    sp.add_argument("--field-out", help="also write the final (l as in scenario) probe field, text format")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="simulate over a range of couplings")
    common(sp)
    sp.add_argument("--g-min", type=float, required=True)
    sp.add_argument("--g-max", type=float, required=True)
    sp.add_argument("--points", type=int, required=True)
    sp.add_argument("--log", action="store_true", help="geometric spacing")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("extract", help="apply the inversion formulas to measured displacements")
    common(sp, scenario=False)
    sp.add_argument("--from-csv", required=True, help="CSV with g, l and the eight d*_plus/d*_minus columns")
    sp.add_argument("--scenario", help="optional scenario for oracle values and residuals")
    sp.add_argument("--equal-squares", action="store_true", help="assert A^2 = B^2 (enables the single-probe method)")
    sp.set_defaults(func=cmd_extract)

    sp = sub.add_parser("oracle", help="print the weak values of the scenario")
    sp.add_argument("scenario")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        print("lgweak: --workers must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (ParseError, ValidationError, GridTooSmall, OSError, KeyError) as exc:
        print(f"lgweak: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LGWeakError as exc:
        print(f"lgweak: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FLAGGED


if __name__ == "__main__":
    sys.exit(main())
