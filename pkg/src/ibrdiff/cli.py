"""Command line: ``ibrdiff run | verify | plane``.

Exit codes: 0 success, 1 a finding failed, 2 bad configuration or input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, dump_defaults, load_study
from .network import SingularNetworkError
from .relays import ELEMENTS, boundary
from .scenarios import (
    CONTROLS,
    FAULT_TYPES,
    LEVELS,
    LOCATIONS,
    ScenarioMatrix,
    StudyConfig,
    check_findings,
    enumerate_scenarios,
    result_records,
    run_matrix,
)

EXIT_OK, EXIT_FINDINGS, EXIT_CONFIG = 0, 1, 2

CSV_COLUMNS = (
    "scenario_id", "location", "fault_type", "r_phase_ohm", "r_ground_ohm",
    "control", "element", "i_rst_pu", "i_op_pu", "trip", "converged",
)
PLANE_COLUMNS = ("i_rst_pu", "i_op_pu", "scenario_id", "zone")
BOUNDARY_COLUMNS = ("i_rst_pu", "i_op_pu")


class UsageError(ValueError):
    pass


def fmt(value) -> str:
    """Fixed 9-significant-digit text for numbers, lowercase booleans."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)


def _json_value(value):
    if isinstance(value, bool) or not isinstance(value, float):
        return value
    return float(format(value, ".9g"))


def write_table(rows, columns, path: Path, form: str) -> None:
    """Write rows as CSV or as a JSON list of records, byte-stable."""
    if form == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(r[c]) for c in columns])
        text = buf.getvalue()
    else:
        records = [{c: _json_value(r[c]) for c in columns} for r in rows]
        text = json.dumps(records, indent=1) + "\n"
    path.write_text(text, encoding="utf-8")


def parse_only(spec: str, matrix: ScenarioMatrix) -> ScenarioMatrix:
    """Narrow the matrix with a comma list of locations, types, levels and controls."""
    picks = {"locations": [], "fault_types": [], "levels": [], "controls": []}
    types = {t.value: t for t in FAULT_TYPES}
    for tok in (t.strip().upper() for t in spec.split(",")):
        if not tok:
            continue
        if tok in LOCATIONS:
            picks["locations"].append(tok)
        elif tok in types:
            picks["fault_types"].append(types[tok])
        elif tok in LEVELS:
            picks["levels"].append(tok)
        elif tok in CONTROLS:
            picks["controls"].append(tok)
        else:
            raise UsageError(f"--only: unknown token {tok!r}")
    narrowed = {}
    for key, chosen in picks.items():
        if chosen:
            current = getattr(matrix, key)
            narrowed[key] = tuple(x for x in chosen if x in current)
    return replace(matrix, **narrowed)


def _load(args) -> StudyConfig:
    study = load_study(args.config) if args.config else StudyConfig()
    if args.only:
        study = replace(study, matrix=parse_only(args.only, study.matrix))
    return study


def _report_nonconverged(results) -> None:
    bad = [r.scenario_id for r in results if not r.converged]
    if bad:
        print(f"warning: {len(bad)} scenario(s) did not converge: {', '.join(bad)}", file=sys.stderr)


def plane_rows(results, element: str) -> list:
    return [
        {
            "i_rst_pu": r.decisions[element].point.i_rst,
            "i_op_pu": r.decisions[element].point.i_op,
            "scenario_id": r.scenario_id,
            "zone": "internal" if r.internal else "external",
        }
        for r in results
    ]


def boundary_rows(study: StudyConfig, points) -> list:
    top = max([2.0] + [1.1 * p["i_rst_pu"] for p in points])
    return [
        {"i_rst_pu": float(x), "i_op_pu": float(y)}
        for x, y in boundary(study.relay, top, 100)
    ]


def cmd_run(args) -> int:
    study = _load(args)
    results = run_matrix(study, jobs=args.jobs)
    _report_nonconverged(results)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ext = args.format
    write_table(result_records(results), CSV_COLUMNS, out / f"results.{ext}", ext)
    for e in ELEMENTS:
        write_table(plane_rows(results, e), PLANE_COLUMNS, out / f"plane_{e}.{ext}", ext)
    print(f"{len(results)} scenarios written to {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    study = _load(args)
    results = run_matrix(study, jobs=args.jobs)
    _report_nonconverged(results)
    report = check_findings(results, study)
    print(report.format())
    return EXIT_OK if report.passed else EXIT_FINDINGS


def cmd_plane(args) -> int:
    if args.element not in ELEMENTS:
        raise UsageError(f"unknown element {args.element!r}; expected one of {', '.join(ELEMENTS)}")
    study = _load(args)
    results = run_matrix(study, jobs=args.jobs)
    _report_nonconverged(results)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    points = plane_rows(results, args.element)
    ext = args.format
    write_table(points, PLANE_COLUMNS, out / f"plane_{args.element}.{ext}", ext)
    write_table(boundary_rows(study, points), BOUNDARY_COLUMNS,
                out / f"boundary_{args.element}.{ext}", ext)
    print(f"{len(points)} points for {args.element} written to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML study file (defaults when omitted)")
    common.add_argument("--only", help="filter, e.g. F3,AG or F3,AG,R1,C1")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")

    p = argparse.ArgumentParser(prog="ibrdiff", description="Differential protection fault study.")
    p.add_argument("--dump-defaults", action="store_true", help="print the default configuration and exit")
    sub = p.add_subparsers(dest="command")
    sub.add_parser("run", parents=[common], help="run the matrix and write results")
    sub.add_parser("verify", parents=[common], help="check the expected findings")
    plane = sub.add_parser("plane", parents=[common], help="differential-plane data for one element")
    plane.add_argument("--element", required=True, help=", ".join(ELEMENTS))
    return p


COMMANDS = {"run": cmd_run, "verify": cmd_verify, "plane": cmd_plane}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.dump_defaults:
        sys.stdout.write(dump_defaults())
        return EXIT_OK
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, UsageError, SingularNetworkError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
