"""
Command-line entry point for polyloc.

Exit status: 0 on success, 1 for invalid input, 2 when a bound is exceeded
where it must not be (LHV suite failures, unresolved discrepancy targets).
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

import scanner
from config import get_settings
from errors import ConfigurationError, PolylocError
from lhv import archive_failures, run_lhv_suite
from reports import (
    dump_summary,
    load_known_discrepancies,
    load_resumable_rows,
    parse_row,
    render_gnuplot,
    write_sidecar,
    write_sweep_csv,
    write_sweep_rows,
    write_table_csv,
)
from schemas import (
    CompareLinearRequest,
    DiscrepancyReportResponse,
    EntanglementRequest,
    EntanglementResponse,
    EvaluationResponse,
    LhvSuiteResponse,
    LinearComparisonResponse,
    MaximizeResponse,
    SweepSpec,
    ThresholdResponse,
)

logger = logging.getLogger("polyloc")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_FORBIDDEN = 2

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _load_json(path: str) -> Dict[str, Any]:
    if path == "-":
        return json.load(sys.stdin)
    with open(path) as fh:
        return json.load(fh)


def _parse_box(entries: List[str]) -> Dict[str, List[float]]:
    """name=lo:hi entries."""
    box = {}
    for entry in entries:
        try:
            name, bounds = entry.split("=", 1)
            lo, hi = bounds.split(":", 1)
            box[name.strip()] = [float(lo), float(hi)]
        except ValueError:
            raise ConfigurationError(f"Box entry {entry!r} must look like name=lo:hi")
    return box


def _print(payload: Any) -> None:
    print(dump_summary(payload))


def cmd_evaluate(args: argparse.Namespace) -> int:
    model = scanner.build_network(_load_json(args.spec))
    evaluation = scanner.evaluate_model(model, search=args.search_signs)
    if args.table:
        with open(args.table, "w", newline="") as fh:
            write_table_csv(fh, evaluation.distribution.rows(), evaluation.n)
        logger.info("Wrote probability table to %s", args.table)
    _print(EvaluationResponse.model_validate(evaluation).model_dump())
    return EXIT_OK


def cmd_search_signs(args: argparse.Namespace) -> int:
    model = scanner.build_network(_load_json(args.spec))
    evaluation = scanner.evaluate_model(model, search=True)
    _print(EvaluationResponse.model_validate(evaluation).model_dump())
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    spec = SweepSpec.model_validate(_load_json(args.spec))
    if args.search_signs:
        spec = spec.model_copy(update={"search_signs": True})
    names = [axis.name for axis in spec.axes]
    canonical = spec.model_dump(mode="json")
    if args.output is None:
        rows = scanner.sweep(spec, workers=args.workers)
        write_sweep_rows(sys.stdout, names, rows, with_signs=spec.search_signs)
        return EXIT_OK
    output = Path(args.output)
    done = {}
    for raw in load_resumable_rows(output, canonical):
        params, fields = parse_row(raw, names)
        row = scanner.SweepRow(params=params, **fields)
        done[row.key] = row
    rows = scanner.sweep(spec, done=done, workers=args.workers)
    write_sweep_csv(output, names, rows, with_signs=spec.search_signs)
    write_sidecar(output, canonical)
    summary = {
        "output": str(output),
        "rows": len(rows),
        "reused": len(done),
        "violated": sum(1 for row in rows if row.violated),
    }
    if args.gnuplot:
        summary["gnuplot"] = str(render_gnuplot(output, names))
    _print(summary)
    return EXIT_OK


def cmd_threshold(args: argparse.Namespace) -> int:
    result = scanner.find_threshold(
        _load_json(args.spec), args.parameter, args.lo, args.hi, xtol=args.xtol, search=args.search_signs
    )
    _print(ThresholdResponse.model_validate(result).model_dump())
    return EXIT_OK


def cmd_maximize(args: argparse.Namespace) -> int:
    box = _parse_box(args.box)
    if args.quantity:
        result = scanner.maximize_quantity(args.quantity, box, points_per_axis=args.points, workers=args.workers)
    elif args.network:
        if not box:
            raise ConfigurationError("Maximizing a network template needs at least one --box entry")
        result = scanner.maximize_template(_load_json(args.network), box, points_per_axis=args.points, workers=args.workers)
    else:
        raise ConfigurationError("Give --quantity or --network")
    _print(MaximizeResponse.model_validate(result).model_dump())
    return EXIT_OK


def cmd_lhv_test(args: argparse.Namespace) -> int:
    report = run_lhv_suite(
        n=args.n,
        models=args.models,
        triples=args.triples,
        max_cardinality=args.max_cardinality,
        seed=args.seed,
        trivial_sources=args.trivial_source,
        workers=args.workers,
    )
    payload = LhvSuiteResponse.model_validate(report).model_dump()
    if report.failures:
        payload["archived"] = [str(p) for p in archive_failures(report, Path(args.dump_dir))]
    _print(payload)
    return EXIT_FORBIDDEN if report.failures else EXIT_OK


def cmd_entanglement_detect(args: argparse.Namespace) -> int:
    request = EntanglementRequest.model_validate(_load_json(args.spec))
    verdict = scanner.entanglement_detect(request.sources, request.povm, request.signs)
    _print(EntanglementResponse.model_validate(verdict).model_dump())
    return EXIT_OK


def cmd_compare_linear(args: argparse.Namespace) -> int:
    body = _load_json(args.spec)
    request = CompareLinearRequest.model_validate({"network": scanner.build_network(body).model_dump()})
    comparison = scanner.compare_linear(request.network)
    _print(LinearComparisonResponse.model_validate(comparison).model_dump())
    return EXIT_OK


def cmd_discrepancy_report(args: argparse.Namespace) -> int:
    known = load_known_discrepancies(Path(args.ledger)) if args.ledger else None
    reports = scanner.discrepancy_report(args.target or None, grid=args.grid, known=known, workers=args.workers)
    _print([DiscrepancyReportResponse.model_validate(r).model_dump() for r in reports])
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FORBIDDEN


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("main:app", host=args.host, port=args.port, reload=False)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyloc",
        description="Nonlocality tests for quantum polygon networks.",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="count", default=0, help="More logging (repeatable)")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Errors only")
    parser.add_argument("--workers", type=int, default=None, help="Worker threads (default: POLYLOC_THREADS)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="Evaluate one network spec")
    p.add_argument("spec", help="Network-spec JSON file ('-' for stdin)")
    p.add_argument("--table", help="Write the probability table as CSV")
    p.add_argument("--search-signs", action="store_true", help="Use the best sign triple (triangles)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("search-signs", help="Best sign triple for a triangle")
    p.add_argument("spec")
    p.set_defaults(func=cmd_search_signs)

    p = sub.add_parser("sweep", help="Grid evaluation of a network template")
    p.add_argument("spec", help="Sweep-spec JSON: {network, axes, search_signs}")
    p.add_argument("-o", "--output", help="CSV path; resumes when its sidecar matches")
    p.add_argument("--gnuplot", action="store_true", help="Also write a gnuplot script next to the CSV")
    p.add_argument("--search-signs", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("threshold", help="Crossing of s = 1 along one parameter")
    p.add_argument("spec", help="Network template JSON")
    p.add_argument("--parameter", required=True)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--xtol", type=float, default=1e-5)
    p.add_argument("--search-signs", action="store_true")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("maximize", help="Grid plus simplex maximization")
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--quantity", choices=sorted(scanner.QUANTITIES))
    target.add_argument("--network", help="Network template JSON whose s_value is maximized")
    p.add_argument("--box", action="append", default=[], metavar="NAME=LO:HI")
    p.add_argument("--points", type=int, default=21, help="Grid points per axis")
    p.set_defaults(func=cmd_maximize)

    p = sub.add_parser("lhv-test", help="Random hidden-variable models against the bound")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--models", type=int, default=100)
    p.add_argument("--triples", type=int, default=20)
    p.add_argument("--max-cardinality", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trivial-source", type=int, action="append", default=[], help="0-based source of cardinality 1")
    p.add_argument("--dump-dir", default="lhv_failures")
    p.set_defaults(func=cmd_lhv_test)

    p = sub.add_parser("entanglement-detect", help="Verdict for three pure sources")
    p.add_argument("spec", help="JSON {sources, povm, signs}")
    p.set_defaults(func=cmd_entanglement_detect)

    p = sub.add_parser("compare-linear", help="Triangle versus linear-chain detection")
    p.add_argument("spec", help="Triangle network-spec JSON")
    p.set_defaults(func=cmd_compare_linear)

    p = sub.add_parser("discrepancy-report", help="Printed closed forms against the pipeline")
    p.add_argument("--target", action="append", default=[], choices=sorted(scanner.DISCREPANCY_TARGETS))
    p.add_argument("--grid", type=int, default=11)
    p.add_argument("--ledger", help="Known-discrepancy ledger (default: KNOWN_DISCREPANCIES)")
    p.set_defaults(func=cmd_discrepancy_report)

    p = sub.add_parser("serve", help="Run the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    if args.quiet:
        level = logging.ERROR
    elif args.verbose >= 2:
        level = logging.DEBUG
    elif args.verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, get_settings().log_level, logging.WARNING)
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _configure_logging(args)
        return args.func(args)
    except (PolylocError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
