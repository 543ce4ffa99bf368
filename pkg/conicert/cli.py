"""Command-line interface: analyze, certify, verify, oracle, selftest, serve, batch.

Exit codes: 0 success, 1 hypothesis not met, 2 synthesis or verification
failure (including an exhausted budget), 3 input error.
"""
import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from typing import List, Optional, Tuple

from jinja2 import Environment, FileSystemLoader

from conicert import __version__
from conicert.certify import (
    Report,
    analyze,
    bundle_with_prescribed_locus,
    certify_requiv,
    certify_unirational,
    make_rng,
    section_search_oracle,
    verify_report,
)
from conicert.config import EngineConfig, Settings, load_config
from conicert.exceptions import ConicertError, HypothesisError, InputError
from conicert.utils import (
    format_field,
    format_map,
    format_point,
    format_poly,
    load_json,
    parse_bundle,
    parse_cover,
    parse_field,
    parse_point,
    parse_rational_point,
)

logger = logging.getLogger(__name__)

TEMPLATES_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "templates")

EXIT_OK = 0
EXIT_HYPOTHESIS = 1
EXIT_FAILURE = 2
EXIT_INPUT = 3

BATCH_COMMANDS = ("analyze", "certify-unirational", "certify-requiv")


def exit_code_for(exc: ConicertError) -> int:
    if isinstance(exc, InputError):
        return EXIT_INPUT
    if isinstance(exc, HypothesisError):
        return EXIT_HYPOTHESIS
    return EXIT_FAILURE


def render_report(report: Report) -> str:
    """Plain-text rendering of a report through templates/report.txt.j2."""
    spec = report.spec
    env = Environment(loader=FileSystemLoader(TEMPLATES_DIR), trim_blocks=True, lstrip_blocks=True)
    template = env.get_template("report.txt.j2")
    locus = []
    for residue in report.locus.residues:
        locus.append({
            "point": format_point(spec, residue.point),
            "degree": residue.point.degree,
            "residue": format_poly(spec, residue.representative),
        })
    issued = report.issued
    return template.render(
        field=format_field(spec),
        bundle={name: format_poly(spec, f) for name, f in zip("abc", report.bundle.coefficients)},
        locus=locus,
        delta=report.locus.delta,
        star=report.star,
        star_star=report.star_star,
        certificate=report.certificate,
        cover=format_map(issued.cover.map) if issued else None,
        degree=issued.cover.degree if issued else None,
        checks=report.checks,
        seed=report.seed,
        timings=report.timings,
    )


def _emit(report: Report, as_json: bool) -> int:
    if as_json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(render_report(report))
    return report.exit_code


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_analyze(args, settings: Settings) -> int:
    bundle = parse_bundle(load_json(args.file))
    return _emit(analyze(bundle, seed=settings.engine.seed), args.json)


def cmd_certify_unirational(args, settings: Settings) -> int:
    bundle = parse_bundle(load_json(args.file))
    report = certify_unirational(bundle, settings.engine, seed=settings.engine.seed)
    return _emit(report, args.json)


def cmd_certify_requiv(args, settings: Settings) -> int:
    bundle = parse_bundle(load_json(args.file))
    s0 = parse_rational_point(bundle.spec, args.s0, "--s0")
    s1 = parse_rational_point(bundle.spec, args.s1, "--s1")
    report = certify_requiv(bundle, s0, s1, settings.engine, seed=settings.engine.seed)
    return _emit(report, args.json)


def cmd_verify(args, settings: Settings) -> int:
    bundle = parse_bundle(load_json(args.file))
    cover = parse_cover(bundle.spec, load_json(args.cover))
    if (args.s0 is None) != (args.s1 is None):
        raise InputError("--s0 and --s1 must be given together")
    s0 = s1 = None
    if args.s0 is not None:
        s0 = parse_rational_point(bundle.spec, args.s0, "--s0")
        s1 = parse_rational_point(bundle.spec, args.s1, "--s1")
    return _emit(verify_report(bundle, cover, s0, s1, seed=settings.engine.seed), args.json)


def cmd_oracle_section(args, settings: Settings) -> int:
    bundle = parse_bundle(load_json(args.file))
    result = section_search_oracle(bundle, args.max_deg, settings.engine.budget_ms)
    data = result.to_dict(bundle.spec)
    if args.json:
        print(json.dumps(data, indent=2))
    elif result.found:
        x, y, z = result.section
        spec = bundle.spec
        print(f"✓ section found after {result.candidates} candidates")
        print(f"  x = {format_poly(spec, x)}")
        print(f"  y = {format_poly(spec, y)}")
        print(f"  z = {format_poly(spec, z)}")
    else:
        print(f"✗ no section of degree <= {args.max_deg} ({result.candidates} candidates)")
        print(f"  {data['evidence']}")
    return EXIT_OK


def cmd_selftest(args, settings: Settings) -> int:
    from conicert import selftest
    return selftest.main()


def cmd_serve(args, settings: Settings) -> int:
    from conicert.main import run_server
    run_server(args.host or settings.server.host, args.port or settings.server.port)
    return EXIT_OK


def run_job(payload: Tuple[int, dict, int, dict]) -> dict:
    """Run one batch job; top-level so worker processes can unpickle it."""
    index, job, seed, engine_values = payload
    engine = EngineConfig(**engine_values)
    command = job.get("command") if isinstance(job, dict) else None
    try:
        if command not in BATCH_COMMANDS:
            raise InputError(f"job {index}: unknown command {command!r}")
        if "bundle" in job:
            bundle = parse_bundle(job["bundle"])
        else:
            spec = parse_field(job.get("field"), f"job {index}.field")
            request = job.get("degrees")
            if request is None:
                request = [parse_point(spec, p, f"job {index}.points") for p in job.get("points", [])]
            bundle = bundle_with_prescribed_locus(spec, request, make_rng(seed, index),
                                                  engine.prescribed_locus_attempts)
        if command == "analyze":
            report = analyze(bundle, seed=seed)
        elif command == "certify-unirational":
            report = certify_unirational(bundle, engine, seed=seed)
        else:
            s0 = parse_rational_point(bundle.spec, json.dumps(job.get("s0")), f"job {index}.s0")
            s1 = parse_rational_point(bundle.spec, json.dumps(job.get("s1")), f"job {index}.s1")
            report = certify_requiv(bundle, s0, s1, engine, seed=seed)
        return {"index": index, "exit_code": report.exit_code, "report": report.to_dict()}
    except ConicertError as exc:
        return {"index": index, "exit_code": exit_code_for(exc),
                "error": {"type": type(exc).__name__, "message": str(exc)}}


def cmd_batch(args, settings: Settings) -> int:
    jobs = load_json(args.file)
    if not isinstance(jobs, list):
        raise InputError(f"{args.file}: expected a list of jobs")
    seed = settings.engine.seed
    engine_values = asdict(settings.engine)
    payloads = [(i, job, seed, engine_values) for i, job in enumerate(jobs)]
    workers = args.workers if args.workers is not None else settings.engine.batch_workers
    if workers == 1 or len(payloads) <= 1:
        results = [run_job(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=workers or None) as executor:
            results = list(executor.map(run_job, payloads))
    results.sort(key=lambda r: r["index"])
    code = max((r["exit_code"] for r in results), default=EXIT_OK)
    if args.json:
        print(json.dumps({"seed": seed, "jobs": results}, indent=2))
    else:
        for r in results:
            mark = "✓" if r["exit_code"] == EXIT_OK else "✗"
            detail = r["error"]["message"] if "error" in r else (r["report"]["certificate"] or {}).get("status", "analyzed")
            print(f"{mark} job {r['index']}: exit {r['exit_code']} ({detail})")
        print(f"\nResults: {sum(r['exit_code'] == EXIT_OK for r in results)}/{len(results)} jobs succeeded")
    return code


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conicert",
        description="Conic bundles over P^1 of a finite field: residues, covers, certificates",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=None, help="Seed for randomized steps")
    parser.add_argument("--json", action="store_true", help="Print the report as JSON")
    parser.add_argument("--budget-ms", type=int, default=None, help="Time budget in milliseconds")
    parser.add_argument("--config", default=None, help="Path to a config.ini file")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="Non-split locus and conditions (*), (**)")
    p.add_argument("file", help="Bundle JSON file")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("certify-unirational", help="Synthesize and verify a cover for (*)")
    p.add_argument("file", help="Bundle JSON file")
    p.set_defaults(handler=cmd_certify_unirational)

    p = sub.add_parser("certify-requiv", help="Synthesize and verify a cover for (**) with s0, s1")
    p.add_argument("file", help="Bundle JSON file")
    p.add_argument("--s0", required=True, help="Rational point: 'inf', a coordinate or a coefficient list")
    p.add_argument("--s1", required=True, help="Rational point: 'inf', a coordinate or a coefficient list")
    p.set_defaults(handler=cmd_certify_requiv)

    p = sub.add_parser("verify", help="Run the verifiers on a given cover")
    p.add_argument("file", help="Bundle JSON file")
    p.add_argument("--cover", required=True, help="Cover JSON file")
    p.add_argument("--s0", default=None)
    p.add_argument("--s1", default=None)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("oracle-section", help="Bounded search for a polynomial section")
    p.add_argument("file", help="Bundle JSON file")
    p.add_argument("--max-deg", type=int, required=True)
    p.set_defaults(handler=cmd_oracle_section)

    p = sub.add_parser("selftest", help="Run the worked examples")
    p.set_defaults(handler=cmd_selftest)

    p = sub.add_parser("serve", help="Start the HTTP API")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(handler=cmd_serve)

    p = sub.add_parser("batch", help="Run a JSON list of jobs in parallel")
    p.add_argument("file", help="Jobs JSON file")
    p.add_argument("--workers", type=int, default=None, help="Worker processes (0 = CPU count)")
    p.set_defaults(handler=cmd_batch)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and return its exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        settings = load_config(args.config).with_engine(seed=args.seed, budget_ms=args.budget_ms)
        return args.handler(args, settings)
    except ConicertError as exc:
        print(f"✗ {type(exc).__name__}: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
