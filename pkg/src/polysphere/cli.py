"""Command line entry point: ``polysphere ball|map|search|verify ...``.

Exit codes: 0 when every check passes, 1 when a verified property fails,
2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import linalg as la
from .cli_io import dumps, matrix_to_json, parse_map, resolve_ball, serialize_ball
from .convex_core import polar_dual
from .differential import LimitSchedule
from .errors import ParseError, PolysphereError, ValidationError
from .extension import StitchReport, extend
from .iso_search import enumerate_isometries
from .sphere_map import antipodal_residual, isometry_residual, probe_points, sample_pairs, sphere_residual
from .verify import verify_lemmas

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _emit(args, payload: dict, text: str) -> None:
    print(dumps(payload) if args.json else text, end="" if args.json else "\n")


def cmd_ball_info(args) -> int:
    ball = resolve_ball(args.ball)
    census = list(ball.lattice.census())
    payload = {"dim": ball.dim, "vertices": len(ball.vertices), "facets": len(ball.facets),
               "face_census": census}
    lines = [f"dim       {ball.dim}", f"vertices  {len(ball.vertices)}",
             f"facets    {len(ball.facets)}",
             "faces     " + "  ".join(f"f{k}={n}" for k, n in enumerate(census))]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_ball_dual(args) -> int:
    dual = polar_dual(resolve_ball(args.ball))
    text = serialize_ball(dual, args.out)
    if args.out is None:
        print(text, end="")
    return EXIT_OK


def _load_map(args):
    src, tgt = resolve_ball(args.source), resolve_ball(args.target)
    return parse_map(args.map, src, tgt)


def cmd_map_check(args) -> int:
    f = _load_map(args)
    pts = probe_points(f.source, args.samples, args.seed)
    pairs = sample_pairs(f.source, args.samples, args.seed)
    res = {"sphere_residual": sphere_residual(f, pts),
           "isometry_residual": isometry_residual(f, pairs),
           "antipodal_residual": antipodal_residual(f, pts)}
    ok = all(r <= f.tol for r in res.values())
    payload = {k: str(v) for k, v in res.items()}
    payload["pass"] = ok
    text = "\n".join(f"{k:<20}{v}" for k, v in res.items()) + f"\n{'pass' if ok else 'FAIL'}"
    _emit(args, payload, text)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_map_extend(args) -> int:
    f = _load_map(args)
    result = extend(f, args.seed)
    if isinstance(result, StitchReport):
        lines = [d.describe(f.source) for d in result.disagreements]
        payload = {"status": result.status, "disagreements": [
            {"facets": list(d.facets), "ridge": d.ridge, "vertex": d.vertex,
             "defect": [str(x) for x in d.defect]} for d in result.disagreements]}
        _emit(args, payload, "inconsistent\n" + "\n".join(lines))
        return EXIT_FAIL
    _emit(args, {"status": "consistent", "matrix": matrix_to_json(result)}, la.format_matrix(result))
    return EXIT_OK


def cmd_search_iso(args) -> int:
    src, tgt = resolve_ball(args.source), resolve_ball(args.target)
    found = enumerate_isometries(src, tgt, limit=args.limit)
    payload = {"count": len(found), "isometries": [matrix_to_json(A) for A in found]}
    text = f"{len(found)} isometries"
    if args.show:
        text += "".join("\n\n" + la.format_matrix(A) for A in found)
    _emit(args, payload, text)
    return EXIT_OK


def cmd_verify_lemmas(args) -> int:
    f = _load_map(args)
    schedule = LimitSchedule(depth=args.schedule_depth, tol=args.tol)
    report = verify_lemmas(f, seed=args.seed, instances=args.instances, schedule=schedule)
    text = report.to_json()
    if args.report is not None:
        Path(args.report).write_text(text, encoding="utf-8")
    if args.json:
        print(text, end="")
    else:
        for e in report.entries:
            res = "-" if e.max_residual is None else f"{e.max_residual:.3g}"
            print(f"{'PASS' if e.passed else 'FAIL'}  {e.name:<28} n={e.instances:<4} max={res}"
                  + (f"  ({e.error})" if e.error else ""))
        print("overall: " + ("pass" if report.overall_pass else "FAIL"))
    return EXIT_OK if report.overall_pass else EXIT_FAIL


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="polysphere", description=__doc__.splitlines()[0])
    groups = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def leaf(group, name, func, help_):
        sp = group.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        return sp

    def map_args(sp):
        sp.add_argument("source", help="source ball file or corpus name")
        sp.add_argument("target", help="target ball file or corpus name")
        sp.add_argument("map", help="map JSON file")
        sp.add_argument("--seed", type=int, default=0)

    ball = groups.add_parser("ball", help="ball queries").add_subparsers(dest="cmd", required=True)
    leaf(ball, "info", cmd_ball_info, "dimension, counts and face census").add_argument("ball")
    sp = leaf(ball, "dual", cmd_ball_dual, "polar dual ball as JSON")
    sp.add_argument("ball")
    sp.add_argument("--out", default=None, help="write to this path instead of stdout")

    mp = groups.add_parser("map", help="sphere map checks").add_subparsers(dest="cmd", required=True)
    sp = leaf(mp, "check", cmd_map_check, "sphere, isometry and antipodal residuals")
    map_args(sp)
    sp.add_argument("--samples", type=int, default=100)
    map_args(leaf(mp, "extend", cmd_map_extend, "recover the linear extension"))

    se = groups.add_parser("search", help="isometry search").add_subparsers(dest="cmd", required=True)
    sp = leaf(se, "iso", cmd_search_iso, "enumerate linear isometries")
    sp.add_argument("source")
    sp.add_argument("target")
    sp.add_argument("--limit", type=int, default=None)
    sp.add_argument("--show", action="store_true", help="print the matrices")

    ve = groups.add_parser("verify", help="lemma verification").add_subparsers(dest="cmd", required=True)
    sp = leaf(ve, "lemmas", cmd_verify_lemmas, "run the lemma suite and write a report")
    map_args(sp)
    sp.add_argument("--instances", type=int, default=100)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--schedule-depth", type=int, default=30)
    sp.add_argument("--report", default=None, help="path for the JSON report")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, OSError) as exc:
        print(f"polysphere: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PolysphereError as exc:
        print(f"polysphere: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        # flag values the library refuses, e.g. a schedule shorter than its window
        print(f"polysphere: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
