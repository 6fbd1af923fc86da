"""Command-line interface: ``qschur check | decompose | verify | gen``.

Exit codes
----------
0  success (pseudoforest, decomposition verified, result verified)
1  unreadable or malformed input, bad arguments
2  the quiver is not a pseudoforest
3  verification failed
4  a Schur iteration hit its sweep limit
5  rectangular cycle with edges in both directions (not supported)

Set ``QSCHUR_LOG`` to a logging level name (``DEBUG``, ``INFO``, ...) for
diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys

from . import __version__
from .engine import EngineOptions, Rejection, triangularize
from .errors import ContractError, IterationLimitError, UnsupportedCycleError
from .fileio import (
    ParseError,
    checksum,
    dumps,
    emit_problem,
    emit_result,
    read_problem,
    read_result,
    write_atomic,
)
from .generate import TEMPLATES, generate
from .quiver import Kind, classify, find_cycle, plan_traversal
from .verify import Tolerances, verify_all

log = logging.getLogger("qschur")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_REJECTED = 2
EXIT_VERIFY = 3
EXIT_ITERATION = 4
EXIT_UNSUPPORTED = 5


def describe(quiver) -> dict:
    """Pseudoforest report with cycles and traversal plans filled in."""
    report = classify(quiver)
    doc = report.to_dict()
    for comp, out in zip(report.components, doc["components"]):
        if comp.kind is Kind.REJECTED:
            continue
        plan = plan_traversal(quiver, comp)
        if comp.kind is Kind.PSEUDOTREE:
            cyc = find_cycle(quiver, comp)
            out["cycle"] = {"length": cyc.length, "vertices": list(cyc.vertices),
                            "edges": list(cyc.edges), "signs": list(cyc.signs)}
        else:
            out["root"] = plan.root
        out["steps"] = [[s.edge, s.fixed_vertex, s.free_vertex, s.direction.value] for s in plan.steps]
    return doc


def cmd_check(path, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        quiver, _ = read_problem(path)
    except (OSError, ParseError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    doc = describe(quiver)
    stdout.write(dumps(doc) + "\n")
    return EXIT_OK if doc["is_pseudoforest"] else EXIT_REJECTED


def _tolerances(tol: float) -> Tolerances:
    return Tolerances(reconstruction=tol, zero=tol)


def cmd_decompose(path, out, tol: float = 1e-10, max_iter: int | None = None,
                  field_override: str | None = None) -> int:
    try:
        quiver, rep = read_problem(path)
    except (OSError, ParseError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        outcome = triangularize(quiver, rep, field_override, EngineOptions(max_iter=max_iter, zero_tol=tol))
    except IterationLimitError as exc:
        diag = {"error": "iteration_limit", "message": str(exc), "context": exc.context}
        print(json.dumps(diag, default=str), file=sys.stderr)
        return EXIT_ITERATION
    except UnsupportedCycleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if isinstance(outcome, Rejection):
        write_atomic(out, emit_result(outcome, quiver, rep, None, __version__))
        print(outcome.message, file=sys.stderr)
        return EXIT_REJECTED
    report = verify_all(outcome, quiver, rep, _tolerances(tol))
    write_atomic(out, emit_result(outcome, quiver, rep, report, __version__))
    for msg in report.failures:
        print(f"verification: {msg}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_verify(problem_path, result_path, tol: float = 1e-10, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        quiver, rep = read_problem(problem_path)
        outcome, digest, _ = read_result(result_path)
    except (OSError, ParseError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if digest != checksum(quiver, rep):
        print("warning: result checksum does not match the problem; verifying anyway", file=sys.stderr)
    if isinstance(outcome, Rejection):
        ok = not classify(quiver).is_pseudoforest
        stdout.write(dumps({"passed": ok, "status": "rejected"}) + "\n")
        return EXIT_OK if ok else EXIT_VERIFY
    try:
        report = verify_all(outcome, quiver, rep, _tolerances(tol))
    except (ContractError, KeyError) as exc:
        print(f"verification: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    stdout.write(dumps(report.to_dict()) + "\n")
    return EXIT_OK if report.passed else EXIT_VERIFY


_CALL = re.compile(r"^([a-z0-9-]+)\((\d+)\)$")


def cmd_gen(template: str, out=None, dims=None, seed: int = 0, field: str = "real", **params) -> int:
    m = _CALL.match(template)
    if m:
        template = m.group(1)
        params["d" if template == "parallel" else "length"] = int(m.group(2))
    params = {k: v for k, v in params.items() if v is not None}
    try:
        quiver, rep = generate(template, dims=dims, seed=seed, field=field, **params)
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = emit_problem(quiver, rep)
    if out is None:
        sys.stdout.write(text)
    else:
        write_atomic(out, text)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _dims(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qschur", description="Simultaneous Schur decomposition of quiver representations.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="classify the quiver of a problem file")
    c.add_argument("problem")

    d = sub.add_parser("decompose", help="decompose and verify, writing a result file")
    d.add_argument("problem")
    d.add_argument("-o", "--out", required=True)
    d.add_argument("--tol", type=float, default=1e-10)
    d.add_argument("--max-iter", type=int, default=None, help="sweep cap per cycle (default 30n)")
    d.add_argument("--field-override", choices=("real", "complex"), default=None)

    v = sub.add_parser("verify", help="re-verify a result file against its problem")
    v.add_argument("problem")
    v.add_argument("result")
    v.add_argument("--tol", type=float, default=1e-10)

    g = sub.add_parser("gen", help="write a seeded random problem")
    g.add_argument("template", help=f"one of {', '.join(TEMPLATES)}; cycle(N) and parallel(D) also work")
    g.add_argument("-o", "--out", default=None)
    g.add_argument("--dims", type=_dims, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--field", choices=("real", "complex"), default="real")
    g.add_argument("--length", type=int, default=None, help="cycle length")
    g.add_argument("--signs", default=None, help="cycle edge directions, e.g. '++-'")
    g.add_argument("--vertices", type=int, default=None, help="tree vertices")
    g.add_argument("--depth", type=int, default=None, help="maximal tree depth")
    g.add_argument("-d", type=int, default=None, help="number of parallel edges")
    return p


def main(argv=None) -> int:
    level = os.environ.get("QSCHUR_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "check":
        return cmd_check(args.problem)
    if args.command == "decompose":
        return cmd_decompose(args.problem, args.out, args.tol, args.max_iter, args.field_override)
    if args.command == "verify":
        return cmd_verify(args.problem, args.result, args.tol)
    return cmd_gen(args.template, args.out, args.dims, args.seed, args.field,
                   length=args.length, signs=args.signs, vertices=args.vertices, depth=args.depth, d=args.d)


if __name__ == "__main__":
    sys.exit(main())
