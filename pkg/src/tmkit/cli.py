"""Command-line entry point.

Exit status: 0 on success (and for a true verdict), 1 when the model is
invalid or a verdict is false, 2 for usage and IO errors. Human-readable
findings go to stderr as ``file:line:col: severity: message``; structured
results go to stdout inside a fenced ``tmkit`` block.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from typing import Optional, Sequence

from . import diagnostics as dg
from .behavior import Chronology, Trace, build_chronology, enumerate_runs, evaluate_trace
from .dot import Level, RenderOptions, to_dot
from .errors import TmkitError
from .events import check_subdiagram, coverage, eventize
from .model import models_isomorphic
from .simulate import Scripted, Seeded, simulate
from .syntax import Document, SourceFile, parse, print_document
from .validate import desugar, validate_static

OK, INVALID, USAGE = 0, 1, 2


class _Fail(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


def _machine_block(payload: dict) -> str:
    return "```tmkit\n" + json.dumps(payload, indent=2, sort_keys=True) + "\n```"


def _load(path: str) -> Document:
    try:
        src = SourceFile.read(path)
    except OSError as e:
        raise _Fail(USAGE, f"cannot read {path}: {e}")
    result = parse(src)
    for d in result.diagnostics:
        print(d, file=sys.stderr)
    if result.document is None:
        raise _Fail(INVALID, f"{path}: parse failed")
    return result.document


def _pick_chronology(doc: Document, wanted: Optional[str]) -> Chronology:
    decls = {c.id: c for c in doc.chronologies}
    if wanted is None:
        if len(decls) != 1:
            raise _Fail(USAGE, f"document has {len(decls)} chronologies; pass --chronology")
        wanted = next(iter(decls))
    if wanted not in decls:
        raise _Fail(USAGE, f"no chronology '{wanted}' (have: {', '.join(sorted(decls)) or 'none'})")
    try:
        return build_chronology(doc.events, decls[wanted])
    except TmkitError as e:
        raise _Fail(INVALID, f"chronology '{wanted}': {e}")


def _pick_trace(doc: Document, wanted: str) -> Trace:
    for t in doc.traces:
        if t.id == wanted:
            return t
    raise _Fail(USAGE, f"no trace '{wanted}' (have: {', '.join(t.id for t in doc.traces) or 'none'})")


# -- subcommands --------------------------------------------------------------


def _cmd_check(args: argparse.Namespace) -> int:
    doc = _load(args.file)
    diags = list(validate_static(doc.model))
    for sub in doc.subdiagrams:
        diags.extend(check_subdiagram(doc.model, sub))
    _, event_diags = eventize(doc.subdiagrams, doc.events)
    diags.extend(event_diags)
    for d in dg.sort_diagnostics(diags):
        print(d, file=sys.stderr)

    report = coverage(doc.model, doc.subdiagrams)
    print(f"model {doc.model.name}: {len(doc.subdiagrams)} subdiagrams, {len(doc.events)} events")
    print("coverage:")
    print(f"  uncovered stages: {', '.join(str(r) for r in report.uncovered_stages) or '(none)'}")
    print(f"  uncovered arcs:   {', '.join(report.uncovered_arcs) or '(none)'}")
    print(f"  multiply covered: {', '.join(report.multiply_covered) or '(none)'}")
    print(
        _machine_block(
            {
                "diagnostics": [
                    {"code": d.code, "severity": str(d.severity), "message": d.message, "elements": list(d.elements)}
                    for d in dg.sort_diagnostics(diags)
                ],
                "coverage": {
                    "uncovered_stages": [str(r) for r in report.uncovered_stages],
                    "uncovered_arcs": list(report.uncovered_arcs),
                    "multiply_covered": list(report.multiply_covered),
                },
            }
        )
    )
    return INVALID if dg.has_errors(diags) else OK


def _cmd_desugar(args: argparse.Namespace) -> int:
    doc = _load(args.file)
    try:
        full = desugar(doc.model)
    except TmkitError as e:
        raise _Fail(INVALID, str(e))
    print(print_document(replace(doc, model=full)), end="")
    return OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    doc = _load(args.file)
    chron = _pick_chronology(doc, args.chronology)
    trace = _pick_trace(doc, args.trace)
    try:
        verdict = evaluate_trace(chron, trace)
    except ValueError as e:
        raise _Fail(INVALID, str(e))
    payload = {"truth": verdict.truth}
    if verdict.truth:
        payload["run"] = list(verdict.run or ())
        print(verdict.summary())
    else:
        payload["violation"] = str(verdict.violation)
        print(verdict.summary(), file=sys.stderr)
    print(_machine_block(payload))
    return OK if verdict.truth else INVALID


def _cmd_simulate(args: argparse.Namespace) -> int:
    doc = _load(args.file)
    chron = _pick_chronology(doc, args.chronology)
    if args.choose:
        choices = []
        for item in args.choose:
            if "=" not in item:
                raise _Fail(USAGE, f"--choose takes group=event, got {item!r}")
            g, _, e = item.partition("=")
            choices.append((g, e))
        policy = Scripted(tuple(choices))
        trace_id = "sim_scripted"
    else:
        seed = args.seed if args.seed is not None else 0
        policy = Seeded(seed)
        trace_id = f"sim_seed_{seed}"
    try:
        trace = simulate(doc.model, doc.subdiagrams, doc.events, chron, policy, trace_id)
    except TmkitError as e:
        raise _Fail(INVALID, str(e))
    body = ", ".join(f"{e} @ {ts}" for e, ts in trace.occurrences)
    print(f"trace {trace.id} = [ {body} ]")
    return OK


def _cmd_runs(args: argparse.Namespace) -> int:
    doc = _load(args.file)
    chron = _pick_chronology(doc, args.chronology)
    try:
        runs = enumerate_runs(chron, args.bound)
    except (TmkitError, ValueError) as e:
        raise _Fail(INVALID, str(e))
    for run in runs:
        print("[" + ", ".join(run) + "]")
    print(f"{len(runs)} run(s)", file=sys.stderr)
    return OK


def _cmd_render(args: argparse.Namespace) -> int:
    doc = _load(args.file)
    highlight = frozenset(x for part in args.highlight for x in part.split(",") if x)
    options = RenderOptions(level=Level(args.level), highlight=highlight, clusters=not args.flat)
    try:
        text = to_dot(doc, options)
    except TmkitError as e:
        raise _Fail(USAGE, str(e))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        print(text, end="")
    return OK


def _cmd_iso(args: argparse.Namespace) -> int:
    a = _load(args.file_a)
    b = _load(args.file_b)
    try:
        result = models_isomorphic(a.model, b.model)
    except TmkitError as e:
        raise _Fail(INVALID, str(e))
    print(f"isomorphic: {'true' if result.isomorphic else 'false'}")
    print(_machine_block({"isomorphic": result.isomorphic, "mapping": result.mapping}))
    return OK if result.isomorphic else INVALID


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tmkit", description="thinging-machine model toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="parse, validate and report coverage")
    c.add_argument("file")
    c.set_defaults(fn=_cmd_check)

    c = sub.add_parser("desugar", help="expand simplified notation to full")
    c.add_argument("file")
    c.set_defaults(fn=_cmd_desugar)

    c = sub.add_parser("evaluate", help="truth-evaluate a trace against a chronology")
    c.add_argument("file")
    c.add_argument("--chronology")
    c.add_argument("--trace", required=True)
    c.set_defaults(fn=_cmd_evaluate)

    c = sub.add_parser("simulate", help="produce a conforming trace")
    c.add_argument("file")
    c.add_argument("--chronology")
    c.add_argument("--seed", type=int)
    c.add_argument("--choose", action="append", default=[], metavar="GROUP=EVENT")
    c.set_defaults(fn=_cmd_simulate)

    c = sub.add_parser("runs", help="enumerate all maximal runs")
    c.add_argument("file")
    c.add_argument("--chronology")
    c.add_argument("--bound", type=int, default=1000)
    c.set_defaults(fn=_cmd_runs)

    c = sub.add_parser("render", help="emit DOT for a view of the document")
    c.add_argument("file")
    c.add_argument("--level", choices=[lv.value for lv in Level], default="static")
    c.add_argument("-o", "--output")
    c.add_argument("--highlight", action="append", default=[])
    c.add_argument("--flat", action="store_true", help="no nested clusters")
    c.set_defaults(fn=_cmd_render)

    c = sub.add_parser("iso", help="structural equivalence of two models")
    c.add_argument("file_a")
    c.add_argument("file_b")
    c.set_defaults(fn=_cmd_iso)

    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and args.seed is not None and args.choose:
        parser.error("--seed and --choose are mutually exclusive")
    try:
        return args.fn(args)
    except _Fail as e:
        print(f"tmkit: {e}", file=sys.stderr)
        return e.status


if __name__ == "__main__":
    sys.exit(main())
