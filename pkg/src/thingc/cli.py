"""Command-line entry point: parse, validate, simulate, export, translate.

Exit codes: 0 success, 1 validation/conformance/evaluation failure,
2 usage error, 3 parse error, 4 simulation limit exceeded.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence, TextIO

from .dsl import ModelDocument, ParseFailed, parse_file, print_model
from .dsl.lexer import LexError, tokenize
from .dsl.parser import Parser, _SyntaxError
from .dynamics import build_behavior
from .errors import EvaluationError, InvalidSpec, LimitExceeded
from .export import TRACE_FORMATS, export_dot_behavior, export_dot_events, export_dot_static, export_trace
from .simulator import SimulationLimits, attribute, conformance, resolve_inputs, run_inputs
from .things import Thing
from .translate import fsm_to_source, parse_fsm_file
from .validator import check_finiteness, repeat_marked_edges, validate_structure

OK, FAILED, USAGE, PARSE_ERROR, LIMIT = 0, 1, 2, 3, 4


class _Usage(Exception):
    pass


def _input_binding(text: str) -> tuple[str, tuple[Thing, ...]]:
    name, sep, values = text.partition("=")
    if not sep or not name.strip():
        raise argparse.ArgumentTypeError(f"expected name=[v1,v2,...], got '{text}'")
    try:
        parser = Parser(tokenize(values, "<--input>"), "<--input>")
        things = parser.literal_list()
        if parser.tok.kind != "eof":
            raise parser.error("end of value list", "literal")
    except (LexError, _SyntaxError) as exc:
        diag = exc.diagnostic
        raise argparse.ArgumentTypeError(f"bad value list for '{name}': {diag.message}") from None
    return name.strip(), things


def _integer(text: str, minimum: int) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{text}'") from None
    if value < minimum:
        raise argparse.ArgumentTypeError(f"expected an integer >= {minimum}, got {value}")
    return value


def _positive(text: str) -> int:
    return _integer(text, 1)


def _non_negative(text: str) -> int:
    return _integer(text, 0)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise _Usage(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="thingc", description="Thinging-machine modeling toolkit.")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("parse", help="print the canonical form of a model")
    p.add_argument("model", help=".tm model file")

    p = sub.add_parser("validate", help="check structure and finiteness")
    p.add_argument("model", help=".tm model file")

    p = sub.add_parser("simulate", help="run a model and print its trace")
    p.add_argument("model", help=".tm model file")
    p.add_argument("--input", action="append", default=[], type=_input_binding, metavar="NAME=[V,...]",
                   help="input things; overrides the file's input declaration of the same name")
    p.add_argument("--limit-instances", type=_positive, default=SimulationLimits.max_instances, metavar="N",
                   help="fail with exit code 4 after N instances (default %(default)s)")
    p.add_argument("--limit-clock", type=_positive, default=SimulationLimits.max_clock, metavar="T",
                   help="fail with exit code 4 when work is due after time T (default %(default)s)")
    p.add_argument("--horizon", type=_non_negative, default=None,
                   help="stop cleanly after processing time HORIZON")
    p.add_argument("--trace-format", choices=TRACE_FORMATS, default="jsonl", help="default %(default)s")

    p = sub.add_parser("export", help="print a DOT rendering")
    p.add_argument("model", help=".tm model file")
    p.add_argument("--view", choices=("static", "events", "behavior"), default="static", help="default %(default)s")

    p = sub.add_parser("translate", help="translate an FSM specification into a model")
    p.add_argument("--fsm", required=True, metavar="PATH", help="FSM specification file")
    return top


class _Streams:
    def __init__(self, out: TextIO, err: TextIO) -> None:
        self.out = out
        self.err = err
        self.color = os.environ.get("THINGC_COLOR", "0") == "1"

    def _prefix(self) -> str:
        return "\x1b[31merror\x1b[0m" if self.color else "error"

    def error(self, text: str) -> None:
        for line in text.rstrip("\n").splitlines():
            self.err.write(f"{self._prefix()}: {line}\n")

    def diagnostics(self, exc: ParseFailed) -> None:
        # diagnostics carry their own "file:line:col: error:" prefix
        for diag in exc.diagnostics:
            self.err.write(str(diag).replace(": error: ", f": {self._prefix()}: ", 1) + "\n")


def _load(path: str, io: _Streams) -> Optional[ModelDocument]:
    try:
        return parse_file(path)
    except ParseFailed as exc:
        io.diagnostics(exc)
    return None


def _cmd_parse(args, io: _Streams) -> int:
    doc = _load(args.model, io)
    if doc is None:
        return PARSE_ERROR
    io.out.write(print_model(doc) + "\n")
    return OK


def _cmd_validate(args, io: _Streams) -> int:
    doc = _load(args.model, io)
    if doc is None:
        return PARSE_ERROR
    report = validate_structure(doc.model)
    io.out.write("structure: ok\n" if report.ok else report.render())
    repeats = doc.behavior.repeats if doc.behavior else ()
    finiteness = check_finiteness(doc.model, repeat_marked_edges(doc.model, doc.events, repeats))
    io.out.write(finiteness.render(doc.model))
    return OK if report.ok else FAILED


def _cmd_simulate(args, io: _Streams) -> int:
    doc = _load(args.model, io)
    if doc is None:
        return PARSE_ERROR
    report = validate_structure(doc.model)
    if not report.ok:
        io.error(report.render())
        return FAILED
    limits = SimulationLimits(args.limit_instances, args.limit_clock)
    try:
        bound = resolve_inputs(doc.model, doc.inputs, dict(args.input))
    except EvaluationError as exc:
        io.error(f"--input: {exc}")
        return USAGE
    try:
        trace = run_inputs(doc.model, bound, limits, horizon=args.horizon)
    except LimitExceeded as exc:
        io.out.write(export_trace(exc.trace, args.trace_format))
        io.error(str(exc))
        return LIMIT
    except EvaluationError as exc:
        io.error(str(exc))
        return FAILED
    attributed = attribute(trace, doc.events) if doc.events else None
    io.out.write(export_trace(trace, args.trace_format, attributed))
    if attributed is not None and doc.behavior is not None:
        result = conformance(attributed, doc.behavior)
        if not result.ok:
            io.error(result.render())
            return FAILED
        io.err.write(result.render())
    return OK


def _cmd_export(args, io: _Streams) -> int:
    doc = _load(args.model, io)
    if doc is None:
        return PARSE_ERROR
    if args.view == "static":
        io.out.write(export_dot_static(doc.model))
    elif args.view == "events":
        io.out.write(export_dot_events(doc.model, doc.events))
    else:
        behavior = doc.behavior or build_behavior(doc.events)
        io.out.write(export_dot_behavior(behavior, f"{doc.model.name}_behavior"))
    return OK


def _cmd_translate(args, io: _Streams) -> int:
    try:
        spec = parse_fsm_file(args.fsm)
    except ParseFailed as exc:
        io.diagnostics(exc)
        return PARSE_ERROR
    except InvalidSpec as exc:
        io.error(str(exc))
        return FAILED
    io.out.write(fsm_to_source(spec))
    return OK


COMMANDS = {
    "parse": _cmd_parse,
    "validate": _cmd_validate,
    "simulate": _cmd_simulate,
    "export": _cmd_export,
    "translate": _cmd_translate,
}


def run(argv: Sequence[str], stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    """Run one command and return its exit code."""
    io = _Streams(stdout or sys.stdout, stderr or sys.stderr)
    try:
        args = build_parser().parse_args(list(argv))
    except _Usage as exc:
        io.err.write(f"{exc}\n")
        return USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    for attr in ("model", "fsm"):
        path = getattr(args, attr, None)
        if path is not None and not os.path.isfile(path):
            io.error(f"no such file: {path}")
            return USAGE
    return COMMANDS[args.command](args, io)


def main(argv: Sequence[str] | None = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
