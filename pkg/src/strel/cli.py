"""Command line: ``strel monitor | simulate | check``.

Exit codes: 0 success, 1 violation found (``--assert-all``), 2 usage, IO or
parse error, 3 malformed trace/space file, 4 formula does not fit the data.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io as sio
from .logic import InterpretationContext, ParseError, ValidationError, parse, validate
from .monitor import MonitorError, monitor
from .scenarios import ManetConfig, manet_generate
from .space import SpaceError

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_SCHEMA, EXIT_SEMANTIC = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _Exit(EXIT_USAGE, f"{self.prog}: error: {message}")


class _Exit(Exception):
    def __init__(self, code, message=""):
        super().__init__(message)
        self.code = code
        self.message = message


def _formula_arg(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--formula", metavar="FILE", help="file holding the formula")
    g.add_argument("--expr", metavar="TEXT", help="formula given inline")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="strel", description="Offline monitor for spatio-temporal reach/escape formulas.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("monitor", help="monitor a formula on a trace")
    _formula_arg(m)
    m.add_argument("--trace", required=True, help="trace JSON file")
    m.add_argument("--space", required=True, help="space JSON file")
    m.add_argument("--semantics", choices=("boolean", "maxmin"), default="boolean")
    m.add_argument("--output", help="output file (default: standard output)")
    m.add_argument("--format", choices=("csv", "json"), help="default: from the output suffix, else csv")
    m.add_argument("--location", type=int, action="append", help="only report this location (repeatable)")
    m.add_argument("--time", type=float, action="append", help="report the value at this time (repeatable)")
    m.add_argument("--assert-all", action="store_true", help="exit 1 if some location fails at time 0")
    m.add_argument("--threads", type=int, help="worker threads (default: STREL_THREADS or 0)")

    s = sub.add_parser("simulate", help="generate a MANET trace and space")
    s.add_argument("--nodes", type=int, default=20)
    s.add_argument("--steps", type=int, default=10)
    s.add_argument("--dt", type=float, default=1.0)
    s.add_argument("--radius", type=float, default=2.5)
    s.add_argument("--arena", type=float, default=10.0)
    s.add_argument("--sigma", type=float, default=0.3, help="random walk step deviation")
    s.add_argument("--graph", choices=("radius", "delaunay"), default="radius")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-dir", required=True)

    c = sub.add_parser("check", help="parse and validate a formula")
    _formula_arg(c)
    c.add_argument("--trace", help="validate channel names and kinds against this trace")
    return p


def _read_formula(args):
    if args.expr is not None:
        return args.expr, "<expr>"
    try:
        return Path(args.formula).read_text(encoding="utf-8"), args.formula
    except OSError as exc:
        raise _Exit(EXIT_USAGE, f"cannot read formula: {exc}") from None


def _parse(args):
    text, origin = _read_formula(args)
    try:
        return parse(text.rstrip())
    except ParseError as exc:
        line = text.splitlines()[exc.line - 1] if 0 < exc.line <= len(text.splitlines()) else ""
        caret = " " * (exc.column - 1) + "^"
        raise _Exit(EXIT_USAGE, f"{origin}:{exc.line}:{exc.column}: parse error: {exc.message}\n  {line}\n  {caret}")


def _load(loader, path):
    try:
        return loader(path)
    except OSError as exc:
        raise _Exit(EXIT_USAGE, f"cannot read {path}: {exc}") from None
    except (sio.SchemaError, SpaceError) as exc:
        raise _Exit(EXIT_SCHEMA, f"{path}: {exc}") from None


def _cmd_monitor(args, out) -> int:
    phi = _parse(args)
    trace = _load(sio.load_trace, args.trace)
    service = _load(sio.load_space, args.space)
    context = InterpretationContext()
    try:
        result = monitor(service, trace, phi, context, args.semantics, threads=args.threads)
    except (ValidationError, MonitorError, SpaceError) as exc:
        raise _Exit(EXIT_SEMANTIC, f"cannot monitor: {exc}") from None
    fmt = args.format or ("json" if args.output and args.output.endswith(".json") else "csv")
    if fmt == "csv":
        text = sio.verdicts_to_csv(result.signal, args.location, args.time)
    else:
        text = sio.verdicts_to_json(result.signal, result.formula, result.semantics, args.location, args.time)
    if args.output:
        try:
            Path(args.output).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise _Exit(EXIT_USAGE, f"cannot write {args.output}: {exc}") from None
    else:
        out.write(text)
    if args.assert_all:
        bad = [loc for loc in range(result.signal.n) if _violated(result.at(loc, 0.0))]
        if bad:
            print(f"violated at time 0 in locations {bad}", file=sys.stderr)
            return EXIT_VIOLATION
    return EXIT_OK


def _violated(v) -> bool:
    if isinstance(v, bool):
        return not v
    return v < 0


def _cmd_simulate(args, out) -> int:
    cfg = ManetConfig(nodes=args.nodes, steps=args.steps, dt=args.dt, radius=args.radius, arena=args.arena,
                      walk_sigma=args.sigma, graph=args.graph, seed=args.seed)
    try:
        service, trace = manet_generate(cfg)
    except ValueError as exc:
        raise _Exit(EXIT_USAGE, f"invalid configuration: {exc}") from None
    d = Path(args.out_dir)
    try:
        d.mkdir(parents=True, exist_ok=True)
        sio.save_trace(trace, d / "trace.json")
        sio.save_space(service, d / "space.json")
    except OSError as exc:
        raise _Exit(EXIT_USAGE, f"cannot write to {d}: {exc}") from None
    out.write(f"wrote {d / 'trace.json'} and {d / 'space.json'}\n")
    return EXIT_OK


def _cmd_check(args, out) -> int:
    phi = _parse(args)
    schema = _load(sio.load_trace, args.trace) if args.trace else None
    try:
        validate(phi, InterpretationContext(), schema)
    except ValidationError as exc:
        raise _Exit(EXIT_SEMANTIC, f"invalid formula: {exc}") from None
    out.write("ok\n")
    return EXIT_OK


def run_cli(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        return {"monitor": _cmd_monitor, "simulate": _cmd_simulate, "check": _cmd_check}[args.command](args, out)
    except _Exit as exc:
        if exc.message:
            print(exc.message, file=sys.stderr)
        return exc.code


def main() -> None:
    sys.exit(run_cli())
