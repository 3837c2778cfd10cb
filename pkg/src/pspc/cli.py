"""Command-line interface.

Exit codes: 0 success, 1 usage, 2 parse error, 3 invalid netlist or
stimulus, 4 differential simulation mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bitprog import lower
from .codegen import CodegenError, emit_source
from .designs import DESIGNS
from .frontend import ParseError, load_netlist
from .isa import PROFILES
from .levelizer import levelize
from .metrics import build_report, event_driven_reference
from .netlist import InvalidNetlistError, Netlist, netlist_stats
from .runtime import (
    BitProgramMachine,
    LeveledMachine,
    SimulationError,
    Stimulus,
    slice_lanes,
    unslice_lanes,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_INVALID = 3
EXIT_MISMATCH = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("netlist", nargs="?", help="netlist file (.blif or .json)")
    p.add_argument("--design", choices=sorted(DESIGNS),
                   help="use a built-in design instead of a file")
    p.add_argument("--top", help="module to pick from a multi-module JSON file")


def _load(args) -> Netlist:
    if args.design and args.netlist:
        raise UsageError("give either a netlist file or --design, not both")
    if args.design:
        return DESIGNS[args.design].build()
    if not args.netlist:
        raise UsageError("a netlist file or --design is required")
    return load_netlist(args.netlist, top=args.top)


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as f:
            f.write(text)


def _cmd_compile(args) -> int:
    netlist = _load(args)
    program = lower(levelize(netlist), args.isa, args.width)
    if args.format == "c":
        _write(args.output, emit_source(program).text)
    else:
        _write(args.output, program.to_text())
    if args.report:
        _write(args.report, json.dumps(
            build_report(netlist, args.isa, args.width), indent=2) + "\n")
    return EXIT_OK


def _cmd_stats(args) -> int:
    netlist = _load(args)
    program = levelize(netlist)
    stats = netlist_stats(netlist)
    depth = max((program.level[ci] for ci in program.schedule), default=0)
    if args.json:
        doc = {
            "design": netlist.name,
            "n_nets": netlist.n_nets,
            "cells": {k.name: v for k, v in stats.items() if v},
            "depth": depth,
            "ops_per_tick": len(program.schedule) + program.n_dffs,
        }
        _write(None, json.dumps(doc, indent=2) + "\n")
    else:
        print(f"design: {netlist.name}")
        print(f"nets: {netlist.n_nets}")
        for kind, count in stats.items():
            if count:
                print(f"{kind.name}: {count}")
        print(f"depth: {depth}")
        print(f"ops/tick: {len(program.schedule) + program.n_dffs}")
    return EXIT_OK


def _machines(netlist: Netlist, engine: str, isa: str, width: int):
    program = levelize(netlist)
    if engine == "leveled":
        return [("leveled", LeveledMachine(program, width))]
    if engine == "bitprog":
        return [("bitprog", BitProgramMachine(lower(program, isa, width)))]
    if engine == "event":
        return [("event", event_driven_reference(netlist, width))]
    return [
        ("leveled", LeveledMachine(program, width)),
        ("bitprog", BitProgramMachine(lower(program, isa, width))),
        ("event", event_driven_reference(netlist, width)),
    ]


def _cmd_simulate(args) -> int:
    netlist = _load(args)
    engine = "all" if args.check else args.engine
    machines = _machines(netlist, engine, args.isa, args.width)
    ports = machines[0][1].input_ports
    if args.stimulus:
        with open(args.stimulus) as f:
            stim = Stimulus.from_csv(f.read(), ports, args.width)
        ticks = args.ticks if args.ticks is not None else len(stim)
    else:
        ticks = args.ticks if args.ticks is not None else 64
        stim = Stimulus.random(ports, ticks, args.width, seed=args.seed)

    traces = []
    for name, machine in machines:
        machine.reset()
        traces.append((name, machine.run(stim, ticks)))
    base_name, base = traces[0]
    for name, trace in traces[1:]:
        if not base.outputs_equal(trace):
            print(f"mismatch: {base_name} and {name} traces differ", file=sys.stderr)
            return EXIT_MISMATCH
    if args.trace:
        _write(args.trace, base.to_csv())
    elif not args.summary:
        _write(None, base.to_csv())
    if args.summary:
        for pname, width in base.ports:
            if width != 1:
                continue
            highs = [
                sum((row[pname] >> lane) & 1 for row in base.rows)
                for lane in range(args.width)
            ]
            print(f"{pname}: high ticks per lane: {' '.join(map(str, highs))}")
    if len(traces) > 1:
        print(f"engines agree over {ticks} ticks", file=sys.stderr)
    return EXIT_OK


def _cmd_transpose(args) -> int:
    values = [int(tok, 0) for tok in (args.values or sys.stdin.read().split())]
    if args.invert:
        if args.lanes is None:
            raise UsageError("--invert needs --lanes")
        out = unslice_lanes(values, args.lanes)
    else:
        out = slice_lanes(values, args.bits)
    print(" ".join(f"0x{v:x}" for v in out))
    return EXIT_OK


def _cmd_report(args) -> int:
    netlist = _load(args)
    doc = build_report(netlist, args.isa, args.width, ticks=args.ticks, seed=args.seed)
    _write(args.output, json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="pspc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compile",
                       help="lower a netlist to C or a bit-parallel program")
    _add_source(p)
    p.add_argument("--isa", choices=sorted(PROFILES), default="arm-m4")
    p.add_argument("--width", type=int, choices=(8, 16, 32, 64), default=32)
    p.add_argument("--format", choices=("c", "bitprog"), default="c")
    p.add_argument("-o", "--output", help="output file (default stdout)")
    p.add_argument("--report", help="also write a JSON metrics report here")
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("simulate",
                       help="run a netlist and write the output trace")
    _add_source(p)
    p.add_argument("--isa", choices=sorted(PROFILES), default="arm-m4")
    p.add_argument("--width", type=int, choices=(8, 16, 32, 64), default=32)
    p.add_argument("--engine", choices=("leveled", "bitprog", "event", "all"),
                   default="bitprog")
    p.add_argument("--check", action="store_true",
                   help="run every engine and require identical outputs")
    p.add_argument("--ticks", type=int)
    p.add_argument("--stimulus", help="stimulus CSV (default: random)")
    p.add_argument("--seed", type=int, default=1, help="seed for random stimulus")
    p.add_argument("--trace", help="trace CSV output file (default stdout)")
    p.add_argument("--summary", action="store_true",
                   help="print per-lane high-tick counts for 1-bit outputs")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("stats", help="gate census and depth")
    _add_source(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("report",
                       help="full JSON report: breakdown, overhead, repeatability")
    _add_source(p)
    p.add_argument("--isa", choices=sorted(PROFILES), default="arm-m4")
    p.add_argument("--width", type=int, choices=(8, 16, 32, 64), default=32)
    p.add_argument("--ticks", type=int, default=64)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("transpose",
                       help="slice per-lane values into bit planes (or back)")
    p.add_argument("values", nargs="*", help="integers (default: read stdin)")
    p.add_argument("--bits", type=int, default=8, help="bits per value when slicing")
    p.add_argument("--lanes", type=int, help="lane count when inverting")
    p.add_argument("--invert", action="store_true",
                   help="treat inputs as planes and recover per-lane values")
    p.set_defaults(func=_cmd_transpose)

    p = sub.add_parser("serve",
                       help="start the HTTP service wrapping the same pipeline")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"pspc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"pspc: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvalidNetlistError as exc:
        print(f"pspc: invalid netlist: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SimulationError, CodegenError, ValueError, OSError) as exc:
        print(f"pspc: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    raise SystemExit(main())
