"""Netlist interchange: structural BLIF and synthesis-tool JSON.

Both readers build a gate-level Netlist over the generic cell library and
validate it before returning; semantic problems raise InvalidNetlistError
with the full diagnostic report, syntax problems raise ParseError with the
offending line.  The writers emit files the readers accept unchanged.
"""

from __future__ import annotations

import json
from typing import Iterable

from .netlist import (
    Cell,
    CellKind,
    InvalidNetlistError,
    Netlist,
    input_ports,
    output_ports,
    validate_netlist,
)


class ParseError(Exception):
    def __init__(self, message: str, lineno: int | None = None, line: str = "",
                 source: str = ""):
        self.message = message
        self.lineno = lineno
        self.line = line
        self.source = source
        where = source or "<input>"
        if lineno is not None:
            where += f":{lineno}"
        text = f"{where}: {message}"
        if line:
            text += f"\n  {line.strip()}"
        super().__init__(text)


# Pin names per gate, output pin last.
_GATE_PINS: dict[str, tuple[CellKind, tuple[str, ...]]] = {
    "AND2": (CellKind.AND2, ("a", "b", "o")),
    "OR2": (CellKind.OR2, ("a", "b", "o")),
    "XOR2": (CellKind.XOR2, ("a", "b", "o")),
    "NAND2": (CellKind.NAND2, ("a", "b", "o")),
    "NOR2": (CellKind.NOR2, ("a", "b", "o")),
    "ANDNOT2": (CellKind.ANDNOT2, ("a", "b", "o")),
    "ORNOT2": (CellKind.ORNOT2, ("a", "b", "o")),
    "NOT1": (CellKind.NOT1, ("a", "o")),
    "MUX2": (CellKind.MUX2, ("s", "a", "b", "o")),
    "CONST0": (CellKind.CONST0, ("o",)),
    "CONST1": (CellKind.CONST1, ("o",)),
}


def _validated(n: Netlist, context: str) -> Netlist:
    report = validate_netlist(n)
    if not report.ok:
        raise InvalidNetlistError(report, context)
    return n


# ---------------------------------------------------------------------------
# BLIF
# ---------------------------------------------------------------------------

def parse_blif(text: str, source: str = "<blif>") -> Netlist:
    """Read the structural BLIF subset: .model/.inputs/.outputs/.gate/.latch.

    Gates must come from the generic library (pin names as in _GATE_PINS).
    Latches are rising-edge D flip-flops; the control net is ignored and
    init values 2 and 3 fall back to 0.  Logic tables (.names) are
    rejected: the input must already be technology-mapped.
    """
    name_to_net: dict[str, int] = {}
    net_names: dict[int, str] = {}

    def net(label: str) -> int:
        if label not in name_to_net:
            idx = len(name_to_net)
            name_to_net[label] = idx
            net_names[idx] = label
        return name_to_net[label]

    model = ""
    inputs: list[int] = []
    outputs: list[int] = []
    cells: list[Cell] = []
    dff_init: dict[int, int] = {}
    ended = False

    # Join continuation lines, keeping original numbers for diagnostics.
    physical = text.splitlines()
    logical: list[tuple[int, str]] = []
    pending: str | None = None
    pending_no = 0
    for no, raw in enumerate(physical, start=1):
        line = raw.split("#", 1)[0].rstrip()
        if pending is not None:
            line = pending + " " + line.strip()
            no = pending_no
            pending = None
        if line.endswith("\\"):
            pending, pending_no = line[:-1], no
            continue
        if line.strip():
            logical.append((no, line.strip()))
    if pending is not None:
        raise ParseError("line continuation at end of file", pending_no, pending, source)

    for no, line in logical:
        if ended:
            raise ParseError("content after .end", no, line, source)
        tokens = line.split()
        cmd = tokens[0]
        if not cmd.startswith("."):
            raise ParseError(f"expected a BLIF command, got {cmd!r}", no, line, source)
        if cmd == ".model":
            if model:
                raise ParseError("duplicate .model", no, line, source)
            if len(tokens) != 2:
                raise ParseError(".model takes exactly one name", no, line, source)
            model = tokens[1]
            continue
        if not model:
            raise ParseError(f"{cmd} before .model", no, line, source)
        if cmd == ".inputs":
            inputs.extend(net(t) for t in tokens[1:])
        elif cmd == ".outputs":
            outputs.extend(net(t) for t in tokens[1:])
        elif cmd == ".gate":
            if len(tokens) < 2:
                raise ParseError(".gate needs a gate name", no, line, source)
            gate = tokens[1]
            if gate not in _GATE_PINS:
                raise ParseError(f"unknown gate {gate!r} (not in the generic library)",
                                 no, line, source)
            kind, pins = _GATE_PINS[gate]
            actual: dict[str, str] = {}
            for tok in tokens[2:]:
                pin, eq, target = tok.partition("=")
                if not eq or not target:
                    raise ParseError(f"malformed pin binding {tok!r}", no, line, source)
                if pin in actual:
                    raise ParseError(f"pin {pin!r} bound twice", no, line, source)
                actual[pin] = target
            if set(actual) != set(pins):
                raise ParseError(
                    f"gate {gate} needs pins {', '.join(pins)}; got {', '.join(sorted(actual)) or 'none'}",
                    no, line, source)
            nets = [net(actual[p]) for p in pins]
            cells.append(Cell(kind, tuple(nets[:-1]), nets[-1]))
        elif cmd == ".latch":
            rest = tokens[1:]
            if len(rest) < 2:
                raise ParseError(".latch needs input and output nets", no, line, source)
            d, q = rest[0], rest[1]
            init = "3"
            tail = rest[2:]
            if len(tail) == 1:
                init = tail[0]
            elif len(tail) in (2, 3):
                if tail[0] != "re":
                    raise ParseError(f"unsupported latch type {tail[0]!r} (only re)",
                                     no, line, source)
                if len(tail) == 3:
                    init = tail[2]
            elif tail:
                raise ParseError("malformed .latch line", no, line, source)
            if init not in ("0", "1", "2", "3"):
                raise ParseError(f"bad latch init {init!r}", no, line, source)
            idx = len(cells)
            cells.append(Cell(CellKind.DFF, (net(d),), net(q)))
            if init == "1":
                dff_init[idx] = 1
        elif cmd == ".names":
            raise ParseError("logic tables (.names) are not supported; "
                             "map to the generic gate library first", no, line, source)
        elif cmd == ".end":
            ended = True
        else:
            raise ParseError(f"unsupported BLIF command {cmd}", no, line, source)

    if not model:
        raise ParseError("missing .model", None, "", source)
    if not ended:
        raise ParseError("missing .end", None, "", source)

    n = Netlist(model, len(name_to_net), cells, inputs, outputs, dff_init, net_names)
    return _validated(n, f"{source}: netlist {model!r} failed validation")


def _stable_names(n: Netlist) -> dict[int, str]:
    used: set[str] = set()
    names: dict[int, str] = {}
    for idx in range(n.n_nets):
        label = n.net_name(idx)
        if label in used:
            label = f"{label}_x{idx}"
        used.add(label)
        names[idx] = label
    return names


def emit_blif(n: Netlist) -> str:
    """Write a netlist as structural BLIF that parse_blif reads back."""
    _validated(n, "emit_blif requires a valid netlist")
    names = _stable_names(n)
    lines = [f".model {n.name}"]
    if n.primary_inputs:
        lines.append(".inputs " + " ".join(names[i] for i in n.primary_inputs))
    if n.primary_outputs:
        lines.append(".outputs " + " ".join(names[i] for i in n.primary_outputs))
    for idx, cell in enumerate(n.cells):
        if cell.kind is CellKind.DFF:
            lines.append(f".latch {names[cell.inputs[0]]} {names[cell.output]} "
                         f"re clk {n.init_bit(idx)}")
        else:
            _, pins = _GATE_PINS[cell.kind.name]
            nets = list(cell.inputs) + [cell.output]
            bindings = " ".join(f"{p}={names[t]}" for p, t in zip(pins, nets))
            lines.append(f".gate {cell.kind.name} {bindings}")
    lines.append(".end")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Synthesis-tool JSON
# ---------------------------------------------------------------------------

_JSON_CELLS: dict[str, tuple[CellKind, tuple[str, ...]]] = {
    "$_AND_": (CellKind.AND2, ("A", "B", "Y")),
    "$_OR_": (CellKind.OR2, ("A", "B", "Y")),
    "$_XOR_": (CellKind.XOR2, ("A", "B", "Y")),
    "$_NAND_": (CellKind.NAND2, ("A", "B", "Y")),
    "$_NOR_": (CellKind.NOR2, ("A", "B", "Y")),
    "$_ANDNOT_": (CellKind.ANDNOT2, ("A", "B", "Y")),
    "$_ORNOT_": (CellKind.ORNOT2, ("A", "B", "Y")),
    "$_NOT_": (CellKind.NOT1, ("A", "Y")),
    # Y = S ? B : A, so S selects B.
    "$_MUX_": (CellKind.MUX2, ("S", "B", "A", "Y")),
}

_JSON_DFF = "$_DFF_P_"


def parse_synth_json(text: str, source: str = "<json>", top: str | None = None) -> Netlist:
    """Read a gate-level module from synthesis-tool JSON output.

    Accepts the netlist JSON a synthesis flow writes after mapping to the
    two-input gate library: modules with ports (direction + bits), cells
    keyed by $_AND_-style types, integer bit ids, and "0"/"1" constant
    bits.  Flip-flops must be rising-edge $_DFF_P_; the clock input is
    identified as the port feeding only C pins and is dropped.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc.msg}", exc.lineno, "", source) from None
    if not isinstance(doc, dict) or not isinstance(doc.get("modules"), dict):
        raise ParseError("missing top-level \"modules\" object", None, "", source)
    modules = doc["modules"]
    if top is None:
        candidates = [
            name for name, mod in modules.items()
            if not (isinstance(mod, dict) and mod.get("attributes", {}).get("blackbox"))
        ]
        if len(candidates) != 1:
            raise ParseError(
                f"expected exactly one module, found {len(candidates)}"
                f" ({', '.join(sorted(candidates)) or 'none'}); pass top=",
                None, "", source)
        top = candidates[0]
    if top not in modules:
        raise ParseError(f"module {top!r} not found", None, "", source)
    mod = modules[top]

    bit_to_net: dict[int, int] = {}
    net_names: dict[int, str] = {}
    cells: list[Cell] = []
    const_net: dict[int, int] = {}
    n_nets = 0

    def fresh_net() -> int:
        nonlocal n_nets
        n_nets += 1
        return n_nets - 1

    def net_for(bit, context: str) -> int:
        if isinstance(bit, int):
            if bit not in bit_to_net:
                bit_to_net[bit] = fresh_net()
            return bit_to_net[bit]
        if bit in ("0", "1"):
            value = int(bit)
            if value not in const_net:
                out = fresh_net()
                kind = CellKind.CONST1 if value else CellKind.CONST0
                cells.append(Cell(kind, (), out))
                const_net[value] = out
            return const_net[value]
        raise ParseError(f"{context}: unsupported bit value {bit!r}", None, "", source)

    ports = mod.get("ports", {})
    if not isinstance(ports, dict):
        raise ParseError("module \"ports\" must be an object", None, "", source)

    # First pass over cells to find which bits drive/are driven, and C pins.
    raw_cells = mod.get("cells", {})
    if not isinstance(raw_cells, dict):
        raise ParseError("module \"cells\" must be an object", None, "", source)
    clock_bits: set[int] = set()
    data_bits: set[int] = set()
    for cname, cell in raw_cells.items():
        conns = cell.get("connections", {})
        ctype = cell.get("type")
        for pin, bits in conns.items():
            for bit in bits:
                if not isinstance(bit, int):
                    continue
                if ctype == _JSON_DFF and pin == "C":
                    clock_bits.add(bit)
                else:
                    data_bits.add(bit)

    in_ports: list[tuple[str, list]] = []
    out_ports: list[tuple[str, list]] = []
    for pname, port in ports.items():
        direction = port.get("direction")
        bits = port.get("bits")
        if direction not in ("input", "output") or not isinstance(bits, list):
            raise ParseError(f"port {pname!r}: need direction input/output and bits",
                             None, "", source)
        if direction == "input":
            int_bits = [b for b in bits if isinstance(b, int)]
            if int_bits and all(b in clock_bits for b in int_bits):
                overlap = [b for b in int_bits if b in data_bits]
                if overlap:
                    raise ParseError(
                        f"clock port {pname!r} also feeds logic (bits {overlap})",
                        None, "", source)
                continue  # the clock: implicit in the synchronous model
            in_ports.append((pname, bits))
        else:
            out_ports.append((pname, bits))

    primary_inputs: list[int] = []
    primary_outputs: list[int] = []

    def register_port(pname: str, bits: list, sink: list[int]) -> None:
        wide = len(bits) > 1
        for i, bit in enumerate(bits):
            idx = net_for(bit, f"port {pname!r}")
            label = f"{pname}[{i}]" if wide else pname
            net_names.setdefault(idx, label)
            sink.append(idx)

    for pname, bits in in_ports:
        register_port(pname, bits, primary_inputs)
    for pname, bits in out_ports:
        register_port(pname, bits, primary_outputs)

    for cname, cell in raw_cells.items():
        if not isinstance(cell, dict):
            raise ParseError(f"cell {cname!r} must be an object", None, "", source)
        ctype = cell.get("type")
        conns = cell.get("connections", {})

        def pin(pname: str) -> int:
            bits = conns.get(pname)
            if not isinstance(bits, list) or len(bits) != 1:
                raise ParseError(f"cell {cname!r}: pin {pname} must have exactly one bit",
                                 None, "", source)
            return net_for(bits[0], f"cell {cname!r} pin {pname}")

        if ctype == _JSON_DFF:
            d, q = pin("D"), pin("Q")
            cells.append(Cell(CellKind.DFF, (d,), q))
        elif ctype in _JSON_CELLS:
            kind, pins = _JSON_CELLS[ctype]
            nets = [pin(p) for p in pins]
            cells.append(Cell(kind, tuple(nets[:-1]), nets[-1]))
        else:
            raise ParseError(f"cell {cname!r}: unsupported type {ctype!r}", None, "", source)

    names = mod.get("netnames", {})
    if isinstance(names, dict):
        for label, entry in names.items():
            bits = entry.get("bits") if isinstance(entry, dict) else None
            if not isinstance(bits, list):
                continue
            wide = len(bits) > 1
            for i, bit in enumerate(bits):
                if isinstance(bit, int) and bit in bit_to_net:
                    net_names.setdefault(bit_to_net[bit],
                                         f"{label}[{i}]" if wide else label)

    n = Netlist(top, n_nets, cells, primary_inputs, primary_outputs, {}, net_names)
    return _validated(n, f"{source}: module {top!r} failed validation")


def emit_synth_json(n: Netlist, creator: str = "pspc") -> str:
    """Write a netlist in the synthesis-tool JSON format parse_synth_json reads.

    Constant cells become literal "0"/"1" bits at their fanout, and an
    explicit clock port is added and wired to every flip-flop's C pin,
    matching what a synthesis flow emits for a single-clock design.
    """
    _validated(n, "emit_synth_json requires a valid netlist")
    # Bit ids 0 and 1 stay unused by convention; nets map to idx + 2.
    bit_of = {idx: idx + 2 for idx in range(n.n_nets)}
    const_value: dict[int, str] = {}
    for cell in n.cells:
        if cell.kind is CellKind.CONST0:
            const_value[cell.output] = "0"
        elif cell.kind is CellKind.CONST1:
            const_value[cell.output] = "1"

    def bit(netid: int):
        return const_value.get(netid, bit_of[netid])

    clk_bit = n.n_nets + 2
    ports: dict[str, dict] = {}
    clk_name = "clk"
    taken = {p.name for p in input_ports(n)} | {p.name for p in output_ports(n)}
    while clk_name in taken:
        clk_name += "_"
    if any(c.kind is CellKind.DFF for c in n.cells):
        ports[clk_name] = {"direction": "input", "bits": [clk_bit]}
    for port in input_ports(n):
        ports[port.name] = {"direction": "input", "bits": [bit(x) for x in port.nets]}
    for port in output_ports(n):
        ports[port.name] = {"direction": "output", "bits": [bit(x) for x in port.nets]}

    kind_to_json = {kind: (ctype, pins) for ctype, (kind, pins) in _JSON_CELLS.items()}
    cells: dict[str, dict] = {}
    for idx, cell in enumerate(n.cells):
        cname = f"g{idx}"
        if cell.kind is CellKind.DFF:
            cells[cname] = {
                "type": _JSON_DFF,
                "port_directions": {"C": "input", "D": "input", "Q": "output"},
                "connections": {"C": [clk_bit], "D": [bit(cell.inputs[0])],
                                "Q": [bit(cell.output)]},
            }
        elif cell.kind in (CellKind.CONST0, CellKind.CONST1):
            continue  # folded into constant bits
        else:
            ctype, pins = kind_to_json[cell.kind]
            nets = list(cell.inputs) + [cell.output]
            directions = {p: ("output" if p == pins[-1] else "input") for p in pins}
            cells[cname] = {
                "type": ctype,
                "port_directions": directions,
                "connections": {p: [bit(t)] for p, t in zip(pins, nets)},
            }

    names = _stable_names(n)
    netnames = {
        names[idx]: {"bits": [bit_of[idx]]}
        for idx in range(n.n_nets) if idx not in const_value
    }
    doc = {
        "creator": creator,
        "modules": {
            n.name: {
                "ports": ports,
                "cells": cells,
                "netnames": netnames,
            }
        },
    }
    # Insertion order is meaningful (ports define call order), so no key sort.
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

def detect_format(path: str) -> str:
    lowered = str(path).lower()
    if lowered.endswith(".blif"):
        return "blif"
    if lowered.endswith(".json"):
        return "json"
    raise ParseError(f"cannot tell the netlist format of {path!r} "
                     "(expected a .blif or .json suffix)", None, "", str(path))


def load_netlist(path: str, top: str | None = None) -> Netlist:
    """Read a netlist file, picking the parser from the file suffix."""
    fmt = detect_format(path)
    with open(path) as f:
        text = f.read()
    if fmt == "blif":
        return parse_blif(text, source=str(path))
    return parse_synth_json(text, source=str(path), top=top)
