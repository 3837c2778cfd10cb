"""Gate-level netlist IR.

The netlist is the common currency of the toolchain: a flat list of cells
drawn from a fixed generic library (two-input gates, an inverter, a mux, a
D flip-flop and constant drivers) wired through integer net ids.  Nets are
dense integers; exactly one driver per net (a cell output or a primary
input).  The combinational subgraph must be acyclic -- cycles are only
allowed through flip-flops.

Construction goes through :class:`NetlistBuilder` (programmatic designs,
tests) or the frontend parsers.  A built netlist is treated as immutable.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum


class CellKind(Enum):
    AND2 = "AND2"
    OR2 = "OR2"
    XOR2 = "XOR2"
    NAND2 = "NAND2"
    NOR2 = "NOR2"
    ANDNOT2 = "ANDNOT2"   # a AND NOT b
    ORNOT2 = "ORNOT2"     # a OR NOT b
    NOT1 = "NOT1"
    MUX2 = "MUX2"         # inputs (sel, a, b): sel ? a : b
    DFF = "DFF"           # one data input, advances once per tick
    CONST0 = "CONST0"
    CONST1 = "CONST1"


# Number of fan-in nets per kind.  MUX2 input order is (sel, a, b).
CELL_ARITY: dict[CellKind, int] = {
    CellKind.AND2: 2,
    CellKind.OR2: 2,
    CellKind.XOR2: 2,
    CellKind.NAND2: 2,
    CellKind.NOR2: 2,
    CellKind.ANDNOT2: 2,
    CellKind.ORNOT2: 2,
    CellKind.NOT1: 1,
    CellKind.MUX2: 3,
    CellKind.DFF: 1,
    CellKind.CONST0: 0,
    CellKind.CONST1: 0,
}

CONST_KINDS = frozenset({CellKind.CONST0, CellKind.CONST1})


def kind_eval(kind: CellKind, ins: tuple[int, ...], mask: int) -> int:
    """Word-wide Boolean semantics of a combinational cell kind.

    Every bit position is one independent lane; `mask` bounds the word.
    """
    if kind is CellKind.AND2:
        return ins[0] & ins[1]
    if kind is CellKind.OR2:
        return ins[0] | ins[1]
    if kind is CellKind.XOR2:
        return ins[0] ^ ins[1]
    if kind is CellKind.NAND2:
        return ~(ins[0] & ins[1]) & mask
    if kind is CellKind.NOR2:
        return ~(ins[0] | ins[1]) & mask
    if kind is CellKind.ANDNOT2:
        return ins[0] & ~ins[1] & mask
    if kind is CellKind.ORNOT2:
        return (ins[0] | (~ins[1] & mask)) & mask
    if kind is CellKind.NOT1:
        return ~ins[0] & mask
    if kind is CellKind.MUX2:
        sel, a, b = ins
        return (sel & a) | (~sel & mask & b)
    if kind is CellKind.CONST0:
        return 0
    if kind is CellKind.CONST1:
        return mask
    raise ValueError(f"{kind} is not combinational")


@dataclass(frozen=True)
class Cell:
    kind: CellKind
    inputs: tuple[int, ...]
    output: int


@dataclass
class Netlist:
    """A synchronous gate-level circuit.

    `dff_init` maps cell index -> initial bit; flip-flops without an entry
    reset to 0.  `net_names` is pure metadata.
    """
    name: str
    n_nets: int
    cells: list[Cell]
    primary_inputs: list[int]
    primary_outputs: list[int]
    dff_init: dict[int, int] = field(default_factory=dict)
    net_names: dict[int, str] = field(default_factory=dict)

    def net_name(self, net: int) -> str:
        return self.net_names.get(net, f"n{net}")

    def dff_cells(self) -> list[int]:
        return [i for i, c in enumerate(self.cells) if c.kind is CellKind.DFF]

    def comb_cells(self) -> list[int]:
        return [i for i, c in enumerate(self.cells) if c.kind is not CellKind.DFF]

    def init_bit(self, cell_index: int) -> int:
        return self.dff_init.get(cell_index, 0)

    def driver_map(self) -> dict[int, tuple[str, int]]:
        """Map net -> driver, either ("cell", cell_index) or ("input", position).

        Later drivers do not overwrite earlier ones, so validation can still
        report multi-driven nets; use only on validated netlists otherwise.
        """
        drivers: dict[int, tuple[str, int]] = {}
        for pos, net in enumerate(self.primary_inputs):
            drivers.setdefault(net, ("input", pos))
        for idx, cell in enumerate(self.cells):
            drivers.setdefault(cell.output, ("cell", idx))
        return drivers

    def reader_map(self) -> dict[int, list[int]]:
        """Map net -> cell indices reading it (fanout)."""
        readers: dict[int, list[int]] = {}
        for idx, cell in enumerate(self.cells):
            for net in cell.inputs:
                readers.setdefault(net, []).append(idx)
        return readers


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    ids: tuple[int, ...] = ()

    def __str__(self) -> str:
        where = f" [{', '.join(map(str, self.ids))}]" if self.ids else ""
        return f"{self.severity}: {self.message}{where}"


@dataclass
class ValidationReport:
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return not any(d.severity == "error" for d in self.diagnostics)

    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]

    def __str__(self) -> str:
        if self.ok and not self.diagnostics:
            return "ok"
        return "\n".join(str(d) for d in self.diagnostics)


class InvalidNetlistError(Exception):
    """Raised when an operation requires a netlist that validates ok."""

    def __init__(self, report: ValidationReport, context: str = ""):
        self.report = report
        head = context or "netlist failed validation"
        super().__init__(head + "\n" + str(report))


def validate_netlist(n: Netlist) -> ValidationReport:
    """Structural validation; never raises.

    Checks arity per cell kind, net id range, single-driver and no-undriven
    invariants, DFF init bits, and combinational acyclicity (flip-flop
    outputs count as sources, their inputs as sinks).
    """
    diags: list[Diagnostic] = []

    def err(msg: str, *ids: int) -> None:
        diags.append(Diagnostic("error", msg, tuple(ids)))

    for idx, cell in enumerate(n.cells):
        want = CELL_ARITY[cell.kind]
        if len(cell.inputs) != want:
            err(f"cell {idx} ({cell.kind.value}) has {len(cell.inputs)} fan-ins, expected {want}", idx)
        for net in (*cell.inputs, cell.output):
            if not (0 <= net < n.n_nets):
                err(f"cell {idx} references net {net} outside 0..{n.n_nets - 1}", idx, net)

    for net in (*n.primary_inputs, *n.primary_outputs):
        if not (0 <= net < n.n_nets):
            err(f"port references net {net} outside 0..{n.n_nets - 1}", net)

    for idx, bit in n.dff_init.items():
        if not (0 <= idx < len(n.cells)) or n.cells[idx].kind is not CellKind.DFF:
            err(f"dff_init entry for cell {idx}, which is not a DFF", idx)
        elif bit not in (0, 1):
            err(f"dff_init for cell {idx} is {bit}, expected 0 or 1", idx)

    # Driver census: primary inputs and cell outputs each drive one net.
    driven_by: dict[int, list[str]] = {}
    for pos, net in enumerate(n.primary_inputs):
        if 0 <= net < n.n_nets:
            driven_by.setdefault(net, []).append(f"input#{pos}")
    for idx, cell in enumerate(n.cells):
        if 0 <= cell.output < n.n_nets:
            driven_by.setdefault(cell.output, []).append(f"cell#{idx}")
    for net, drivers in driven_by.items():
        if len(drivers) > 1:
            err(f"net {net} ({n.net_name(net)}) has {len(drivers)} drivers: {', '.join(drivers)}", net)

    used: set[int] = set(n.primary_outputs)
    for cell in n.cells:
        used.update(cell.inputs)
    for net in sorted(used):
        if 0 <= net < n.n_nets and net not in driven_by:
            err(f"net {net} ({n.net_name(net)}) is used but has no driver", net)

    cycle = _find_comb_cycle(n)
    if cycle is not None:
        pretty = " -> ".join(f"cell#{i}({n.cells[i].kind.value})" for i in cycle)
        err(f"combinational cycle: {pretty}", *cycle)

    return ValidationReport(diags)


def _find_comb_cycle(n: Netlist) -> list[int] | None:
    """Iterative DFS over combinational cells; returns one cycle or None."""
    driver_cell: dict[int, int] = {}
    for idx, cell in enumerate(n.cells):
        if cell.kind is not CellKind.DFF:
            driver_cell.setdefault(cell.output, idx)

    WHITE, GREY, BLACK = 0, 1, 2
    color = [WHITE] * len(n.cells)
    for root, cell in enumerate(n.cells):
        if cell.kind is CellKind.DFF or color[root] != WHITE:
            continue
        stack: list[tuple[int, int]] = [(root, 0)]
        color[root] = GREY
        path = [root]
        while stack:
            node, edge = stack[-1]
            feeders = [driver_cell[net] for net in n.cells[node].inputs if net in driver_cell]
            if edge < len(feeders):
                stack[-1] = (node, edge + 1)
                nxt = feeders[edge]
                if color[nxt] == GREY:
                    return path[path.index(nxt):] + [nxt]
                if color[nxt] == WHITE:
                    color[nxt] = GREY
                    stack.append((nxt, 0))
                    path.append(nxt)
            else:
                color[node] = BLACK
                stack.pop()
                path.pop()
    return None


def netlist_stats(n: Netlist) -> dict[CellKind, int]:
    """Per-kind cell census over a validated netlist."""
    report = validate_netlist(n)
    if not report.ok:
        raise InvalidNetlistError(report, "netlist_stats requires a valid netlist")
    counts = Counter(c.kind for c in n.cells)
    return {kind: counts.get(kind, 0) for kind in CellKind}


# ---------------------------------------------------------------------------
# Ports: primary input/output nets grouped k-bit buses by "name[i]" metadata.
# ---------------------------------------------------------------------------

_BIT_RE = re.compile(r"^(.*)\[(\d+)\]$")


@dataclass(frozen=True)
class Port:
    name: str
    nets: tuple[int, ...]  # bit order: nets[i] carries bit i

    @property
    def width(self) -> int:
        return len(self.nets)


def _group_ports(n: Netlist, nets: list[int], direction: str) -> list[Port]:
    ports: list[Port] = []
    buses: dict[str, dict[int, int]] = {}
    order: list[tuple[str, object]] = []
    seen: set[str] = set()
    for net in nets:
        label = n.net_name(net)
        m = _BIT_RE.match(label)
        if m:
            base, idx = m.group(1), int(m.group(2))
            bits = buses.setdefault(base, {})
            if idx in bits:
                raise ValueError(f"{direction} port {base}[{idx}] declared twice")
            bits[idx] = net
            if base not in seen:
                seen.add(base)
                order.append((base, bits))
        else:
            if label in seen:
                raise ValueError(f"duplicate {direction} port name {label!r}")
            seen.add(label)
            order.append((label, net))
    for name, entry in order:
        if isinstance(entry, dict):
            width = len(entry)
            if sorted(entry) != list(range(width)):
                raise ValueError(f"{direction} port {name!r} has gaps in bit indices {sorted(entry)}")
            ports.append(Port(name, tuple(entry[i] for i in range(width))))
        else:
            ports.append(Port(name, (entry,)))
    return ports


def input_ports(n: Netlist) -> list[Port]:
    return _group_ports(n, n.primary_inputs, "input")


def output_ports(n: Netlist) -> list[Port]:
    return _group_ports(n, n.primary_outputs, "output")


# ---------------------------------------------------------------------------
# Builder
# ---------------------------------------------------------------------------

class NetlistBuilder:
    """Imperative construction API; `build()` freezes and validates."""

    def __init__(self, name: str = "top"):
        self.name = name
        self._n_nets = 0
        self._cells: list[Cell] = []
        self._inputs: list[int] = []
        self._outputs: list[int] = []
        self._dff_init: dict[int, int] = {}
        self._names: dict[int, str] = {}

    def net(self, name: str | None = None) -> int:
        nid = self._n_nets
        self._n_nets += 1
        if name is not None:
            self._names[nid] = name
        return nid

    def name_net(self, net: int, name: str) -> None:
        self._names[net] = name

    def input(self, name: str) -> int:
        nid = self.net(name)
        self._inputs.append(nid)
        return nid

    def input_bus(self, name: str, width: int) -> list[int]:
        return [self.input(f"{name}[{i}]") for i in range(width)]

    def output(self, net: int, name: str | None = None) -> int:
        if name is not None:
            self._names[net] = name
        self._outputs.append(net)
        return net

    def output_bus(self, nets: list[int], name: str) -> None:
        for i, net in enumerate(nets):
            self.output(net, f"{name}[{i}]")

    def cell(self, kind: CellKind, *inputs: int, name: str | None = None) -> int:
        out = self.net(name)
        self._cells.append(Cell(kind, tuple(inputs), out))
        return out

    def and2(self, a: int, b: int, name: str | None = None) -> int:
        return self.cell(CellKind.AND2, a, b, name=name)

    def or2(self, a: int, b: int, name: str | None = None) -> int:
        return self.cell(CellKind.OR2, a, b, name=name)

    def xor2(self, a: int, b: int, name: str | None = None) -> int:
        return self.cell(CellKind.XOR2, a, b, name=name)

    def nand2(self, a: int, b: int, name: str | None = None) -> int:
        return self.cell(CellKind.NAND2, a, b, name=name)

    def nor2(self, a: int, b: int, name: str | None = None) -> int:
        return self.cell(CellKind.NOR2, a, b, name=name)

    def andnot(self, a: int, b: int, name: str | None = None) -> int:
        return self.cell(CellKind.ANDNOT2, a, b, name=name)

    def ornot(self, a: int, b: int, name: str | None = None) -> int:
        return self.cell(CellKind.ORNOT2, a, b, name=name)

    def not1(self, a: int, name: str | None = None) -> int:
        return self.cell(CellKind.NOT1, a, name=name)

    def mux(self, sel: int, a: int, b: int, name: str | None = None) -> int:
        return self.cell(CellKind.MUX2, sel, a, b, name=name)

    def const0(self, name: str | None = None) -> int:
        return self.cell(CellKind.CONST0, name=name)

    def const1(self, name: str | None = None) -> int:
        return self.cell(CellKind.CONST1, name=name)

    def dff(self, d: int, init: int = 0, name: str | None = None) -> int:
        out = self.net(name)
        self._cells.append(Cell(CellKind.DFF, (d,), out))
        if init:
            self._dff_init[len(self._cells) - 1] = 1
        return out

    def rewire_dff(self, q: int, d: int) -> None:
        """Point an existing flip-flop (identified by its output net) at a new
        data net.  Needed for feedback: registers are created before the logic
        that computes their next value."""
        for idx, cell in enumerate(self._cells):
            if cell.kind is CellKind.DFF and cell.output == q:
                self._cells[idx] = Cell(CellKind.DFF, (d,), q)
                return
        raise ValueError(f"no flip-flop drives net {q}")

    def build(self, check: bool = True) -> Netlist:
        n = Netlist(
            name=self.name,
            n_nets=self._n_nets,
            cells=list(self._cells),
            primary_inputs=list(self._inputs),
            primary_outputs=list(self._outputs),
            dff_init=dict(self._dff_init),
            net_names=dict(self._names),
        )
        if check:
            report = validate_netlist(n)
            if not report.ok:
                raise InvalidNetlistError(report, f"built netlist {self.name!r} is invalid")
        return n
