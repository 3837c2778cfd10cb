"""Execution of parallel synchronous programs.

A machine packs N independent single-bit synchronous designs into N-bit
words: bit i of every value belongs to lane i.  One tick is eval (compute
all outputs and next state from inputs and current state) followed by
update (commit next state).  Two engines share the interface: one walks the
leveled gate schedule directly, the other interprets the lowered bitwise
instruction program; they must agree bit for bit.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from random import Random
from typing import Mapping, Sequence

from .bitprog import BitProgram, run_instr
from .levelizer import LeveledProgram
from .netlist import CellKind, Netlist, input_ports, kind_eval, output_ports


class SimulationError(Exception):
    """Stimulus/machine mismatch: missing or unknown ports, bad values."""


# ---------------------------------------------------------------------------
# Slice / unslice: transpose between per-lane integers and bit planes.
# ---------------------------------------------------------------------------

def slice_lanes(values: Sequence[int], k: int) -> list[int]:
    """Transpose N per-lane k-bit integers into k lane-word planes.

    Plane j holds bit j of every value: bit i of the result's plane j equals
    bit j of values[i].  The lane count N is len(values).
    """
    for i, v in enumerate(values):
        if not (0 <= v < (1 << k)):
            raise ValueError(f"value {v} at lane {i} does not fit in {k} bits")
    planes = [0] * k
    for i, v in enumerate(values):
        bit = 1 << i
        for j in range(k):
            if (v >> j) & 1:
                planes[j] |= bit
    return planes


def unslice_lanes(planes: Sequence[int], lanes: int) -> list[int]:
    """Exact inverse of :func:`slice_lanes` for `lanes` lanes."""
    values = [0] * lanes
    for j, plane in enumerate(planes):
        for i in range(lanes):
            if (plane >> i) & 1:
                values[i] |= 1 << j
    return values


# ---------------------------------------------------------------------------
# Stimulus and trace
# ---------------------------------------------------------------------------

PortList = list[tuple[str, int]]  # (name, width) in declaration order

HOLD = "hold"


@dataclass
class Stimulus:
    """Per-tick input values, one entry per tick.

    Row values: an int lane-word for width-1 ports, a list of lane-words
    (bit order) for wider ports, or the string "hold" to repeat the
    previous tick.
    """
    ports: PortList
    rows: list[dict[str, object]]

    def __len__(self) -> int:
        return len(self.rows)

    def resolved(self) -> list[dict[str, object]]:
        out: list[dict[str, object]] = []
        prev: dict[str, object] = {}
        for t, row in enumerate(self.rows):
            cur: dict[str, object] = {}
            for name, _w in self.ports:
                value = row[name]
                if value == HOLD:
                    if t == 0:
                        raise SimulationError(f"port {name!r} holds on the first tick")
                    value = prev[name]
                cur[name] = value
            out.append(cur)
            prev = cur
        return out

    @classmethod
    def random(cls, ports: PortList, ticks: int, width: int, seed: int = 1) -> "Stimulus":
        """Uniform random lane-words for every port, reproducible from seed."""
        rng = Random(seed)
        mask = (1 << width) - 1
        rows = []
        for _ in range(ticks):
            row: dict[str, object] = {}
            for name, w in ports:
                if w == 1:
                    row[name] = rng.getrandbits(width) & mask
                else:
                    row[name] = [rng.getrandbits(width) & mask for _ in range(w)]
            rows.append(row)
        return cls(list(ports), rows)

    @classmethod
    def from_csv(cls, text: str, ports: PortList, lanes: int) -> "Stimulus":
        """Parse the stimulus CSV interchange format.

        Header columns name either a width-1 port (lane-word values), the
        individual bits "name[i]" of a wider port, or "lane.name" for
        pre-slice per-lane integers (a single integer broadcasts to every
        lane; N whitespace-separated integers give one value per lane).
        """
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise SimulationError("stimulus CSV is empty") from None
        header = [h.strip() for h in header]
        widths = dict(ports)

        plan: list[tuple[str, str, int]] = []  # (column kind, port, bit)
        covered: dict[str, set[int]] = {name: set() for name, _ in ports}
        for col in header:
            if col.startswith("lane."):
                name = col[len("lane."):]
                if name not in widths:
                    raise SimulationError(f"unknown input port {name!r} in stimulus column {col!r}")
                if covered[name]:
                    raise SimulationError(f"port {name!r} appears in multiple stimulus columns")
                covered[name] = set(range(widths[name]))
                plan.append(("lane", name, 0))
            elif col in widths:
                if widths[col] != 1:
                    raise SimulationError(
                        f"port {col!r} is {widths[col]} bits wide; use lane.{col} or {col}[i] columns")
                if covered[col]:
                    raise SimulationError(f"port {col!r} appears in multiple stimulus columns")
                covered[col] = {0}
                plan.append(("word", col, 0))
            elif "[" in col and col.endswith("]"):
                name, _, idx = col[:-1].partition("[")
                if name not in widths:
                    raise SimulationError(f"unknown input port {name!r} in stimulus column {col!r}")
                bit = int(idx)
                if not (0 <= bit < widths[name]):
                    raise SimulationError(f"column {col!r}: bit index out of range for width {widths[name]}")
                if bit in covered[name]:
                    raise SimulationError(f"bit {col!r} appears in multiple stimulus columns")
                covered[name].add(bit)
                plan.append(("bit", name, bit))
            else:
                raise SimulationError(f"unknown stimulus column {col!r}")
        missing = [name for name, w in ports if covered[name] != set(range(w))]
        if missing:
            raise SimulationError(f"stimulus is missing input ports: {', '.join(missing)}")

        rows: list[dict[str, object]] = []
        for lineno, record in enumerate(reader, start=2):
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != len(plan):
                raise SimulationError(f"stimulus line {lineno}: expected {len(plan)} cells, got {len(record)}")
            row: dict[str, object] = {name: [None] * w if w > 1 else None for name, w in ports}
            holds: set[str] = set()
            assigned: set[str] = set()
            for (kind, name, bit), cell in zip(plan, record):
                cell = cell.strip()
                if cell == HOLD:
                    holds.add(name)
                    continue
                assigned.add(name)
                try:
                    if kind == "lane":
                        parts = [int(tok, 0) for tok in cell.split()]
                        if len(parts) == 1:
                            parts = parts * lanes
                        if len(parts) != lanes:
                            raise ValueError(f"expected 1 or {lanes} lane values, got {len(parts)}")
                        planes = slice_lanes(parts, widths[name])
                        row[name] = planes if widths[name] > 1 else planes[0]
                    elif kind == "word" or widths[name] == 1:
                        row[name] = int(cell, 0)
                    else:
                        row[name][bit] = int(cell, 0)  # type: ignore[index]
                except ValueError as exc:
                    raise SimulationError(f"stimulus line {lineno}, column for {name!r}: {exc}") from None
            mixed = holds & assigned
            if mixed:
                raise SimulationError(
                    f"stimulus line {lineno}: port(s) {', '.join(sorted(mixed))} mix hold with values")
            for name in holds:
                row[name] = HOLD
            for name, w in ports:
                if row[name] is None or (isinstance(row[name], list) and None in row[name]):
                    raise SimulationError(f"stimulus line {lineno}: incomplete value for port {name!r}")
            rows.append(row)
        return cls(list(ports), rows)


@dataclass
class Trace:
    """Sampled outputs per tick plus the executed-op count per tick."""
    ports: PortList
    rows: list[dict[str, object]] = field(default_factory=list)
    ops: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def outputs_equal(self, other: "Trace") -> bool:
        return self.ports == other.ports and self.rows == other.rows

    def port_word(self, tick: int, name: str, bit: int = 0) -> int:
        value = self.rows[tick][name]
        return value[bit] if isinstance(value, list) else value  # type: ignore[index]

    def lane_value(self, tick: int, name: str, lane: int) -> int:
        """Reassemble one lane's integer value of a port at one tick."""
        value = self.rows[tick][name]
        planes = value if isinstance(value, list) else [value]
        return sum(((p >> lane) & 1) << j for j, p in enumerate(planes))  # type: ignore[arg-type]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header: list[str] = []
        for name, w in self.ports:
            header.extend([name] if w == 1 else [f"{name}[{i}]" for i in range(w)])
        writer.writerow(header + ["ops"])
        for row, ops in zip(self.rows, self.ops):
            record: list[str] = []
            for name, w in self.ports:
                value = row[name]
                words = value if isinstance(value, list) else [value]
                record.extend(f"0x{word:x}" for word in words)
            writer.writerow(record + [str(ops)])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# Machines
# ---------------------------------------------------------------------------

class Machine:
    """N-lane synchronous machine base: reset / eval / update / run."""

    def __init__(self, width: int, in_ports: PortList, out_ports: PortList,
                 inits: Sequence[int]):
        self.width = width
        self.mask = (1 << width) - 1
        self.input_ports: PortList = list(in_ports)
        self.output_ports: PortList = list(out_ports)
        self._inits = list(inits)
        self.tick_count = 0
        self.current: list[int] = []
        self._pending: list[int] = []
        self._last_eval_ops = 0
        self.reset()

    @property
    def n_dffs(self) -> int:
        return len(self._inits)

    def reset(self) -> None:
        """Load per-flip-flop init bits, replicated across all lanes."""
        self.current = [self.mask if b else 0 for b in self._inits]
        self._pending = list(self.current)
        self.tick_count = 0

    def eval(self, inputs: Mapping[str, object]) -> dict[str, object]:
        """Compute outputs and next state; current state is untouched."""
        slots = self._flatten_inputs(inputs)
        outs, nexts, executed = self._eval_slots(slots)
        self._pending = nexts
        self._last_eval_ops = executed
        result: dict[str, object] = {}
        pos = 0
        for name, w in self.output_ports:
            if w == 1:
                result[name] = outs[pos]
            else:
                result[name] = outs[pos:pos + w]
            pos += w
        return result

    def update(self) -> None:
        """Commit the most recent eval's next state and advance the tick."""
        self.current = list(self._pending)
        self.tick_count += 1

    @property
    def ops_per_tick(self) -> int:
        """Static op count for one tick: eval ops plus one state-update copy
        per flip-flop."""
        return self._static_eval_ops() + self.n_dffs

    def run(self, stimulus: Stimulus, ticks: int | None = None) -> Trace:
        if ticks is None:
            ticks = len(stimulus)
        if len(stimulus) < ticks:
            raise SimulationError(f"stimulus supplies {len(stimulus)} ticks, {ticks} requested")
        rows = stimulus.resolved()[:ticks]
        trace = Trace(list(self.output_ports))
        for row in rows:
            outputs = self.eval(row)
            self.update()
            trace.rows.append(outputs)
            trace.ops.append(self._last_eval_ops + self.n_dffs)
        return trace

    # -- subclass interface -------------------------------------------------

    def _eval_slots(self, slots: list[int]) -> tuple[list[int], list[int], int]:
        raise NotImplementedError

    def _static_eval_ops(self) -> int:
        raise NotImplementedError

    # -- marshalling ----------------------------------------------------------

    def _flatten_inputs(self, inputs: Mapping[str, object]) -> list[int]:
        known = dict(self.input_ports)
        for name in inputs:
            if name not in known:
                raise SimulationError(f"unknown input port {name!r}")
        slots: list[int] = []
        for name, w in self.input_ports:
            if name not in inputs:
                raise SimulationError(f"missing input port {name!r}")
            value = inputs[name]
            if w == 1 and isinstance(value, int):
                words = [value]
            elif isinstance(value, (list, tuple)) and len(value) == w:
                words = list(value)
            else:
                raise SimulationError(f"port {name!r} expects {w} lane-word(s)")
            for word in words:
                if not isinstance(word, int) or not (0 <= word <= self.mask):
                    raise SimulationError(f"port {name!r}: lane-word out of range for width {self.width}")
                slots.append(word)
        return slots


class LeveledMachine(Machine):
    """Interprets the leveled gate schedule directly, one cell at a time."""

    def __init__(self, program: LeveledProgram, width: int = 32):
        if width not in (8, 16, 32, 64):
            raise ValueError(f"word width must be 8, 16, 32 or 64, got {width}")
        self.program = program
        n = program.netlist
        self._n_nets = n.n_nets
        self._in_nets = list(n.primary_inputs)
        self._out_nets = list(n.primary_outputs)
        self._dff_out_nets = [n.cells[i].output for i in program.dffs]
        self._dff_in_nets = [n.cells[i].inputs[0] for i in program.dffs]
        self._ops = [
            (n.cells[ci].kind, n.cells[ci].inputs, n.cells[ci].output)
            for ci in program.schedule
        ]
        in_p = [(p.name, p.width) for p in input_ports(n)]
        out_p = [(p.name, p.width) for p in output_ports(n)]
        super().__init__(width, in_p, out_p, program.dff_inits())

    def _static_eval_ops(self) -> int:
        return len(self._ops)

    def _eval_slots(self, slots: list[int]) -> tuple[list[int], list[int], int]:
        values = [0] * self._n_nets
        for net, word in zip(self._in_nets, slots):
            values[net] = word
        for net, plane in zip(self._dff_out_nets, self.current):
            values[net] = plane
        mask = self.mask
        executed = 0
        for kind, ins, out in self._ops:
            values[out] = kind_eval(kind, tuple(values[i] for i in ins), mask)
            executed += 1
        outs = [values[net] for net in self._out_nets]
        nexts = [values[net] for net in self._dff_in_nets]
        return outs, nexts, executed


class BitProgramMachine(Machine):
    """Interprets the lowered branch-free instruction program."""

    def __init__(self, program: BitProgram):
        self.program = program
        self._n_vregs = program.n_vregs()
        in_p = [(name, len(slots)) for name, slots in program.input_port_slots]
        out_p = [(name, len(slots)) for name, slots in program.output_port_slots]
        self._in_order = [s for _, slots in program.input_port_slots for s in slots]
        self._out_order = [s for _, slots in program.output_port_slots for s in slots]
        super().__init__(program.width, in_p, out_p, program.dff_inits)

    def _static_eval_ops(self) -> int:
        return len(self.program.instrs)

    def _eval_slots(self, slots: list[int]) -> tuple[list[int], list[int], int]:
        ins = [0] * len(slots)
        for slot, word in zip(self._in_order, slots):
            ins[slot] = word
        outs = [0] * self.program.n_outputs
        nexts = list(self._pending)
        vregs = [0] * self._n_vregs
        cur = self.current
        mask = self.mask
        banks = {"v": vregs, "i": ins, "o": outs, "s": cur, "n": nexts}

        def fetch(op):
            if op.kind == "c":
                return mask if op.index else 0
            return banks[op.kind][op.index]

        executed = 0
        for instr in self.program.instrs:
            banks[instr.dest.kind][instr.dest.index] = run_instr(instr, fetch, mask)
            executed += 1
        ordered = [outs[slot] for slot in self._out_order]
        return ordered, nexts, executed


def machine_for(netlist_or_program, width: int = 32, engine: str = "leveled",
                isa: str = "portable"):
    """Build a machine for a netlist, leveled program, or bit program."""
    from .levelizer import levelize
    from .bitprog import lower

    obj = netlist_or_program
    if isinstance(obj, BitProgram):
        return BitProgramMachine(obj)
    if isinstance(obj, Netlist):
        obj = levelize(obj)
    if not isinstance(obj, LeveledProgram):
        raise TypeError(f"cannot build a machine from {type(obj).__name__}")
    if engine == "leveled":
        return LeveledMachine(obj, width)
    if engine == "bitprog":
        return BitProgramMachine(lower(obj, isa, width))
    raise ValueError(f"unknown engine {engine!r}")
