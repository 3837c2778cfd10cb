"""Branch-free bitwise instruction programs over virtual registers.

`lower()` turns a leveled schedule into a flat list of lane-wide bitwise
instructions for one ISA profile.  The program is static single assignment
over virtual registers; inputs, outputs and the two flip-flop state planes
(current, next) are addressed as slots.  There is no control flow of any
kind, so the instruction count is a property of the program, never of the
data it runs on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .isa import MNEMONIC_SEMANTICS, IsaProfile, profile as isa_profile
from .levelizer import LeveledProgram
from .netlist import CellKind, Port, input_ports, output_ports

WORD_WIDTHS = (8, 16, 32, 64)

# Operand kinds: v = virtual register, i = input slot, o = output slot,
# s = current state plane, n = next state plane, c = constant (0 or 1).
_KINDS = ("v", "i", "o", "s", "n", "c")


class Operand(NamedTuple):
    kind: str
    index: int

    def text(self) -> str:
        if self.kind == "c":
            return "ones" if self.index else "zero"
        return f"{self.kind}{self.index}"

    @classmethod
    def parse(cls, token: str) -> "Operand":
        if token == "ones":
            return cls("c", 1)
        if token == "zero":
            return cls("c", 0)
        kind, num = token[0], token[1:]
        if kind not in _KINDS or not num.isdigit():
            raise ValueError(f"bad operand token {token!r}")
        return cls(kind, int(num))


ZERO = Operand("c", 0)
ONES = Operand("c", 1)


class Instr(NamedTuple):
    op: str
    dest: Operand
    srcs: tuple[Operand, ...]

    def text(self) -> str:
        return " ".join([self.op, self.dest.text(), *(s.text() for s in self.srcs)])


@dataclass
class BitProgram:
    """Lowered lane-parallel program plus the port metadata needed to call it."""
    name: str
    isa: str
    width: int
    instrs: list[Instr]
    input_nets: tuple[int, ...]
    output_nets: tuple[int, ...]
    dff_inits: tuple[int, ...]
    # Port name -> slot positions, preserving declaration order.
    input_port_slots: list[tuple[str, tuple[int, ...]]] = field(default_factory=list)
    output_port_slots: list[tuple[str, tuple[int, ...]]] = field(default_factory=list)
    state_labels: tuple[str, ...] = ()

    @property
    def n_inputs(self) -> int:
        return len(self.input_nets)

    @property
    def n_outputs(self) -> int:
        return len(self.output_nets)

    @property
    def n_dffs(self) -> int:
        return len(self.dff_inits)

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1

    def n_vregs(self) -> int:
        regs = [op.index for ins in self.instrs for op in (ins.dest, *ins.srcs) if op.kind == "v"]
        return max(regs) + 1 if regs else 0

    def mnemonics(self) -> set[str]:
        return {ins.op for ins in self.instrs}

    def to_text(self) -> str:
        lines = [
            f"# design: {self.name}",
            f"# isa: {self.isa}",
        ]
        for name, slots in self.input_port_slots:
            lines.append(f"# in {name} {' '.join(map(str, slots))}")
        for name, slots in self.output_port_slots:
            lines.append(f"# out {name} {' '.join(map(str, slots))}")
        if self.dff_inits:
            lines.append(f"# init {' '.join(map(str, self.dff_inits))}")
        lines.append(
            f"width {self.width}; inputs {self.n_inputs}; "
            f"outputs {self.n_outputs}; dffs {self.n_dffs};"
        )
        lines.extend(ins.text() for ins in self.instrs)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BitProgram":
        name, isa = "bitprog", "portable"
        in_ports: list[tuple[str, tuple[int, ...]]] = []
        out_ports: list[tuple[str, tuple[int, ...]]] = []
        inits: tuple[int, ...] | None = None
        header = None
        instrs: list[Instr] = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                fields = line[1:].split()
                if fields[:1] == ["design:"]:
                    name = fields[1]
                elif fields[:1] == ["isa:"]:
                    isa = fields[1]
                elif fields[:1] == ["in"]:
                    in_ports.append((fields[1], tuple(map(int, fields[2:]))))
                elif fields[:1] == ["out"]:
                    out_ports.append((fields[1], tuple(map(int, fields[2:]))))
                elif fields[:1] == ["init"]:
                    inits = tuple(map(int, fields[1:]))
                continue
            if header is None:
                header = {}
                for clause in line.split(";"):
                    clause = clause.strip()
                    if clause:
                        key, value = clause.split()
                        header[key] = int(value)
                continue
            op, dest, *srcs = line.split()
            if op not in MNEMONIC_SEMANTICS:
                raise ValueError(f"unknown mnemonic {op!r}")
            instrs.append(Instr(op, Operand.parse(dest), tuple(Operand.parse(s) for s in srcs)))
        if header is None:
            raise ValueError("missing header line (width ...; inputs ...;)")
        n_dffs = header.get("dffs", 0)
        if inits is None:
            inits = (0,) * n_dffs
        bp = cls(
            name=name,
            isa=isa,
            width=header["width"],
            instrs=instrs,
            input_nets=tuple(range(header.get("inputs", 0))),
            output_nets=tuple(range(header.get("outputs", 0))),
            dff_inits=inits,
            input_port_slots=in_ports or [(f"i{k}", (k,)) for k in range(header.get("inputs", 0))],
            output_port_slots=out_ports or [(f"o{k}", (k,)) for k in range(header.get("outputs", 0))],
        )
        return bp


def lower(p: LeveledProgram, isa: IsaProfile | str, width: int = 32) -> BitProgram:
    """Instruction-select a leveled schedule for one ISA profile.

    Every scheduled gate expands through the profile's template; constant
    drivers fold into operands; each sink (primary output or flip-flop next
    plane) receives exactly one write, either directly as a gate destination
    or as a trailing MOV when a source or constant drives it.
    """
    if isinstance(isa, str):
        isa = isa_profile(isa)
    if width not in WORD_WIDTHS:
        raise ValueError(f"word width must be one of {WORD_WIDTHS}, got {width}")

    n = p.netlist
    operand_of: dict[int, Operand] = {}
    for pos, net in enumerate(n.primary_inputs):
        operand_of[net] = Operand("i", pos)
    for dpos, ci in enumerate(p.dffs):
        operand_of[n.cells[ci].output] = Operand("s", dpos)

    # First sink slot per gate-driven net gets the direct write; every other
    # sink (extra fanout, source- or constant-driven) gets a trailing copy.
    sink_slots: list[tuple[int, Operand]] = []
    for pos, net in enumerate(n.primary_outputs):
        sink_slots.append((net, Operand("o", pos)))
    for dpos, ci in enumerate(p.dffs):
        sink_slots.append((n.cells[ci].inputs[0], Operand("n", dpos)))
    gate_outputs = {
        n.cells[ci].output for ci in p.schedule
        if n.cells[ci].kind not in (CellKind.CONST0, CellKind.CONST1)
    }
    direct_slot: dict[int, Operand] = {}
    for net, slot in sink_slots:
        if net in gate_outputs and net not in direct_slot:
            direct_slot[net] = slot

    instrs: list[Instr] = []
    next_vreg = 0

    def fresh() -> Operand:
        nonlocal next_vreg
        reg = Operand("v", next_vreg)
        next_vreg += 1
        return reg

    for ci in p.schedule:
        cell = n.cells[ci]
        if cell.kind is CellKind.CONST0:
            operand_of[cell.output] = ZERO
            continue
        if cell.kind is CellKind.CONST1:
            operand_of[cell.output] = ONES
            continue
        binding: dict[str, Operand] = {"ONES": ONES, "ZERO": ZERO}
        if cell.kind is CellKind.MUX2:
            binding["s"] = operand_of[cell.inputs[0]]
            binding["a"] = operand_of[cell.inputs[1]]
            binding["b"] = operand_of[cell.inputs[2]]
        elif len(cell.inputs) == 2:
            binding["a"] = operand_of[cell.inputs[0]]
            binding["b"] = operand_of[cell.inputs[1]]
        else:
            binding["a"] = operand_of[cell.inputs[0]]
        binding["out"] = direct_slot.get(cell.output, fresh())
        operand_of[cell.output] = binding["out"]
        for step in isa.lowering[cell.kind]:
            for sym in (step.dest, *step.srcs):
                if sym.startswith("t") and sym not in binding:
                    binding[sym] = fresh()
            instrs.append(Instr(step.op, binding[step.dest],
                                tuple(binding[s] for s in step.srcs)))

    for net, slot in sink_slots:
        if direct_slot.get(net) == slot:
            if net not in operand_of:
                # Dead sink under pruning or a truly undriven net; validation
                # rejects the latter, pruning never drops sink drivers.
                raise ValueError(f"sink net {net} has no lowered driver")
            continue
        instrs.append(Instr("MOV", slot, (operand_of[net],)))

    try:
        in_port_slots = _port_slots(input_ports(n), n.primary_inputs)
        out_port_slots = _port_slots(output_ports(n), n.primary_outputs)
    except ValueError:
        # Malformed bus names degrade to one port per net.
        in_port_slots = [(n.net_name(net), (pos,)) for pos, net in enumerate(n.primary_inputs)]
        out_port_slots = [(n.net_name(net), (pos,)) for pos, net in enumerate(n.primary_outputs)]

    return BitProgram(
        name=n.name,
        isa=isa.key,
        width=width,
        instrs=instrs,
        input_nets=tuple(n.primary_inputs),
        output_nets=tuple(n.primary_outputs),
        dff_inits=tuple(p.dff_inits()),
        input_port_slots=in_port_slots,
        output_port_slots=out_port_slots,
        state_labels=tuple(n.net_name(n.cells[ci].output) for ci in p.dffs),
    )


def _port_slots(ports: list[Port], nets: list[int]) -> list[tuple[str, tuple[int, ...]]]:
    position = {net: pos for pos, net in enumerate(nets)}
    return [(p.name, tuple(position[net] for net in p.nets)) for p in ports]


def run_instr(ins: Instr, fetch, mask: int) -> int:
    """Evaluate one instruction given an operand fetch function."""
    arity, fn = MNEMONIC_SEMANTICS[ins.op]
    if len(ins.srcs) != arity:
        raise ValueError(f"{ins.op} expects {arity} operands, got {len(ins.srcs)}")
    return fn(*(fetch(s) for s in ins.srcs), mask)
