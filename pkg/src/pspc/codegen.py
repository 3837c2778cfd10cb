"""C code emission and instruction accounting for lowered programs.

emit_source turns a lowered bit-parallel program into a self-contained C
translation unit with no data-dependent control flow.  tally predicts the
per-tick instruction mix on a target with a finite register file, counting
the data-movement instructions (MOV, LDR, STR) that the register allocator
adds around the logic operations.
"""

from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass, field

from .bitprog import BitProgram, Operand
from .isa import profile

C_KEYWORDS = frozenset("""
 auto break case char const continue default do double else enum extern
 float for goto if inline int long register restrict return short signed
 sizeof static struct switch typedef union unsigned void volatile while
 _Bool _Complex _Imaginary
""".split())

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

# One C expression template per mnemonic; {0}/{1} are the source operands.
_C_EXPR = {
    "AND": "{0} & {1}",
    "ORR": "{0} | {1}",
    "OR": "{0} | {1}",
    "BIS": "{0} | {1}",
    "EOR": "{0} ^ {1}",
    "XOR": "{0} ^ {1}",
    "BIC": "{0} & ~{1}",
    "ORN": "{0} | ~{1}",
    "MVN": "~{0}",
    "COM": "~{0}",
    "NOT": "~{0}",
    "MOV": "{0}",
}

_WORD_TYPE = {8: "uint8_t", 16: "uint16_t", 32: "uint32_t", 64: "uint64_t"}


class CodegenError(Exception):
    pass


@dataclass
class SourceArtifact:
    """An emitted C translation unit and its public symbol names."""
    design: str
    isa: str
    width: int
    text: str
    entry: str
    reset: str

    def write(self, path) -> None:
        with open(path, "w") as f:
            f.write(self.text)


def _check_identifier(name: str, what: str, taken: set[str]) -> None:
    if not _IDENT.match(name) or name in C_KEYWORDS:
        raise CodegenError(f"{what} {name!r} is not usable as a C identifier")
    if name in taken:
        raise CodegenError(f"{what} {name!r} collides with another generated symbol")
    taken.add(name)


def emit_source(program: BitProgram) -> SourceArtifact:
    """Emit a branch-free C translation unit for one lowered program.

    The unit defines `<design>_reset(void)` and `<design>_psp(...)` with one
    parameter per port in declaration order: width-1 inputs are scalars,
    width-1 outputs are pointers, wider ports are arrays of one word per
    bit.  Each call performs exactly one tick: a straight-line evaluation
    of every instruction followed by an unrolled copy of the next-state
    words into the current-state array.
    """
    word = _WORD_TYPE[program.width]
    design = program.name
    entry = f"{design}_psp"
    reset = f"{design}_reset"
    state = f"{design}_state"
    state_next = f"{design}_state_next"

    taken: set[str] = set()
    _check_identifier(design, "design name", taken)
    for sym in (entry, reset, state, state_next):
        _check_identifier(sym, "generated symbol", taken)
    for name, _slots in list(program.input_port_slots) + list(program.output_port_slots):
        _check_identifier(name, "port name", taken)
    for k in range(program.n_vregs()):
        if f"v{k}" in taken:
            raise CodegenError(f"a port name collides with generated local v{k}")

    ones = f"~({word})0"
    in_expr: dict[int, str] = {}
    for name, slots in program.input_port_slots:
        for j, slot in enumerate(slots):
            in_expr[slot] = name if len(slots) == 1 else f"{name}[{j}]"
    out_expr: dict[int, str] = {}
    for name, slots in program.output_port_slots:
        for j, slot in enumerate(slots):
            out_expr[slot] = f"*{name}" if len(slots) == 1 else f"{name}[{j}]"

    def ref(op: Operand) -> str:
        if op.kind == "v":
            return f"v{op.index}"
        if op.kind == "i":
            return in_expr[op.index]
        if op.kind == "s":
            return f"{state}[{op.index}]"
        if op.kind == "c":
            return ones if op.index else f"({word})0"
        raise CodegenError(f"operand {op.text()} cannot be read")

    def dest_ref(op: Operand) -> str:
        if op.kind == "v":
            return f"v{op.index}"
        if op.kind == "o":
            return out_expr[op.index]
        if op.kind == "n":
            return f"{state_next}[{op.index}]"
        raise CodegenError(f"operand {op.text()} cannot be written")

    params: list[str] = []
    for name, slots in program.input_port_slots:
        if len(slots) == 1:
            params.append(f"{word} {name}")
        else:
            params.append(f"const {word} {name}[{len(slots)}]")
    for name, slots in program.output_port_slots:
        if len(slots) == 1:
            params.append(f"{word} *{name}")
        else:
            params.append(f"{word} {name}[{len(slots)}]")
    param_text = ", ".join(params) if params else "void"

    lines: list[str] = []
    lines.append(f"/* {design}: {program.width}-lane bitsliced synchronous machine ({program.isa}). */")
    lines.append("#include <stdint.h>")
    lines.append("")
    if program.n_dffs:
        lines.append(f"static {word} {state}[{program.n_dffs}];")
        lines.append(f"static {word} {state_next}[{program.n_dffs}];")
        lines.append("")
    lines.append(f"void {reset}(void)")
    lines.append("{")
    for j, init in enumerate(program.dff_inits):
        value = ones if init else "0"
        lines.append(f"    {state}[{j}] = {value};")
        lines.append(f"    {state_next}[{j}] = {value};")
    lines.append("}")
    lines.append("")
    lines.append(f"void {entry}({param_text})")
    lines.append("{")
    v_written: set[int] = set()
    v_read: set[int] = set()
    for instr in program.instrs:
        if instr.dest.kind == "v":
            v_written.add(instr.dest.index)
        for s in instr.srcs:
            if s.kind == "v":
                v_read.add(s.index)
    declared = sorted(v_written | v_read)
    if declared:
        for base in range(0, len(declared), 10):
            names = ", ".join(f"v{k}" for k in declared[base:base + 10])
            lines.append(f"    {word} {names};")
        lines.append("")
    for instr in program.instrs:
        expr = _C_EXPR[instr.op].format(*(ref(s) for s in instr.srcs))
        lines.append(f"    {dest_ref(instr.dest)} = {expr};")
    silenced = sorted(v_written - v_read)
    if silenced:
        lines.append("")
        # gates nothing reads still execute (the tick's instruction count
        # is fixed), so consume their results to keep -Wall builds clean
        for k in silenced:
            lines.append(f"    (void)v{k};")
    if program.n_dffs:
        lines.append("")
        for j in range(program.n_dffs):
            lines.append(f"    {state}[{j}] = {state_next}[{j}];")
    lines.append("}")
    lines.append("")
    return SourceArtifact(design, program.isa, program.width, "\n".join(lines), entry, reset)


# ---------------------------------------------------------------------------
# Instruction tally under a finite register file
# ---------------------------------------------------------------------------

@dataclass
class InstructionBreakdown:
    """Per-tick instruction counts by mnemonic for one lowered program."""
    design: str
    isa: str
    width: int
    counts: dict[str, int] = field(default_factory=dict)

    MOVE_MNEMONICS = ("MOV", "LDR", "STR")

    def total(self) -> int:
        return sum(self.counts.values())

    def moves(self) -> int:
        return sum(self.counts.get(m, 0) for m in self.MOVE_MNEMONICS)

    def as_dict(self) -> dict[str, int]:
        return {m: self.counts[m] for m in sorted(self.counts)}


def tally(program: BitProgram) -> InstructionBreakdown:
    """Count per-tick instructions under a finite register file.

    The register model is a deterministic linear scan over the fixed
    instruction sequence with the profile's register count:

    * base addresses pin registers for the whole call: one per multi-bit
      input port, one per output port (arrays and result pointers), and
      two for the current/next state arrays when the design has
      flip-flops; only the remaining registers hold values;
    * each of the two constants costs one MOV at first use and then stays
      pinned in its register;
    * reading an input, state, or spilled value that is not in a register
      costs one LDR;
    * every write to an output or next-state word costs one STR
      (write-through; the register copy stays live for later reads);
    * when all registers are busy the victim is the value whose next use
      is furthest away (ties to the lower register number); evicting a
      live intermediate with no memory copy costs one STR, and its next
      use costs an LDR like any other reload;
    * the state-commit epilogue stores each flip-flop's next value once
      (plus an LDR first when that value is no longer register-resident).

    Counts are a pure function of the program and the profile, so the mix
    is identical on every tick regardless of data.
    """
    prof = profile(program.isa)
    counts: dict[str, int] = {}

    base_regs = sum(1 for _, slots in program.input_port_slots if len(slots) > 1)
    base_regs += len(program.output_port_slots)
    if program.n_dffs:
        base_regs += 2

    def bump(mnemonic: str) -> None:
        counts[mnemonic] = counts.get(mnemonic, 0) + 1

    # Next-use positions per symbol.  A symbol is a readable value:
    # ("c", b), ("i", k), ("s", k), ("v", k), or ("n", k) for the epilogue.
    reads: dict[tuple[str, int], list[int]] = {}
    n_instrs = len(program.instrs)
    for pos, instr in enumerate(program.instrs):
        for src in instr.srcs:
            reads.setdefault((src.kind, src.index), []).append(pos)
    for j in range(program.n_dffs):
        reads.setdefault(("n", j), []).append(n_instrs + j)

    INF = n_instrs + program.n_dffs + 1

    def next_use(sym: tuple[str, int], after: int) -> int:
        positions = reads.get(sym, ())
        idx = bisect_right(positions, after)
        return positions[idx] if idx < len(positions) else INF

    n_regs = prof.reg_count - base_regs
    if n_regs < 3:
        raise CodegenError(
            f"{prof.key} has {prof.reg_count} registers but {base_regs} are "
            "pinned on base addresses; not enough left to evaluate gates")
    regs: list[tuple[str, int] | None] = [None] * n_regs
    where: dict[tuple[str, int], int] = {}
    pinned: set[int] = set()
    spilled: set[tuple[str, int]] = set()

    def allocate(pos: int, in_flight: set[int]) -> int:
        for r in range(n_regs):
            if regs[r] is None:
                return r
        victim = -1
        victim_use = -1
        for r in range(n_regs):
            if r in pinned or r in in_flight:
                continue
            use = next_use(regs[r], pos)
            if use > victim_use:
                victim, victim_use = r, use
        if victim < 0:
            raise CodegenError(f"register pressure exceeds {n_regs} registers at instruction {pos}")
        sym = regs[victim]
        if sym[0] == "v" and victim_use < INF and sym not in spilled:
            bump("STR")  # live intermediate loses its only copy
            spilled.add(sym)
        del where[sym]
        regs[victim] = None
        return victim

    def ensure(sym: tuple[str, int], pos: int, in_flight: set[int]) -> int:
        if sym in where:
            return where[sym]
        r = allocate(pos, in_flight)
        if sym[0] == "c":
            bump("MOV")
            pinned.add(r)
        else:
            bump("LDR")
        regs[r] = sym
        where[sym] = r
        return r

    def bind_dest(sym: tuple[str, int], pos: int, in_flight: set[int]) -> None:
        if sym in where:
            r = where[sym]  # rewrite in place (output and next-state slots)
        else:
            r = allocate(pos, in_flight)
            regs[r] = sym
            where[sym] = r
        in_flight.add(r)

    for pos, instr in enumerate(program.instrs):
        in_flight: set[int] = set()
        for src in instr.srcs:
            in_flight.add(ensure((src.kind, src.index), pos, in_flight))
        dest = (instr.dest.kind, instr.dest.index)
        bind_dest(dest, pos, in_flight)
        if instr.op == "MOV":
            # A move into a memory-backed slot is just the store itself.
            if dest[0] not in ("o", "n"):
                bump("MOV")
        else:
            bump(instr.op)
        if dest[0] in ("o", "n"):
            bump("STR")
        # Drop values with no further use so their registers free up.
        for r in range(n_regs):
            sym = regs[r]
            if sym is not None and r not in pinned and next_use(sym, pos) >= INF:
                del where[sym]
                regs[r] = None

    for j in range(program.n_dffs):
        pos = n_instrs + j
        sym = ("n", j)
        if sym not in where:
            ensure(sym, pos, set())
        bump("STR")

    for mnemonic in counts:
        if mnemonic not in ("MOV", "LDR", "STR") and mnemonic not in prof.logic_mnemonics:
            raise CodegenError(f"mnemonic {mnemonic} is not in the {prof.key} profile")
    return InstructionBreakdown(program.name, program.isa, program.width, counts)
