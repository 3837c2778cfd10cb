"""Target ISA profiles and gate-to-instruction lowering tables.

Each profile names the bitwise mnemonics suitable for branch-free lane-wise
code on that processor and gives, per cell kind, a template of one or more
instructions that computes the same Boolean function.  Templates are written
over symbolic operands: the cell's fan-ins ("a", "b", "s"), scratch temps
("t0", "t1"), the result ("out"), and the all-ones / all-zeros words.

Profiles model logic selection only.  MOV/STR/LDR never appear here: data
marshalling is accounted separately by the codegen spill model.
"""

from __future__ import annotations

from dataclasses import dataclass

from .netlist import CellKind

# Word-wide semantics of every mnemonic used by any profile.
# Each entry: (arity, lambda over masked source words).
MNEMONIC_SEMANTICS = {
    "AND": (2, lambda a, b, m: a & b),
    "ORR": (2, lambda a, b, m: a | b),
    "OR":  (2, lambda a, b, m: a | b),
    "BIS": (2, lambda a, b, m: a | b),
    "EOR": (2, lambda a, b, m: a ^ b),
    "XOR": (2, lambda a, b, m: a ^ b),
    "BIC": (2, lambda a, b, m: a & ~b & m),
    "ORN": (2, lambda a, b, m: (a | (~b & m)) & m),
    "MVN": (1, lambda a, m: ~a & m),
    "COM": (1, lambda a, m: ~a & m),
    "NOT": (1, lambda a, m: ~a & m),
    "MOV": (1, lambda a, m: a),
}


@dataclass(frozen=True)
class Step:
    """One template instruction: mnemonic, destination symbol, source symbols."""
    op: str
    dest: str
    srcs: tuple[str, ...]


def _steps(*rows: tuple) -> tuple[Step, ...]:
    return tuple(Step(op, dest, tuple(srcs)) for op, dest, *srcs in rows)


@dataclass(frozen=True)
class IsaProfile:
    name: str
    key: str
    logic_mnemonics: frozenset[str]
    reg_count: int  # architectural registers the spill model may allocate
    lowering: dict[CellKind, tuple[Step, ...]]

    def __repr__(self) -> str:
        return f"IsaProfile({self.key!r})"


def _profile(name: str, key: str, regs: int, table: dict[CellKind, tuple[Step, ...]]) -> IsaProfile:
    mnems = frozenset(step.op for steps in table.values() for step in steps)
    for kind in CellKind:
        if kind in (CellKind.DFF, CellKind.CONST0, CellKind.CONST1):
            continue  # storage and constants lower structurally, not via gates
        if kind not in table:
            raise AssertionError(f"profile {key} lacks a lowering for {kind}")
    return IsaProfile(name, key, mnems, regs, table)


# ARM Cortex-M4: three-operand Thumb-2 logic, including the negated forms
# BIC/ORN/MVN, so every library gate lowers to at most three instructions.
ARM_CORTEX_M4 = _profile(
    "ARM Cortex-M4", "arm-m4", 14,
    {
        CellKind.AND2:    _steps(("AND", "out", "a", "b")),
        CellKind.OR2:     _steps(("ORR", "out", "a", "b")),
        CellKind.XOR2:    _steps(("EOR", "out", "a", "b")),
        CellKind.NAND2:   _steps(("AND", "t0", "a", "b"), ("MVN", "out", "t0")),
        CellKind.NOR2:    _steps(("ORR", "t0", "a", "b"), ("MVN", "out", "t0")),
        CellKind.ANDNOT2: _steps(("BIC", "out", "a", "b")),
        CellKind.ORNOT2:  _steps(("ORN", "out", "a", "b")),
        CellKind.NOT1:    _steps(("MVN", "out", "a")),
        # sel ? a : b as (sel AND a) OR (b AND NOT sel)
        CellKind.MUX2:    _steps(("AND", "t0", "s", "a"), ("BIC", "t1", "b", "s"),
                                 ("ORR", "out", "t0", "t1")),
    },
)

# RISC-V base ISA: plain AND/OR/XOR only; complement is XOR with all-ones.
RISC_V = _profile(
    "RISC-V", "riscv", 27,
    {
        CellKind.AND2:    _steps(("AND", "out", "a", "b")),
        CellKind.OR2:     _steps(("OR", "out", "a", "b")),
        CellKind.XOR2:    _steps(("XOR", "out", "a", "b")),
        CellKind.NAND2:   _steps(("AND", "t0", "a", "b"), ("XOR", "out", "t0", "ONES")),
        CellKind.NOR2:    _steps(("OR", "t0", "a", "b"), ("XOR", "out", "t0", "ONES")),
        CellKind.ANDNOT2: _steps(("XOR", "t0", "b", "ONES"), ("AND", "out", "a", "t0")),
        CellKind.ORNOT2:  _steps(("XOR", "t0", "b", "ONES"), ("OR", "out", "a", "t0")),
        CellKind.NOT1:    _steps(("XOR", "out", "a", "ONES")),
        # sel ? a : b as b XOR (sel AND (a XOR b)) -- one op cheaper than the
        # masked form on an ISA without AND-NOT.
        CellKind.MUX2:    _steps(("XOR", "t0", "a", "b"), ("AND", "t1", "t0", "s"),
                                 ("XOR", "out", "t1", "b")),
    },
)

# MSP430: two grounded specials, BIC (dst &= ~src) and BIS (dst |= src).
MSP430 = _profile(
    "MSP430", "msp430", 12,
    {
        CellKind.AND2:    _steps(("AND", "out", "a", "b")),
        CellKind.OR2:     _steps(("BIS", "out", "a", "b")),
        CellKind.XOR2:    _steps(("XOR", "out", "a", "b")),
        CellKind.NAND2:   _steps(("AND", "t0", "a", "b"), ("XOR", "out", "t0", "ONES")),
        CellKind.NOR2:    _steps(("BIS", "t0", "a", "b"), ("XOR", "out", "t0", "ONES")),
        CellKind.ANDNOT2: _steps(("BIC", "out", "a", "b")),
        CellKind.ORNOT2:  _steps(("XOR", "t0", "b", "ONES"), ("BIS", "out", "a", "t0")),
        CellKind.NOT1:    _steps(("XOR", "out", "a", "ONES")),
        CellKind.MUX2:    _steps(("XOR", "t0", "a", "b"), ("AND", "t1", "t0", "s"),
                                 ("XOR", "out", "t1", "b")),
    },
)

# AVR: 8-bit registers; COM is the one's-complement instruction.
AVR = _profile(
    "AVR", "avr", 28,
    {
        CellKind.AND2:    _steps(("AND", "out", "a", "b")),
        CellKind.OR2:     _steps(("OR", "out", "a", "b")),
        CellKind.XOR2:    _steps(("EOR", "out", "a", "b")),
        CellKind.NAND2:   _steps(("AND", "t0", "a", "b"), ("COM", "out", "t0")),
        CellKind.NOR2:    _steps(("OR", "t0", "a", "b"), ("COM", "out", "t0")),
        CellKind.ANDNOT2: _steps(("COM", "t0", "b"), ("AND", "out", "a", "t0")),
        CellKind.ORNOT2:  _steps(("COM", "t0", "b"), ("OR", "out", "a", "t0")),
        CellKind.NOT1:    _steps(("COM", "out", "a")),
        CellKind.MUX2:    _steps(("EOR", "t0", "a", "b"), ("AND", "t1", "t0", "s"),
                                 ("EOR", "out", "t1", "b")),
    },
)

# Portable: the C bitwise operators, for emission without any ISA assumption.
PORTABLE = _profile(
    "Portable C", "portable", 16,
    {
        CellKind.AND2:    _steps(("AND", "out", "a", "b")),
        CellKind.OR2:     _steps(("OR", "out", "a", "b")),
        CellKind.XOR2:    _steps(("XOR", "out", "a", "b")),
        CellKind.NAND2:   _steps(("AND", "t0", "a", "b"), ("NOT", "out", "t0")),
        CellKind.NOR2:    _steps(("OR", "t0", "a", "b"), ("NOT", "out", "t0")),
        CellKind.ANDNOT2: _steps(("NOT", "t0", "b"), ("AND", "out", "a", "t0")),
        CellKind.ORNOT2:  _steps(("NOT", "t0", "b"), ("OR", "out", "a", "t0")),
        CellKind.NOT1:    _steps(("NOT", "out", "a")),
        CellKind.MUX2:    _steps(("NOT", "t0", "s"), ("AND", "t1", "s", "a"),
                                 ("AND", "t2", "t0", "b"), ("OR", "out", "t1", "t2")),
    },
)

PROFILES: dict[str, IsaProfile] = {
    p.key: p for p in (ARM_CORTEX_M4, RISC_V, MSP430, AVR, PORTABLE)
}


def profile(key: str) -> IsaProfile:
    try:
        return PROFILES[key]
    except KeyError:
        raise KeyError(f"unknown ISA profile {key!r}; choose from {sorted(PROFILES)}") from None
