"""Measurement: move overhead, tick repeatability, and a reference engine.

The reference engine here is an event-driven simulator from a different
algorithmic family than the straight-line machines: it only re-evaluates
gates whose inputs changed, so its per-tick work depends on the data.  That
makes it both an independent functional oracle and the natural baseline
that the constant-work engines are measured against.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Sequence

from .bitprog import lower
from .codegen import InstructionBreakdown, tally
from .levelizer import levelize
from .netlist import (
    CellKind,
    Netlist,
    input_ports,
    kind_eval,
    netlist_stats,
    output_ports,
)
from .runtime import Machine, Stimulus


class MetricsError(Exception):
    pass


# ---------------------------------------------------------------------------
# Move overhead
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OverheadReport:
    """Share of per-tick instructions spent moving data rather than computing."""
    moves: int
    total: int

    @property
    def ratio(self) -> float:
        return self.moves / self.total

    def as_dict(self) -> dict:
        return {"moves": self.moves, "total": self.total, "ratio": self.ratio}


def overhead(breakdown: InstructionBreakdown) -> OverheadReport:
    """Move overhead of an instruction mix: (MOV + STR + LDR) / total."""
    total = breakdown.total()
    if total == 0:
        raise MetricsError("instruction mix is empty; overhead is undefined")
    return OverheadReport(breakdown.moves(), total)


# ---------------------------------------------------------------------------
# Repeatability
# ---------------------------------------------------------------------------

@dataclass
class RepeatabilityReport:
    """Whether per-tick executed-op counts are identical across runs."""
    repeatable: bool
    distinct_counts: list[int]
    per_run: list[list[int]]

    def __bool__(self) -> bool:
        return self.repeatable


def repeatability(machine: Machine, stimuli: Sequence[Stimulus],
                  ticks: int | None = None) -> RepeatabilityReport:
    """Run one machine over several stimuli and compare per-tick op counts.

    The machine is reset before each run.  Repeatable means every tick of
    every run executed the same number of operations.
    """
    if not stimuli:
        raise MetricsError("repeatability needs at least one stimulus")
    per_run: list[list[int]] = []
    for stim in stimuli:
        machine.reset()
        trace = machine.run(stim, ticks)
        per_run.append(list(trace.ops))
    distinct = sorted({count for run in per_run for count in run})
    return RepeatabilityReport(len(distinct) == 1, distinct, per_run)


# ---------------------------------------------------------------------------
# Event-driven reference engine
# ---------------------------------------------------------------------------

class EventDrivenMachine(Machine):
    """Change-propagation simulator with two-phase state commit.

    Keeps every net's value between ticks and re-evaluates only the fanout
    of nets that changed, in level order, so each gate runs at most once
    per tick.  Functionally equivalent to the straight-line engines; its
    executed-op count varies with input activity by construction.
    """

    def __init__(self, netlist: Netlist, width: int = 32):
        if width not in (8, 16, 32, 64):
            raise ValueError(f"word width must be 8, 16, 32 or 64, got {width}")
        program = levelize(netlist)
        n = netlist
        self._n_nets = n.n_nets
        self._cells = n.cells
        self._in_nets = list(n.primary_inputs)
        self._out_nets = list(n.primary_outputs)
        self._dff_out_nets = [n.cells[i].output for i in program.dffs]
        self._dff_in_nets = [n.cells[i].inputs[0] for i in program.dffs]
        self._level = {ci: program.level[ci] for ci in program.schedule}
        readers = n.reader_map()
        self._comb_readers = {
            net: [ci for ci in cells if n.cells[ci].kind is not CellKind.DFF]
            for net, cells in readers.items()
        }
        self._schedule = program.schedule
        self._values: list[int] = []
        self._fresh = True
        in_p = [(p.name, p.width) for p in input_ports(n)]
        out_p = [(p.name, p.width) for p in output_ports(n)]
        super().__init__(width, in_p, out_p, program.dff_inits())

    def reset(self) -> None:
        super().reset()
        self._values = [0] * self._n_nets
        self._fresh = True

    def _static_eval_ops(self) -> int:
        raise MetricsError("event-driven op count is data-dependent, not static")

    def _eval_slots(self, slots: list[int]) -> tuple[list[int], list[int], int]:
        values = self._values
        pending: list[tuple[int, int]] = []
        queued: set[int] = set()

        def touch(net: int) -> None:
            for ci in self._comb_readers.get(net, ()):
                if ci not in queued:
                    queued.add(ci)
                    heapq.heappush(pending, (self._level[ci], ci))

        if self._fresh:
            # First tick after reset: evaluate everything once.
            for ci in self._schedule:
                queued.add(ci)
                heapq.heappush(pending, (self._level[ci], ci))
            self._fresh = False
            for net, word in zip(self._in_nets, slots):
                values[net] = word
            for net, plane in zip(self._dff_out_nets, self.current):
                values[net] = plane
        else:
            for net, word in zip(self._in_nets, slots):
                if values[net] != word:
                    values[net] = word
                    touch(net)
            for net, plane in zip(self._dff_out_nets, self.current):
                if values[net] != plane:
                    values[net] = plane
                    touch(net)

        mask = self.mask
        executed = 0
        while pending:
            _, ci = heapq.heappop(pending)
            queued.discard(ci)
            cell = self._cells[ci]
            new = kind_eval(cell.kind, tuple(values[i] for i in cell.inputs), mask)
            executed += 1
            if new != values[cell.output]:
                values[cell.output] = new
                touch(cell.output)

        outs = [values[net] for net in self._out_nets]
        nexts = [values[net] for net in self._dff_in_nets]
        return outs, nexts, executed


def event_driven_reference(netlist: Netlist, width: int = 32) -> EventDrivenMachine:
    """Reference simulator for differential checks against the PSP engines."""
    return EventDrivenMachine(netlist, width)


# ---------------------------------------------------------------------------
# Combined report
# ---------------------------------------------------------------------------

def build_report(netlist: Netlist, isa: str = "arm-m4", width: int = 32,
                 ticks: int = 64, seed: int = 1) -> dict:
    """Compile, measure, and collect everything into one JSON-ready dict."""
    from .runtime import BitProgramMachine

    program = levelize(netlist)
    bitprog = lower(program, isa, width)
    breakdown = tally(bitprog)
    over = overhead(breakdown)

    machine = BitProgramMachine(bitprog)
    ports = [(name, len(slots)) for name, slots in bitprog.input_port_slots]
    stimuli = [Stimulus.random(ports, ticks, width, seed=seed + k) for k in range(2)]
    rep = repeatability(machine, stimuli)

    stats = netlist_stats(netlist)
    gate_stats = {kind.name: count for kind, count in stats.items() if count}
    gate_stats["depth"] = max((program.level[ci] for ci in program.schedule), default=0)

    return {
        "design": netlist.name,
        "isa": isa,
        "width": width,
        "breakdown": breakdown.as_dict(),
        "overhead": over.as_dict(),
        "repeatable": rep.repeatable,
        "gate_stats": gate_stats,
    }
