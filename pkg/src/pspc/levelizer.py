"""Netlist levelization: a deterministic straight-line gate schedule.

Orders the combinational cells so every cell follows all of its drivers,
from the primary inputs and flip-flop outputs down to the primary outputs
and flip-flop inputs.  The schedule is the program: evaluating it once, in
order, is one synchronous tick's worth of combinational work, with a fixed
cell count regardless of data.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .netlist import (
    Cell,
    CellKind,
    InvalidNetlistError,
    Netlist,
    validate_netlist,
)


class CombinationalCycleError(Exception):
    def __init__(self, netlist: Netlist, cycle: list[int]):
        self.cycle = cycle
        pretty = " -> ".join(f"cell#{i}({netlist.cells[i].kind.value})" for i in cycle)
        super().__init__(f"combinational cycle: {pretty}")


@dataclass
class LeveledProgram:
    """Topologically ordered combinational schedule over a netlist.

    schedule: combinational cell indices, every one exactly once.
    level:    cell index -> longest-path depth (sources are level 0, so the
              first rank of cells is level 1).
    sources:  primary input nets followed by flip-flop output nets.
    sinks:    primary output nets followed by flip-flop input nets.
    dffs:     flip-flop cell indices in declaration order.
    """
    netlist: Netlist
    schedule: tuple[int, ...]
    level: dict[int, int]
    sources: tuple[int, ...]
    sinks: tuple[int, ...]
    dffs: tuple[int, ...]
    pruned: bool = False

    @property
    def n_dffs(self) -> int:
        return len(self.dffs)

    def dff_inits(self) -> list[int]:
        return [self.netlist.init_bit(i) for i in self.dffs]

    def cell(self, index: int) -> Cell:
        return self.netlist.cells[index]


def levelize(n: Netlist, prune_dead: bool = False, tie_break: str = "declaration") -> LeveledProgram:
    """Kahn's algorithm with ties broken by cell declaration index.

    `tie_break="reverse"` prefers the highest declaration index instead; it
    exists so schedule-invariance of the runtime can be tested against a
    second valid order.  `prune_dead` drops combinational cells with no path
    to a primary output or flip-flop input (kept by default so gate counts
    match what the synthesis tool reported).
    """
    report = validate_netlist(n)
    if not report.ok:
        raise InvalidNetlistError(report, "levelize requires a valid netlist")
    if tie_break not in ("declaration", "reverse"):
        raise ValueError(f"unknown tie_break {tie_break!r}")

    dffs = tuple(n.dff_cells())
    comb = n.comb_cells()
    keep = set(comb) if not prune_dead else _live_cells(n, comb, dffs)

    driver_cell: dict[int, int] = {}
    for idx in comb:
        driver_cell[n.cells[idx].output] = idx

    # Dependency edges between kept combinational cells.
    fanout: dict[int, list[int]] = {idx: [] for idx in keep}
    missing: dict[int, int] = {}
    for idx in sorted(keep):
        count = 0
        for net in n.cells[idx].inputs:
            drv = driver_cell.get(net)
            if drv is not None and drv in keep:
                fanout[drv].append(idx)
                count += 1
        missing[idx] = count

    sign = 1 if tie_break == "declaration" else -1
    ready = [sign * idx for idx, deps in missing.items() if deps == 0]
    heapq.heapify(ready)
    schedule: list[int] = []
    level: dict[int, int] = {}
    while ready:
        idx = sign * heapq.heappop(ready)
        depth = 0
        for net in n.cells[idx].inputs:
            drv = driver_cell.get(net)
            if drv is not None and drv in keep:
                depth = max(depth, level[drv])
        level[idx] = depth + 1
        schedule.append(idx)
        for reader in fanout[idx]:
            missing[reader] -= 1
            if missing[reader] == 0:
                heapq.heappush(ready, sign * reader)

    if len(schedule) != len(keep):
        # validate_netlist should have caught this; recover a cycle anyway.
        stuck = sorted(set(keep) - set(schedule))
        raise CombinationalCycleError(n, _extract_cycle(n, stuck, driver_cell))

    sources = tuple(n.primary_inputs) + tuple(n.cells[i].output for i in dffs)
    sinks = tuple(n.primary_outputs) + tuple(n.cells[i].inputs[0] for i in dffs)
    return LeveledProgram(
        netlist=n,
        schedule=tuple(schedule),
        level=level,
        sources=sources,
        sinks=sinks,
        dffs=dffs,
        pruned=prune_dead,
    )


def _live_cells(n: Netlist, comb: list[int], dffs: tuple[int, ...]) -> set[int]:
    """Combinational cells backward-reachable from a primary output or a
    flip-flop input."""
    driver_cell: dict[int, int] = {}
    for idx in comb:
        driver_cell[n.cells[idx].output] = idx
    roots = list(n.primary_outputs) + [n.cells[i].inputs[0] for i in dffs]
    live: set[int] = set()
    work = [driver_cell[net] for net in roots if net in driver_cell]
    while work:
        idx = work.pop()
        if idx in live:
            continue
        live.add(idx)
        for net in n.cells[idx].inputs:
            drv = driver_cell.get(net)
            if drv is not None and drv not in live:
                work.append(drv)
    return live


def _extract_cycle(n: Netlist, stuck: list[int], driver_cell: dict[int, int]) -> list[int]:
    stuck_set = set(stuck)
    start = stuck[0]
    seen: dict[int, int] = {}
    path: list[int] = []
    node = start
    while node not in seen:
        seen[node] = len(path)
        path.append(node)
        node = next(
            drv for net in n.cells[node].inputs
            if (drv := driver_cell.get(net)) is not None and drv in stuck_set
        )
    return path[seen[node]:] + [node]


def verify_levels(p: LeveledProgram, n: Netlist) -> bool:
    """Independent edge-by-edge check of the LeveledProgram invariants.

    Deliberately avoids Kahn bookkeeping: walks every fan-in edge of every
    scheduled cell and re-derives each level from scratch.
    """
    comb = [i for i, c in enumerate(n.cells) if c.kind is not CellKind.DFF]
    scheduled = list(p.schedule)
    if sorted(scheduled) != sorted(set(scheduled)):
        return False
    if not set(scheduled) <= set(comb):
        return False
    # Without pruning, the schedule must cover every combinational cell.
    if not p.pruned and set(scheduled) != set(comb):
        return False

    position = {idx: pos for pos, idx in enumerate(scheduled)}
    driver_cell = {n.cells[i].output: i for i in comb}

    for idx in scheduled:
        fanin_levels = [0]
        for net in n.cells[idx].inputs:
            drv = driver_cell.get(net)
            if drv is None:
                continue  # source net
            if drv not in position:
                return False  # depends on an unscheduled cell
            if position[drv] >= position[idx]:
                return False
            if p.level[drv] >= p.level[idx]:
                return False
            fanin_levels.append(p.level[drv])
        if p.level[idx] != max(fanin_levels) + 1:
            return False
    return True
