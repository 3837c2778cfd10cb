"""Shared test helpers: random netlists and per-lane stimulus handling."""

from __future__ import annotations

from random import Random

from pspc import CellKind, Netlist, NetlistBuilder
from pspc.runtime import PortList, Stimulus, Trace, slice_lanes

GATE_KINDS = [
    CellKind.AND2, CellKind.OR2, CellKind.XOR2, CellKind.NAND2,
    CellKind.NOR2, CellKind.ANDNOT2, CellKind.ORNOT2, CellKind.NOT1,
    CellKind.MUX2,
]

# Verdict lines queued by the acceptance tests; printed after the run so
# output capture cannot hide them.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_netlist(seed: int, max_cells: int = 64, max_dffs: int = 8) -> Netlist:
    """A random valid netlist: acyclic by construction, single drivers.

    Gates only read nets that already exist, so combinational paths can
    never loop; flip-flop data inputs are rewired afterwards and may read
    anything, which is exactly the legal feedback.
    """
    rng = Random(seed)
    b = NetlistBuilder(f"rand{seed}")
    pool: list[int] = []
    for i in range(rng.randint(1, 6)):
        pool.append(b.input(f"in{i}"))
    n_dffs = rng.randint(0, max_dffs)
    dff_outs = [b.dff(pool[0], init=rng.randint(0, 1), name=f"r{i}")
                for i in range(n_dffs)]
    pool.extend(dff_outs)
    if rng.random() < 0.3:
        pool.append(b.const0())
    if rng.random() < 0.3:
        pool.append(b.const1())

    n_gates = rng.randint(1, max_cells - n_dffs - 2)  # leave room for the consts
    for _ in range(n_gates):
        kind = rng.choice(GATE_KINDS)
        if kind is CellKind.NOT1:
            ins = [rng.choice(pool)]
        elif kind is CellKind.MUX2:
            ins = [rng.choice(pool) for _ in range(3)]
        else:
            ins = [rng.choice(pool) for _ in range(2)]
        pool.append(b.cell(kind, *ins))

    for q in dff_outs:
        b.rewire_dff(q, rng.choice(pool))
    n_outs = rng.randint(1, min(4, len(pool)))
    for i, net in enumerate(rng.sample(pool, n_outs)):
        b.output(net, f"out{i}")
    return b.build()


def lane_rows(ports: PortList, ticks: int, lanes: int, rng: Random) -> list[dict[str, list[int]]]:
    """Random per-lane integer stimulus: rows[t][port][lane] is a k-bit value."""
    return [
        {name: [rng.getrandbits(width) for _ in range(lanes)] for name, width in ports}
        for _ in range(ticks)
    ]


def rows_to_stimulus(rows: list[dict[str, list[int]]], ports: PortList,
                     lanes: int) -> Stimulus:
    """Slice per-lane rows into the plane-word stimulus the machines take."""
    out: list[dict[str, object]] = []
    for row in rows:
        cur: dict[str, object] = {}
        for name, width in ports:
            planes = slice_lanes(row[name], width)
            cur[name] = planes if width > 1 else planes[0]
        out.append(cur)
    return Stimulus(list(ports), out)


def lane_trace(trace: Trace, lane: int) -> list[dict[str, int]]:
    """One lane's view of a trace: per tick, each output port's integer value."""
    return [
        {name: trace.lane_value(t, name, lane) for name, _ in trace.ports}
        for t in range(len(trace))
    ]
