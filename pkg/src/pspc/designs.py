"""Built-in demonstration designs and their scalar references.

Each builder returns a plain gate-level netlist over the generic library,
so the designs exercise the whole pipeline exactly like an imported file.
The scalar Simon reference lives here too; it is the functional oracle the
hardware round datapath is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .netlist import Netlist, NetlistBuilder


# ---------------------------------------------------------------------------
# Word-level helpers over per-bit nets (LSB first)
# ---------------------------------------------------------------------------

def _subtract(b: NetlistBuilder, a: list[int], s: list[int]) -> list[int]:
    """a - s as ripple borrow; result bits LSB first, borrow-out dropped."""
    diff: list[int] = []
    borrow: int | None = None
    for ai, si in zip(a, s):
        x = b.xor2(ai, si)
        if borrow is None:
            diff.append(x)
            borrow = b.andnot(si, ai)  # s & ~a
        else:
            diff.append(b.xor2(x, borrow))
            keep = b.andnot(borrow, x)  # borrow propagates while a == s
            new = b.andnot(si, ai)
            borrow = b.or2(new, keep)
    return diff


def _compare(b: NetlistBuilder, a: list[int], s: list[int]) -> tuple[int, int]:
    """(a > s, a == s), unsigned, ripple from the LSB."""
    gt: int | None = None
    neq: int | None = None
    for ai, si in zip(a, s):
        x = b.xor2(ai, si)
        here = b.andnot(ai, si)  # a & ~s: a wins this bit
        if gt is None:
            gt = here
            neq = x
        else:
            gt = b.or2(here, b.andnot(gt, x))
            neq = b.or2(neq, x)
    eq = b.not1(neq)
    return gt, eq


def _increment(b: NetlistBuilder, a: list[int]) -> list[int]:
    """a + 1 modulo 2**len(a)."""
    out: list[int] = []
    carry: int | None = None
    for ai in a:
        if carry is None:
            out.append(b.not1(ai))
            carry = ai
        else:
            out.append(b.xor2(ai, carry))
            carry = b.and2(ai, carry)
    return out


def _mux_bus(b: NetlistBuilder, sel: int, a: list[int], s: list[int]) -> list[int]:
    return [b.mux(sel, ai, si) for ai, si in zip(a, s)]


# ---------------------------------------------------------------------------
# GCD
# ---------------------------------------------------------------------------

def build_gcd(k: int = 4) -> Netlist:
    """Euclid's subtraction GCD over two k-bit operands.

    Ports: start, a[k], b[k] in; done, q[k] out.  Raising start for one
    tick while idle loads the operands; the machine then subtracts the
    smaller register from the larger once per tick and pulses done for one
    tick when they are equal, with the result on q.  Operands must be at
    least 1: a zero operand never reaches equality and the machine runs
    until reloaded.
    """
    b = NetlistBuilder(f"gcd{k}")
    start = b.input("start")
    a_in = b.input_bus("a", k)
    s_in = b.input_bus("b", k)

    state = b.dff(0, name="state")  # 0 idle, 1 running; D rewired below
    ra = [b.dff(0, name=f"ra{i}") for i in range(k)]
    rb = [b.dff(0, name=f"rb{i}") for i in range(k)]

    load = b.andnot(start, state, name="load")
    agb, eq = _compare(b, ra, rb)
    running = b.andnot(state, eq)  # still unequal: keep subtracting
    done = b.and2(state, eq, name="done")

    state_next = b.or2(load, running)
    b.rewire_dff(state, state_next)

    diff_ab = _subtract(b, ra, rb)
    diff_ba = _subtract(b, rb, ra)
    sub_a = b.and2(running, agb)
    sub_b = b.andnot(running, agb)

    ra_next = _mux_bus(b, load, a_in, _mux_bus(b, sub_a, diff_ab, ra))
    rb_next = _mux_bus(b, load, s_in, _mux_bus(b, sub_b, diff_ba, rb))
    for q, d in zip(ra, ra_next):
        b.rewire_dff(q, d)
    for q, d in zip(rb, rb_next):
        b.rewire_dff(q, d)

    b.output(done, "done")
    b.output_bus(ra, "q")
    return b.build()


def gcd_done_tick(a: int, s: int) -> int:
    """Tick (counting the load tick as 0) at which done pulses for (a, s)."""
    if a < 1 or s < 1:
        raise ValueError("operands must be at least 1")
    ticks = 1  # first comparison happens the tick after the load
    while a != s:
        if a > s:
            a -= s
        else:
            s -= a
        ticks += 1
    return ticks


# ---------------------------------------------------------------------------
# PWM
# ---------------------------------------------------------------------------

def build_pwm(r: int = 8) -> Netlist:
    """Free-running r-bit PWM: out is high while counter < duty.

    Ports: load, duty[r] in; out out.  The counter increments every tick
    and wraps; load captures duty into an internal register.  A duty of d
    gives exactly d high ticks per 2**r-tick period.
    """
    b = NetlistBuilder(f"pwm{r}")
    load = b.input("load")
    duty_in = b.input_bus("duty", r)

    cnt = [b.dff(0, name=f"cnt{i}") for i in range(r)]
    duty = [b.dff(0, name=f"duty_r{i}") for i in range(r)]

    for q, d in zip(cnt, _increment(b, cnt)):
        b.rewire_dff(q, d)
    for q, d in zip(duty, _mux_bus(b, load, duty_in, duty)):
        b.rewire_dff(q, d)

    # out = cnt < duty, strict, so duty 0 is constantly low.
    lt: int | None = None
    for ci, di in zip(cnt, duty):
        x = b.xor2(ci, di)
        here = b.andnot(di, ci)  # duty & ~cnt: duty wins this bit
        lt = here if lt is None else b.or2(here, b.andnot(lt, x))
    b.output(lt, "out")
    return b.build()


# ---------------------------------------------------------------------------
# Simon32/64 round datapath and scalar reference
# ---------------------------------------------------------------------------

SIMON_WORD = 16
SIMON_ROUNDS = 32
_Z0 = "11111010001001010110000111001101111101000100101011000011100110"
_MASK16 = (1 << SIMON_WORD) - 1


def _rol(v: int, r: int) -> int:
    return ((v << r) | (v >> (SIMON_WORD - r))) & _MASK16


def _ror(v: int, r: int) -> int:
    return _rol(v, SIMON_WORD - r)


def simon_key_schedule(key: tuple[int, int, int, int]) -> list[int]:
    """Expand a 64-bit key (most significant word first) to 32 round keys."""
    k = [key[3], key[2], key[1], key[0]]
    c = _MASK16 ^ 3
    for i in range(4, SIMON_ROUNDS):
        tmp = _ror(k[i - 1], 3) ^ k[i - 3]
        tmp ^= _ror(tmp, 1)
        z = int(_Z0[(i - 4) % 62])
        k.append(k[i - 4] ^ tmp ^ z ^ c)
    return k


def simon_round(x: int, y: int, rk: int) -> tuple[int, int]:
    """One Feistel round: the new left word mixes rotations of the old one."""
    fx = (_rol(x, 1) & _rol(x, 8)) ^ _rol(x, 2)
    return (y ^ fx ^ rk) & _MASK16, x


def simon_encrypt(pt: tuple[int, int], key: tuple[int, int, int, int]) -> tuple[int, int]:
    """Scalar Simon32/64 encryption; the oracle for the round datapath."""
    x, y = pt
    for rk in simon_key_schedule(key):
        x, y = simon_round(x, y, rk)
    return x, y


def build_simon_round() -> Netlist:
    """Simon32/64 round function as a registered 16-bit datapath.

    Ports: load, px[16], py[16], rk[16] in; cx[16], cy[16] out.  load
    captures the plaintext halves; every following tick applies one round
    with rk as that round's key, so 32 ticks after the load the registers
    hold the ciphertext.  Round keys come from the host-side key schedule.
    """
    b = NetlistBuilder("simon32_round")
    load = b.input("load")
    px = b.input_bus("px", SIMON_WORD)
    py = b.input_bus("py", SIMON_WORD)
    rk = b.input_bus("rk", SIMON_WORD)

    x = [b.dff(0, name=f"x{i}") for i in range(SIMON_WORD)]
    y = [b.dff(0, name=f"y{i}") for i in range(SIMON_WORD)]

    # Rotations are wiring: rol(x, r)[i] = x[(i - r) mod 16].
    def rol_net(r: int, i: int) -> int:
        return x[(i - r) % SIMON_WORD]

    round_x: list[int] = []
    for i in range(SIMON_WORD):
        t = b.and2(rol_net(1, i), rol_net(8, i))
        t = b.xor2(y[i], t)
        t = b.xor2(t, rol_net(2, i))
        round_x.append(b.xor2(t, rk[i]))

    for q, d in zip(x, _mux_bus(b, load, px, round_x)):
        b.rewire_dff(q, d)
    for q, d in zip(y, _mux_bus(b, load, py, x)):
        b.rewire_dff(q, d)

    b.output_bus(x, "cx")
    b.output_bus(y, "cy")
    return b.build()


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DesignSpec:
    key: str
    title: str
    build: Callable[[], Netlist]
    ports: tuple[tuple[str, int, str], ...]  # (name, width, role)
    fixture: str
    notes: str = ""


DESIGNS: dict[str, DesignSpec] = {
    spec.key: spec
    for spec in (
        DesignSpec(
            "gcd", "Euclid subtraction GCD, 4-bit operands", build_gcd,
            (("start", 1, "control"), ("a", 4, "operand"), ("b", 4, "operand"),
             ("done", 1, "status"), ("q", 4, "result")),
            "gcd4.blif",
            "operands must be at least 1",
        ),
        DesignSpec(
            "pwm", "free-running 8-bit PWM", build_pwm,
            (("load", 1, "control"), ("duty", 8, "operand"), ("out", 1, "result")),
            "pwm8.blif",
        ),
        DesignSpec(
            "simon", "Simon32/64 round datapath", build_simon_round,
            (("load", 1, "control"), ("px", 16, "operand"), ("py", 16, "operand"),
             ("rk", 16, "operand"), ("cx", 16, "result"), ("cy", 16, "result")),
            "simon32_round.blif",
            "feed round key i on the i-th tick after load",
        ),
    )
}


def fixture_path(filename: str):
    """Path to a packaged netlist fixture."""
    from importlib.resources import files

    return files("pspc").joinpath("fixtures", filename)
