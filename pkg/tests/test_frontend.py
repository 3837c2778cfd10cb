"""Netlist readers and writers."""

import json

import pytest

from pspc import (
    CellKind,
    InvalidNetlistError,
    LeveledMachine,
    ParseError,
    Stimulus,
    build_gcd,
    detect_format,
    emit_blif,
    emit_synth_json,
    levelize,
    load_netlist,
    parse_blif,
    parse_synth_json,
)
from pspc.designs import DESIGNS, fixture_path

from conftest import random_netlist

SMALL_BLIF = """\
# a toggle with an enable
.model toggle
.inputs en
.outputs y
.gate XOR2 a=q b=en o=d
.latch d q re clk 0
.gate AND2 a=q b=en o=y
.end
"""


def test_parse_blif_basics():
    n = parse_blif(SMALL_BLIF)
    assert n.name == "toggle"
    assert len(n.cells) == 3
    kinds = sorted(c.kind.name for c in n.cells)
    assert kinds == ["AND2", "DFF", "XOR2"]


def test_parse_blif_latch_variants():
    for tail, init in (("re clk 1", 1), ("re clk", 0), ("1", 1), ("", 0),
                       ("re clk 2", 0), ("re clk 3", 0)):
        text = (".model m\n.inputs d\n.outputs q\n"
                f".latch d q {tail}\n.end\n")
        n = parse_blif(text)
        assert n.init_bit(0) == init, tail


def test_parse_blif_continuation_and_comments():
    text = (".model m\n.inputs a \\\nb\n.outputs y\n"
            ".gate AND2 a=a b=b o=y  # trailing comment\n.end\n")
    n = parse_blif(text)
    assert len(n.primary_inputs) == 2


def test_parse_blif_errors_carry_line_numbers():
    bad = ".model m\n.inputs a\n.outputs y\n.gate FOO a=a o=y\n.end\n"
    with pytest.raises(ParseError) as info:
        parse_blif(bad)
    assert info.value.lineno == 4
    assert "FOO" in str(info.value)


def test_parse_blif_rejects_names():
    bad = ".model m\n.inputs a b\n.outputs y\n.names a b y\n11 1\n.end\n"
    with pytest.raises(ParseError, match="names"):
        parse_blif(bad)


def test_parse_blif_rejects_bad_latch_type():
    bad = ".model m\n.inputs d\n.outputs q\n.latch d q fe clk 0\n.end\n"
    with pytest.raises(ParseError, match="only re"):
        parse_blif(bad)


def test_parse_blif_missing_pin():
    bad = ".model m\n.inputs a\n.outputs y\n.gate AND2 a=a o=y\n.end\n"
    with pytest.raises(ParseError, match="needs pins"):
        parse_blif(bad)


def test_parse_blif_semantic_error_raises_validation():
    bad = ".model m\n.inputs a\n.outputs y\n.gate AND2 a=a b=ghost o=y\n.end\n"
    with pytest.raises(InvalidNetlistError) as info:
        parse_blif(bad)
    assert not info.value.report.ok


def test_parse_blif_requires_model_and_end():
    with pytest.raises(ParseError, match="model"):
        parse_blif(".inputs a\n.end\n")
    with pytest.raises(ParseError, match="end"):
        parse_blif(".model m\n.inputs a\n")


def test_blif_round_trip_behaviour():
    for seed in (0, 5, 11):
        n = random_netlist(seed)
        back = parse_blif(emit_blif(n))
        lm1 = LeveledMachine(levelize(n), 8)
        lm2 = LeveledMachine(levelize(back), 8)
        assert lm1.input_ports == lm2.input_ports
        stim = Stimulus.random(lm1.input_ports, 25, 8, seed=seed)
        assert lm1.run(stim).outputs_equal(lm2.run(stim)), f"seed {seed}"


def test_blif_round_trip_is_stable_text():
    n = build_gcd(4)
    once = emit_blif(n)
    twice = emit_blif(parse_blif(once))
    assert once == twice


JSON_DOC = {
    "creator": "test",
    "modules": {
        "m": {
            "ports": {
                "clk": {"direction": "input", "bits": [2]},
                "a": {"direction": "input", "bits": [3, 4]},
                "y": {"direction": "output", "bits": [5]},
            },
            "cells": {
                "mux": {"type": "$_MUX_",
                        "connections": {"S": [3], "A": [4], "B": ["1"], "Y": [6]}},
                "ff": {"type": "$_DFF_P_",
                       "connections": {"C": [2], "D": [6], "Q": [5]}},
            },
        }
    },
}


def test_parse_json_clock_mux_and_constants():
    n = parse_synth_json(json.dumps(JSON_DOC))
    # the clock port is dropped; a[2] remains
    from pspc import input_ports
    assert [(p.name, p.width) for p in input_ports(n)] == [("a", 2)]
    # $_MUX_ Y = S ? B : A, here B is constant 1:  y' = a0 ? 1 : a1
    m = LeveledMachine(levelize(n), 8)
    m.eval({"a": [0b1100, 0b1010]})
    m.update()
    assert m.eval({"a": [0, 0]})["y"] == 0b1100 | (0b1010 & ~0b1100 & 0xFF)


def test_parse_json_rejects_unknown_cell():
    doc = json.loads(json.dumps(JSON_DOC))
    doc["modules"]["m"]["cells"]["mux"]["type"] = "$_XNOR_"
    with pytest.raises(ParseError, match="XNOR"):
        parse_synth_json(json.dumps(doc))


def test_parse_json_rejects_gated_clock():
    doc = json.loads(json.dumps(JSON_DOC))
    # route the clock bit into logic too
    doc["modules"]["m"]["cells"]["mux"]["connections"]["A"] = [2]
    with pytest.raises(ParseError, match="clock"):
        parse_synth_json(json.dumps(doc))


def test_parse_json_module_selection():
    doc = {"creator": "t", "modules": {
        "one": JSON_DOC["modules"]["m"], "two": JSON_DOC["modules"]["m"]}}
    with pytest.raises(ParseError, match="exactly one module"):
        parse_synth_json(json.dumps(doc))
    n = parse_synth_json(json.dumps(doc), top="two")
    assert n.name == "two"
    with pytest.raises(ParseError, match="not found"):
        parse_synth_json(json.dumps(doc), top="three")


def test_parse_json_not_json():
    with pytest.raises(ParseError, match="JSON"):
        parse_synth_json("{nope")


def test_json_round_trip_behaviour():
    n = build_gcd(4)
    back = parse_synth_json(emit_synth_json(n))
    lm1 = LeveledMachine(levelize(n), 16)
    lm2 = LeveledMachine(levelize(back), 16)
    assert lm1.input_ports == lm2.input_ports
    stim = Stimulus.random(lm1.input_ports, 30, 16, seed=8)
    assert lm1.run(stim).outputs_equal(lm2.run(stim))


def test_detect_format_and_load(tmp_path):
    assert detect_format("x.blif") == "blif"
    assert detect_format("x.JSON") == "json"
    with pytest.raises(ParseError):
        detect_format("x.v")
    path = tmp_path / "t.blif"
    path.write_text(SMALL_BLIF)
    assert load_netlist(str(path)).name == "toggle"


def test_fixtures_fresh_and_loadable():
    # packaged fixtures must match what the builders produce today
    for spec in DESIGNS.values():
        packaged = fixture_path(spec.fixture).read_text()
        assert packaged == emit_blif(spec.build()), spec.fixture
        n = parse_blif(packaged, source=spec.fixture)
        assert n.name == spec.build().name
    packaged = fixture_path("gcd4.json").read_text()
    assert packaged == emit_synth_json(build_gcd(4))
