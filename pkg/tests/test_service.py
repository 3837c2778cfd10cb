"""HTTP endpoints, exercised in process with the test client."""

import pytest
from fastapi.testclient import TestClient

from pspc.service.app import create_app

TINY_BLIF = """\
.model tiny
.inputs a b
.outputs y
.gate XOR2 a=a b=b o=y
.end
"""

DOUBLE_DRIVER_BLIF = """\
.model clash
.inputs a b
.outputs y
.gate AND2 a=a b=b o=y
.gate OR2 a=a b=b o=y
.end
"""


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json() == {"status": "ok"}


def test_designs_listing(client):
    r = client.get("/designs")
    assert r.status_code == 200
    keys = {d["key"] for d in r.json()}
    assert keys == {"gcd", "pwm", "simon"}


def test_compile_builtin(client):
    r = client.post("/compile", json={
        "source": {"design": "gcd"}, "isa": "riscv", "width": 16,
    })
    assert r.status_code == 200
    doc = r.json()
    assert doc["design"] == "gcd4"
    assert "gcd4_psp(" in doc["text"]
    assert doc["ops_per_tick"] > 0


def test_compile_text_source(client):
    r = client.post("/compile", json={
        "source": {"text": TINY_BLIF, "format": "blif"},
        "output": "bitprog",
    })
    assert r.status_code == 200
    assert "# design: tiny" in r.json()["text"]


def test_compile_unknown_isa(client):
    r = client.post("/compile", json={
        "source": {"design": "gcd"}, "isa": "z80",
    })
    assert r.status_code == 400
    assert "unknown isa" in r.json()["detail"]


def test_unknown_design_404(client):
    r = client.post("/stats", json={"source": {"design": "nonesuch"}})
    assert r.status_code == 404


def test_parse_error_shape(client):
    r = client.post("/stats", json={
        "source": {"text": ".model x\n.inputs a\n", "format": "blif"},
    })
    assert r.status_code == 400
    assert r.json()["detail"]["error"] == "parse"


def test_validation_error_shape(client):
    r = client.post("/stats", json={
        "source": {"text": DOUBLE_DRIVER_BLIF, "format": "blif"},
    })
    assert r.status_code == 400
    detail = r.json()["detail"]
    assert detail["error"] == "validation"
    assert detail["diagnostics"]


def test_source_needs_exactly_one(client):
    r = client.post("/stats", json={"source": {}})
    assert r.status_code == 422
    r = client.post("/stats", json={
        "source": {"design": "gcd", "text": TINY_BLIF, "format": "blif"},
    })
    assert r.status_code == 422


def test_text_needs_format(client):
    r = client.post("/stats", json={"source": {"text": TINY_BLIF}})
    assert r.status_code == 422


def test_stats(client):
    r = client.post("/stats", json={"source": {"design": "pwm"}})
    assert r.status_code == 200
    doc = r.json()
    assert doc["design"] == "pwm8"
    assert doc["cells"]["DFF"] == 16
    assert doc["ops_per_tick"] > 16


def test_simulate_all_engines_agree(client):
    r = client.post("/simulate", json={
        "source": {"design": "gcd"}, "engine": "all", "ticks": 12, "width": 8,
    })
    assert r.status_code == 200
    doc = r.json()
    assert doc["engines_agree"] is True
    assert len(doc["ops"]) == 12
    assert len(set(doc["ops"])) == 1
    assert doc["trace_csv"].splitlines()[0] == "done,q[0],q[1],q[2],q[3],ops"


def test_simulate_single_engine_no_agree_field(client):
    r = client.post("/simulate", json={
        "source": {"design": "pwm"}, "engine": "leveled", "ticks": 4, "width": 8,
    })
    assert r.status_code == 200
    assert r.json()["engines_agree"] is None


def test_simulate_stimulus_csv(client):
    stim = "start,lane.a,lane.b\n0xff,12,8\n" + "0,hold,hold\n" * 6
    r = client.post("/simulate", json={
        "source": {"design": "gcd"}, "width": 8, "stimulus_csv": stim,
    })
    assert r.status_code == 200
    doc = r.json()
    assert doc["ticks"] == 7
    lines = doc["trace_csv"].splitlines()
    assert lines[4].split(",")[0] == "0xff"


def test_simulate_bad_stimulus(client):
    r = client.post("/simulate", json={
        "source": {"design": "gcd"}, "width": 8, "stimulus_csv": "nope\n1\n",
    })
    assert r.status_code == 400


def test_report(client):
    r = client.post("/report", json={
        "source": {"design": "gcd"}, "ticks": 16, "width": 8,
    })
    assert r.status_code == 200
    doc = r.json()
    assert doc["repeatable"] is True
    assert 0.0 < doc["overhead"]["ratio"] < 1.0
    assert doc["breakdown"]["AND"] >= 1


def test_transpose_round_trip(client):
    r = client.post("/transpose", json={"values": [1, 2, 3], "bits": 4})
    planes = r.json()["values"]
    assert planes == [5, 6, 0, 0]
    r = client.post("/transpose", json={
        "values": planes, "invert": True, "lanes": 3,
    })
    assert r.json()["values"] == [1, 2, 3]


def test_transpose_invert_needs_lanes(client):
    r = client.post("/transpose", json={"values": [1], "invert": True})
    assert r.status_code == 422


def test_transpose_range_error(client):
    r = client.post("/transpose", json={"values": [16], "bits": 4})
    assert r.status_code == 400
