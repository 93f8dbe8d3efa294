import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import pytest

from finsler_hardy.report import SCHEMA_VERSION, canonical_json, emit_report, format_float, normalize, sweep_csv
from finsler_hardy.sweeps import SweepResult, SweepRow


def test_format_float():
    assert format_float(2 / math.pi) == "0.63661977236758138"
    assert format_float(1.0) == "1.0"
    assert format_float(0.0) == "0.0"
    assert format_float(1e-20) == "9.9999999999999995e-21"
    assert format_float(float("nan")) == '"nan"'
    assert format_float(-math.inf) == '"-inf"'


def test_round_trip_is_exact():
    rng = np.random.default_rng(0)
    vals = rng.normal(size=50) * 10.0 ** rng.integers(-30, 30, 50)
    back = json.loads(canonical_json({"v": vals}))["v"]
    assert back == vals.tolist()


def test_canonical_layout():
    class Tag(Enum):
        A = "a"

    @dataclass
    class Pt:
        y: float
        x: int

    text = canonical_json({"b": [Pt(0.5, 2), Tag.A], "a": np.float64(0.25), "c": (True, None), "d": {}})
    assert text == (
        '{\n  "a": 0.25,\n  "b": [\n    {\n      "x": 2,\n      "y": 0.5\n    },\n    "a"\n  ],\n'
        '  "c": [\n    true,\n    null\n  ],\n  "d": {},\n  "schema_version": 1\n}\n'
    )
    assert json.loads(text)["schema_version"] == SCHEMA_VERSION
    assert canonical_json({"x": 1}) == canonical_json({"x": 1})
    with pytest.raises(TypeError):
        normalize(object())


def test_sweep_csv():
    sw = SweepResult("s", (SweepRow(0.2, 1.5, 0.5), SweepRow((0.0, 0.05), 0.3, 0.25)))
    lines = sweep_csv(sw).splitlines()
    assert lines[0] == "control_parameter,quotient,target,rel_gap"
    assert lines[1] == "0.20000000000000001,1.5,0.5,2.0"
    assert lines[2].startswith("0.0 0.050000000000000003,0.29999999999999999,0.25,")


def test_emit_report(tmp_path, capsys):
    path = tmp_path / "r.json"
    text = emit_report({"q": 1.0}, "json", path)
    assert path.read_text() == text
    emit_report({"q": 1.0}, "json", "-")
    assert capsys.readouterr().out == text
    with pytest.raises(ValueError):
        emit_report({"q": 1.0}, "csv")
    with pytest.raises(ValueError):
        emit_report({"q": 1.0}, "xml")
