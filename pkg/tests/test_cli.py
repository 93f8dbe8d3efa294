import json
import math

import pytest

from finsler_hardy import cli
from finsler_hardy.verifier import DeficitReport


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_constants_json(capsys):
    code, out, _ = run(["constants", "--n", "3", "--alpha", "0", "--b", "2"], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["K"] == pytest.approx(2 / math.pi, rel=1e-14)
    assert "0.63661977236758" in out
    assert d["hardy_coeff"] == 0.0 and d["schema_version"] == 1


def test_constants_theta(capsys):
    code, out, _ = run(["constants", "--n", "2", "--b", "2", "--theta", "0.5"], capsys)
    assert code == 0
    assert json.loads(out)["K_theta"]["discrepancy"] < 1e-8


def test_usage_errors(capsys):
    assert run(["constants", "--n", "3", "--alpha", "0.5", "--b", "1.0"], capsys)[0] == 2
    assert run(["constants", "--n", "2", "--alpha", "0.5", "--b", "2", "--theta", "0.3"], capsys)[0] == 2
    assert run(["verify", "--n", "2", "--norm", "lp:1.5"], capsys)[0] == 2
    assert run(["verify", "--n", "2", "--norm", "hexagon"], capsys)[0] == 2
    assert run(["constants", "--format", "csv"], capsys)[0] == 2
    assert run(["hypergeom", "--abc", "1,2"], capsys)[0] == 2
    with pytest.raises(SystemExit) as e:
        cli.main(["nonsense"])
    assert e.value.code == 2


def test_numeric_failure(capsys):
    code, _, err = run(["sharpness", "--kind", "weight-power", "--k", "2", "--m", "8"], capsys)
    assert code == 3 and "numerical failure" in err


def test_check_failure_exit(monkeypatch, capsys):
    def fake(*a, **kw):
        return DeficitReport(1.0, 2.0, 0.0, (), -1.0, 1e-6)

    monkeypatch.setattr(cli, "deficit_series", fake)
    code, out, err = run(["verify", "--n", "2", "--alpha", "0", "--b", "2"], capsys)
    assert code == 1 and "check failed" in err
    assert json.loads(out)["verdict"] == "FAIL"


def test_hypergeom_negative_z(capsys):
    code, out, _ = run(["hypergeom", "--abc", "0.5,1,1.5", "--z=-0.3,-4"], capsys)
    assert code == 0
    vals = json.loads(out)["values"]
    assert vals[0]["value"] == pytest.approx(math.atan(math.sqrt(0.3)) / math.sqrt(0.3), rel=1e-13)
    assert vals[1]["value"] == pytest.approx(math.atan(2.0) / 2.0, rel=1e-13)


def test_verify_and_config_override(tmp_path, capsys):
    ini = tmp_path / "run.ini"
    ini.write_text("[params]\nn = 2\nalpha = 0.5\nb = 2.2\n[norm]\nspec = lp:4\n[sweep]\ncount = 2\nk = 1\n")
    code, out, _ = run(["verify", "--config", str(ini), "--b", "2.5"], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["params"] == {"n": 2, "alpha": 0.5, "b": 2.5}
    assert d["norm"]["family"] == "lp" and d["k"] == 1 and len(d["corpus"]) == 2
    assert d["verdict"] == "PASS" and d["deficit"] + d["error"] >= 0
    assert run(["verify", "--config", str(tmp_path / "missing.ini")], capsys)[0] == 2


def test_sharpness_csv_to_file(tmp_path, capsys):
    path = tmp_path / "k.csv"
    code, _, _ = run(["sharpness", "--kind", "K", "--n", "2", "--eps", "0.2,0.1", "--format", "csv",
                      "-o", str(path)], capsys)
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "control_parameter,quotient,target,rel_gap"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["0.20000000000000001", "0.10000000000000001"]


def test_sharpness_output_is_byte_identical(capsys):
    argv = ["sharpness", "--kind", "no-lp", "--eps", "0.4,0.2"]
    a = run(argv, capsys)[1]
    b = run(argv + ["--threads", "2"], capsys)[1]
    assert a == b


def test_ground_state_and_cone(capsys):
    code, out, _ = run(["ground-state", "--n", "4", "--alpha", "0.3", "--b", "2.4", "--t", "0.1,1,10"], capsys)
    assert code == 0 and json.loads(out)["max_rel_err"] < 1e-6
    code, out, _ = run(["cone", "--n", "2", "--b", "2", "--count", "2"], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["verdict"] == "PASS" and d["domain"]["kind"] == "cone"
    assert run(["cone", "--n", "2", "--alpha", "0.5", "--b", "2"], capsys)[0] == 2
