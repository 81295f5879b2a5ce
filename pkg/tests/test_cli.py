import json

import pytest

from cslink.cli import main

LINKED = {"cycles": [{"kind": "circle", "radius": 1.0}, {"kind": "line", "y_offset": 0.5}]}
HOPF = {"k": 1, "manifold": {"kind": "sphere"}, "charges": [1, 1],
        "linking_matrix": [[0, 1], [1, 0]], "homology": [], "framing": "zero"}


def write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_link_canonical(tmp_path, capsys):
    code, out, _ = run(capsys, "link", write(tmp_path, "c.json", LINKED))
    assert code == 0
    payload = json.loads(out)
    assert payload["gauss"]["rounded"] == 1
    assert payload["field_theory"]["rounded"] == 1
    assert payload["path_difference"] < 1e-8
    assert payload["gauss"]["converged"] is True


def test_link_touching_cycles_exit_1(tmp_path, capsys):
    cfg = {"cycles": [{"kind": "circle"}, {"kind": "line", "y_offset": 1.0}]}
    code, out, err = run(capsys, "link", write(tmp_path, "touch.json", cfg))
    assert code == 1
    assert "intersect" in err
    assert out == ""


def test_link_tiny_budget_exit_2(tmp_path, capsys):
    code, out, _ = run(capsys, "link", write(tmp_path, "c.json", LINKED),
                       "--method", "monte_carlo", "--budget", "10000", "--seed", "3")
    assert code == 2
    assert json.loads(out)["gauss"]["converged"] is False


def test_link_malformed_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"cycles": [,]}')
    code, out, err = run(capsys, "link", str(path))
    assert code == 1
    assert "line 1" in err and "column" in err


def test_link_flag_overrides(tmp_path, capsys):
    code, out, _ = run(capsys, "link", write(tmp_path, "c.json", LINKED), "--points", "64")
    assert code == 0
    assert json.loads(out)["gauss"]["evaluations"] < 10**4


def test_wilson_hopf(tmp_path, capsys):
    code, out, _ = run(capsys, "wilson", write(tmp_path, "w.json", HOPF))
    assert code == 0
    payload = json.loads(out)
    assert payload["phase"] == {"num": 1, "den": 2}
    assert payload["value_re"] == pytest.approx(-1.0)


def test_wilson_rejects_fractional_level(tmp_path, capsys):
    bad = dict(HOPF, k=0.5)
    code, _, err = run(capsys, "wilson", write(tmp_path, "w.json", bad))
    assert code == 1
    assert "integer" in err


def test_wilson_selection_rule_zero(tmp_path, capsys):
    cfg = {"k": 1, "manifold": {"kind": "product"}, "charges": [1],
           "linking_matrix": [[0]], "homology": [1], "framing": "zero"}
    code, out, _ = run(capsys, "wilson", write(tmp_path, "w.json", cfg))
    assert code == 0
    assert json.loads(out) == {"result": "zero"}


def test_selflink_zero_framing(tmp_path, capsys):
    cfg = {"cycle": {"kind": "circle"}, "framing": "zero"}
    code, out, _ = run(capsys, "selflink", write(tmp_path, "s.json", cfg))
    assert code == 0
    assert json.loads(out)["self_linking"] == 0


def test_selflink_pushoff(tmp_path, capsys):
    cfg = {"cycle": {"kind": "circle"},
           "framing": {"pushoff": {"epsilon": 0.1,
                                   "normal": {"kind": "constant", "vector": [0, 0, 1]}}},
           "quadrature": {"points_per_dim": 512}}
    code, out, _ = run(capsys, "selflink", write(tmp_path, "s.json", cfg))
    assert code == 0
    assert json.loads(out)["self_linking"] == 0


def test_zodiacus_command(tmp_path, capsys):
    cfg = {"cycles": [{"kind": "circle"}, {"kind": "line", "y_offset": 2.0}], "grid": 256}
    code, out, _ = run(capsys, "zodiacus", write(tmp_path, "z.json", cfg))
    assert code == 0
    payload = json.loads(out)
    assert payload["count"] > 0
    assert payload["count"] == len(payload["points"])
    linked = {"cycles": [{"kind": "circle"}, {"kind": "line", "y_offset": 0.5}], "grid": 256}
    code, out, _ = run(capsys, "zodiacus", write(tmp_path, "z2.json", linked))
    assert json.loads(out)["count"] == 0


def test_verify_quick_passes(capsys):
    code, out, err = run(capsys, "verify", "--level", "quick")
    assert code == 0
    payload = json.loads(out)
    assert payload["passed"] is True
    assert all(c["pass"] for c in payload["checks"])
    assert "PASS" in err


def test_verify_corrupted_constants_fail(capsys, monkeypatch):
    monkeypatch.setenv("CSLINK_VERIFY_CORRUPT", "1")
    code, out, err = run(capsys, "verify", "--level", "quick")
    assert code != 0
    assert json.loads(out)["passed"] is False
    assert "FAIL" in err


def test_missing_file(capsys):
    code, _, err = run(capsys, "link", "/nonexistent/config.json")
    assert code == 1
    assert "cannot read" in err


def test_output_is_reproducible(tmp_path, capsys):
    path = write(tmp_path, "c.json", LINKED)
    _, first, _ = run(capsys, "link", path, "--points", "64")
    _, second, _ = run(capsys, "link", path, "--points", "64")
    assert first == second
    mc = ("link", path, "--method", "monte_carlo", "--budget", "20000", "--seed", "9")
    _, first, _ = run(capsys, *mc)
    _, second, _ = run(capsys, *mc)
    assert first == second
