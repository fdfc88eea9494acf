import json

import pytest

import neargroup
from commons.mgr_archive import bundled_path


def _run_json(capsys, *argv):
    code = neargroup.run(list(argv) + ["--json"])
    return code, json.loads(capsys.readouterr().out)


def _main_exit(*argv):
    with pytest.raises(SystemExit) as err:
        neargroup.main(list(argv))
    return err.value.code


def test_forms_z2(capsys):
    code, payload = _run_json(capsys, "forms", "Z2")
    assert code == 0
    assert payload["group"] == {"factors": [2]}
    assert len(payload["classes"]) == 1
    forms = payload["classes"][0]["forms"]
    assert forms
    for form in forms:
        re, im = form["gauss_sum"]
        assert abs(re * re + im * im - 1) < 1e-12
        assert len(form["c_choices"]) == 3


def test_verify_bundled(capsys):
    code, payload = _run_json(capsys, "verify", "z2_m2")
    assert code == 0
    assert payload["passed"]
    assert payload["m"] == 2
    assert abs(payload["d_value"] - 2.732050807568877) < 1e-12


def test_verify_with_oracle(capsys):
    code, payload = _run_json(capsys, "verify", "z2_m2", "--oracle")
    assert code == 0
    assert set(payload["reports"]) == {"residual", "tuple", "oracle"}
    assert all(r["passed"] for r in payload["reports"].values())


def test_verify_failing_file_exits_one(tmp_path, capsys):
    with open(bundled_path("z3_m3"), "r", encoding="utf-8") as f:
        doc = json.load(f)
    doc["b"][1][1] = [0.9, 0.0]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    code, payload = _run_json(capsys, "verify", str(path))
    assert code == 1
    assert not payload["passed"]


def test_verify_text_output(capsys):
    code = neargroup.run(["verify", "z5_m5"])
    out = capsys.readouterr().out
    assert code == 0
    assert "Pass" in out
    assert "Elapsed Time" in out


def test_graph(tmp_path, capsys):
    dot = tmp_path / "graph.dot"
    code, payload = _run_json(capsys, "graph", "Z3", "2", "--dot", str(dot))
    assert code == 0
    assert abs(payload["norm_squared"] - payload["expected_norm_squared"]) < 1e-9
    assert dot.read_text(encoding="utf-8").startswith("graph ")


def test_indicators(capsys):
    code, payload = _run_json(capsys, "indicators", "z2_m2")
    assert code == 0
    assert payload["solution"] == "Z2 m=2"
    assert payload["nu21"] in (1, -1)


def test_out_z5(capsys):
    code, payload = _run_json(capsys, "out", "z5_m5")
    assert code == 0
    assert payload["order"] == 2
    assert payload["type"] == "Z2"


def test_dequiv_z2z2(capsys):
    code, payload = _run_json(capsys, "dequiv", "z2z2_m4", "--subgroup", "<(1,1)>")
    assert code == 0
    assert len(payload["ring"]["labels"]) == 4


def test_equiv_gamma_contains(capsys):
    code, payload = _run_json(capsys, "equiv", "z3_m6", "--gamma", "d8", "--contains", "Z2xZ2xZ3", "12")
    assert code == 0
    assert len(payload["ring"]["labels"]) == 20
    assert payload["contains"]["found"]


def test_equiv_involution(capsys):
    code, payload = _run_json(capsys, "equiv", "z5_m5", "--aut", "neg")
    assert code == 0
    assert "ρ" in payload["ring"]["labels"]


def test_export_and_verify(tmp_path, capsys):
    out = tmp_path / "z3.json"
    code, payload = _run_json(capsys, "export", "z3_m3", "--out", str(out))
    assert code == 0
    assert payload["file"] == str(out)
    code, payload = _run_json(capsys, "verify", str(out))
    assert code == 0 and payload["passed"]


def test_export_tuple(tmp_path, capsys):
    out = tmp_path / "z2_tuple.json"
    code, _ = _run_json(capsys, "export", "z2_m2", "--tuple", "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["m"] == 2 and doc["n"] == 2


@pytest.mark.parametrize("argv, code", [
    (["solve", "Z2", "3"], 2),
    (["classify", "Z3", "0"], 2),
    (["forms", "Q8"], 2),
    (["verify", "no_such_solution"], 2),
    (["dequiv", "z2z2_m4", "--subgroup", "<(1,0)>"], 2),
    (["dequiv", "z2z2_m4", "--subgroup", "<(1,1)>", "--group", "Z4"], 2),
    (["equiv", "z3_m6", "--gamma", "no_such_gamma"], 2),
    (["forms", "Z128"], 3),
    (["verify", "z2z2z3_m12", "--oracle"], 3),
    (["verify", "z2_m2"], 0),
])
def test_exit_codes(argv, code, capsys):
    assert _main_exit(*argv) == code


def test_no_command_prints_help(capsys):
    assert neargroup.run([]) == 2
    assert "usage" in capsys.readouterr().out


def test_show_config(capsys):
    assert neargroup.run(["--show-config"]) == 0
    out = capsys.readouterr().out
    assert "default.conf" in out
    assert "tolerance" in out
