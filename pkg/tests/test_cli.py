import csv
import io
import json
import subprocess
import sys

import pytest

from teichcount import cli
from teichcount.surface import builtin_origami, save_surface


def run(capsys, *argv):
    rc = cli.main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_surface_validate_builtin(capsys):
    rc, out, _ = run(capsys, "surface", "validate", "L3")
    assert rc == 0 and out


def test_surface_from_file(tmp_path, capsys):
    p = tmp_path / "s.json"
    save_surface(builtin_origami("H11"), p)
    rc, out, _ = run(capsys, "surface", "systole", str(p))
    assert rc == 0


def test_missing_file_is_input_error(capsys):
    rc, _, err = run(capsys, "surface", "validate", "/nonexistent.json")
    assert rc == cli.EXIT_INPUT and err


def test_malformed_json_line(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "kind": "abelian",\n  oops\n}\n')
    rc, _, err = run(capsys, "surface", "validate", str(p))
    assert rc == cli.EXIT_INPUT
    assert "line 3" in err


def test_bad_config(tmp_path, capsys):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"seed": 1, "bogus": 2}))
    rc, _, err = run(capsys, "count", "--config", str(p), "--genus", "2", "--s", "1,1,1", "--L", "1")
    assert rc == cli.EXIT_INPUT and "bogus" in err


def test_count_csv(capsys):
    rc, out, _ = run(capsys, "count", "--genus", "2", "--s", "1,1,1", "--L", "2")
    assert rc == 0
    assert out.splitlines()[0] == "L,E,G,E_over_G_L_dim"
    assert rows(out)[0]["E"] == "171"
    assert "\r" not in out


def test_cocycle_invariant_failure(capsys):
    rc, _, err = run(capsys, "cocycle", "matrix", "--surface", "L3", "--linear", "2,0,0,1")
    assert rc == cli.EXIT_INVARIANT and err


def test_cocycle_svd(capsys):
    rc, out, _ = run(capsys, "cocycle", "svd", "--surface", "L3", "--t", "0.5")
    assert rc == 0


def test_delaunay_and_lemma(capsys):
    assert run(capsys, "delaunay", "check", "L3")[0] == 0
    assert run(capsys, "delaunay", "lemma", "--samples", "3")[0] == 0


def test_distance_and_twist(capsys):
    assert run(capsys, "distance", "--x", "1,1,1", "--y", "2,1,0.5")[0] == 0
    assert run(capsys, "twist-orbit", "--x", "1,1,1", "--y0", "1,1,1", "--R", "1")[0] == 0


def test_open_up_log(tmp_path, capsys):
    log = tmp_path / "log.csv"
    rc, out, _ = run(capsys, "open-up", "--surface", "L3", "--epsilon", "0.5", "--log", str(log))
    assert rc == 0


def test_jacobian_verify_all_pass(capsys):
    rc, out, _ = run(capsys, "jacobian-verify", "--m", "4", "--samples", "4")
    assert rc == 0
    r = rows(out)
    assert {x["name"] for x in r} >= {"vandermonde_signed", "chain_rule", "period_jacobian",
                                     "residue_quadratic_constant", "collision_sweep"}
    assert all(x["pass"] == "true" for x in r)


def test_jobs_do_not_change_output(capsys):
    argv = ["jacobian-verify", "--m", "3", "--samples", "6", "--seed", "7"]
    a = run(capsys, *argv)[1]
    b = run(capsys, *argv, "--jobs", "2")[1]
    c = run(capsys, *argv)[1]
    assert a == b == c


def test_out_file(tmp_path, capsys):
    p = tmp_path / "out.csv"
    rc, _, _ = run(capsys, "lambda", "--s", "1,1,1", "--L0", "4", "--doublings", "2", "--out", str(p))
    assert rc == 0
    assert p.read_text().startswith("L")


def test_console_script_and_module():
    r = subprocess.run([sys.executable, "-m", "teichcount", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "jacobian-verify" in r.stdout


def test_usage_error_is_input_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["count", "--genus", "2"])
    assert exc.value.code == cli.EXIT_INPUT
