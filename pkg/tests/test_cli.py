import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from amodel import acceptance, cli

CONFIGS = Path(__file__).resolve().parents[1] / "demos" / "configs"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def parse(text):
    lines = text.splitlines()
    comments = [l for l in lines if l.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(l for l in lines if not l.startswith("#")))))
    return comments, rows[0], rows[1:]


def test_gram_command(capsys):
    code, out, _ = run(capsys, "gram", CONFIGS / "worked_m1.json")
    comments, header, rows = parse(out)
    assert code == 0 and header == ["key", "value"]
    assert any(c.startswith("# config_sha256=") for c in comments)
    table = dict(rows)
    assert table["admissible"] == "true"
    assert (table["signature_positive"], table["signature_negative"]) == ("1", "0")
    code, out, _ = run(capsys, "gram", CONFIGS / "identity_m2.json")
    table = dict(parse(out)[2])
    assert code == cli.EXIT_GRAM and table["admissible"] == "false"
    assert float(table["commutator_norm"]) > 0
    code, out, _ = run(capsys, "gram", CONFIGS / "sampled_m3_d2.json")
    assert code == 0 and dict(parse(out)[2])["admissible"] == "true"


def test_inadmissible_gram_blocks_weyl(capsys):
    code, _, err = run(capsys, "weyl", CONFIGS / "identity_m2.json", "--grid", "-1")
    assert code == cli.EXIT_GRAM and "commutation" in err


def test_weyl_command(capsys):
    code, out, err = run(capsys, "weyl", CONFIGS / "worked_m1.json")
    _, header, rows = parse(out)
    assert code == 0
    assert "pole exclusion zone" in err  # z = z1 = 0 is on the grid
    first = dict(zip(header, rows[0]))
    assert float(first["z_re"]) == -1
    assert float(first["M00_re"]) == pytest.approx(5 / 12, abs=1e-15)
    assert float(first["q00_re"]) == pytest.approx(-7 / 12, abs=1e-15)
    assert all(float(dict(zip(header, r))["symmetry_residual"]) < 1e-12 for r in rows)
    assert len(rows) == 3
    # 17 significant digits
    assert first["M00_re"] == format(float(first["M00_re"]), ".17g")


def test_weyl_pole_only_grid(capsys):
    code, out, err = run(capsys, "weyl", CONFIGS / "worked_m1.json", "--grid", "0,1,2")
    assert code == 0 and "empty output" in err
    assert parse(out)[2] == []


def test_spectrum_command(capsys):
    code, out, _ = run(capsys, "spectrum", CONFIGS / "tau_sweep.json")
    _, header, rows = parse(out)
    assert code == 0
    recs = [dict(zip(header, r)) for r in rows]
    assert all(r["flag"] == "ok" for r in recs)
    # branches move monotonically with tau between consecutive poles
    poles = [0, 1, 2.5, 4, 6, 7.5]
    by_tau = {}
    for r in recs:
        by_tau.setdefault(float(r["theta"].split("=")[1]), []).append(float(r["eigenvalue"]))
    taus = sorted(by_tau)
    for lo, hi in zip(poles[:-1], poles[1:]):
        branch = [next(x for x in by_tau[t] if lo < x < hi) for t in taus]
        assert np.all(np.diff(branch) < 0) or np.all(np.diff(branch) > 0)


def test_spectrum_a0_has_no_roots_off_poles(capsys):
    code, out, _ = run(capsys, "spectrum", CONFIGS / "worked_m1.json")
    recs = [dict(zip(parse(out)[1], r)) for r in parse(out)[2]]
    a0 = [r for r in recs if r["theta"] == "A0"]
    assert all(r["flag"] == "near_pole" for r in a0)
    assert code == 0


def test_spectrum_flags_disagreement(capsys, monkeypatch):
    monkeypatch.setattr(cli, "extension_eigenvalues", lambda model, theta: np.array([0.123456 + 0j]))
    code, out, _ = run(capsys, "spectrum", CONFIGS / "tau_sweep.json")
    flags = {dict(zip(parse(out)[1], r))["flag"] for r in parse(out)[2]}
    assert "oracle_mismatch" in flags and code == cli.EXIT_NUMERIC


def test_resolve_command(capsys):
    code, out, _ = run(capsys, "resolve", CONFIGS / "sampled_m3_d2.json")
    _, header, rows = parse(out)
    assert code == 0 and len(rows) == 3 * 16
    assert max(float(dict(zip(header, r))["rel_err"]) for r in rows) < 1e-8


def test_subspace_command(capsys, tmp_path):
    code, out, _ = run(capsys, "subspace", CONFIGS / "split_c1_c3.json")
    _, header, rows = parse(out)
    assert code == 0 and rows
    assert all(float(dict(zip(header, r))["additivity_residual"]) < 1e-12 for r in rows)
    full = json.loads((CONFIGS / "split_c1_c3.json").read_text())
    full["projection"] = {"indices": list(range(12))}
    p = tmp_path / "identity.json"
    p.write_text(json.dumps(full))
    code, out, _ = run(capsys, "subspace", p)
    # P = I: q- is q itself, so the residual is pure rounding
    assert code == 0 and all(float(dict(zip(parse(out)[1], r))["relative_residual"]) < 5e-16 for r in parse(out)[2])


def test_bad_projection_exit_code(capsys, tmp_path):
    cfg = json.loads((CONFIGS / "split_c1_c3.json").read_text())
    cfg["projection"] = {"blocks": [{"indices": [3, 4], "unitary": [[1, 0], [0, 1]], "rank": 1}]}
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(cfg))
    code, _, err = run(capsys, "subspace", p)
    assert code == cli.EXIT_PROJECTION and "eigenvalue" in err


def test_example_command(capsys):
    code, out, _ = run(capsys, "example", CONFIGS / "rashba.json")
    _, header, rows = parse(out)
    assert code == 0
    first = dict(zip(header, rows[0]))
    assert (first["a1"], first["a2"]) == ("1", "2")
    assert float(first["closed"]) == pytest.approx(5.730e-5, rel=1e-3)
    assert all(float(dict(zip(header, r))["rel_err"]) < 1e-4 for r in rows)
    code, out, _ = run(capsys, "example")
    assert code == 0 and len(parse(out)[2]) == 1


def test_deterministic_output(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for target in (a, b):
        assert run(capsys, "resolve", CONFIGS / "sampled_m3_d2.json", "--seed", "9", "--out", target)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    run(capsys, "resolve", CONFIGS / "sampled_m3_d2.json", "--seed", "10", "--out", b)
    assert a.read_bytes() != b.read_bytes()


def test_config_errors(capsys, tmp_path):
    assert run(capsys, "weyl", tmp_path / "missing.json")[0] == cli.EXIT_CONFIG
    assert run(capsys, "weyl")[0] == cli.EXIT_CONFIG
    p = tmp_path / "x.json"
    p.write_text(json.dumps({"operator": {"eigenvalues": [1, 2]}, "z1": 0, "m": 1}))
    assert run(capsys, "weyl", p)[0] == cli.EXIT_CONFIG


def test_selftest_plumbing(capsys, monkeypatch):
    good = [acceptance.Criterion(k, f"c{k}", True, 0.0, 1.0) for k in range(1, 10)]
    monkeypatch.setattr(acceptance, "run_all", lambda: good)
    code, out, err = run(capsys, "selftest")
    assert code == 0 and err.count("[PASS]") == 9
    bad = good[:-1] + [acceptance.Criterion(9, "c9", False, 2.0, 1.0)]
    monkeypatch.setattr(acceptance, "run_all", lambda: bad)
    code, _, err = run(capsys, "selftest")
    assert code == cli.EXIT_NUMERIC and "[FAIL]" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "amodel", "gram", str(CONFIGS / "worked_m1.json")],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and "admissible,true" in res.stdout
