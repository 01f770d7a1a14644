from __future__ import annotations

import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from diffcoh.cli import main

RINGS = Path(__file__).resolve().parents[1] / "rings"


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    status = main([*argv, "--out", str(out)])
    manifest = json.loads((out / "manifest.json").read_text())
    return status, out, manifest


def rows(path):
    return list(csv.reader(io.StringIO(path.read_text())))


def test_ops_fermat_grid(tmp_path):
    status, out, man = run(tmp_path, "ops", "--ring", str(RINGS / "fermat4.ring"), "--order-max", "3",
                           "--degree-min", "-3", "--degree-max", "1")
    assert status == 0 and man["exit_status"] == 0 and man["field"] == "Q"
    table = rows(out / "grid.csv")
    assert table[0] == ["m", "e=-3", "e=-2", "e=-1", "e=0", "e=1"]
    assert all(r[1:4] == ["0", "0", "0"] for r in table[1:])
    assert [r[4] for r in table[1:]] == ["1", "2", "3", "4"]


def test_vanish_cubic(tmp_path, capsys):
    status, out, man = run(tmp_path, "vanish", "--ambient", "3", "--degree", "3", "--sym-max", "20")
    assert status == 0
    assert "H^0(X, Sym^m T_X) = 0 certified for m = 1..20" in (out / "summary.txt").read_text()
    assert len(list((out / "certificates").glob("*.json"))) == 20
    assert "certified for m = 1..20" in capsys.readouterr().out


def test_vanish_twisted_omega(tmp_path):
    status, out, _ = run(tmp_path, "vanish", "--ambient", "4", "--degree", "3", "--sym-max", "2",
                         "--twist", "1")
    assert status == 0
    assert [r[2] for r in rows(out / "verdicts.csv")[1:]] == ["Certified-Zero", "Certified-Zero"]


def test_fedder_table(tmp_path):
    status, out, _ = run(tmp_path, "fedder", "--poly", "x^3+y^3+z^3", "--primes", "5,7,11,13")
    assert status == 0
    assert [r[1] for r in rows(out / "verdicts.csv")[1:]] == ["false", "true", "false", "true"]


def test_fedder_prime_range(tmp_path):
    status, out, _ = run(tmp_path, "fedder", "--poly", "x^3+y^3+z^3", "--primes", "5-37")
    assert status == 0
    assert [int(r[0]) for r in rows(out / "verdicts.csv")[1:]] == [5, 7, 11, 13, 17, 19, 23, 29, 31, 37]


def test_pn_coh_and_formats(tmp_path):
    args = ["pn-coh", "--ambient", "3", "--sym-max", "2", "--twist-min", "-1", "--twist-max", "2"]
    status, out, _ = run(tmp_path, *args, "--format", "record")
    doc = json.loads((out / "cohomology.json").read_text())
    assert status == 0 and doc["columns"][:4] == ["n", "bundle", "m", "e"]
    hit = [r for r in doc["rows"] if r["m"] == 1 and r["e"] == 2]
    assert hit[0]["h0"] == 6
    status, out, _ = run(tmp_path, *args, "--format", "pretty", name="pretty")
    assert status == 0 and "SymOmega" in (out / "cohomology.txt").read_text()
    status, out, _ = run(tmp_path, "pn-coh", "--ambient", "3", "--bundle", "line", "--twist-min", "-4",
                         "--twist-max", "-4", name="line")
    assert rows(out / "cohomology.csv")[1][4:8] == ["0", "0", "0", "1"]


def test_big_probe_and_oracle(tmp_path):
    status, out, _ = run(tmp_path, "big-probe", "--ring", str(RINGS / "quadric.ring"), "--e-max", "1",
                         "--order-max", "3")
    assert status == 0 and rows(out / "report.csv")[1] == ["1", "true", "2", "4", "3"]
    status, out, _ = run(tmp_path, "oracle", "--ring", str(RINGS / "bgg.ring"), "--order-max", "1",
                         "--degree-min", "-1", "--degree-max", "0", name="oracle")
    assert status == 0 and all(r[5] == "true" for r in rows(out / "comparison.csv")[1:])


def test_input_errors_exit_1_with_manifest(tmp_path):
    bad = tmp_path / "bad.ring"
    bad.write_text('field = "Q"\nvars = ["x", "y"]\nrelations = ["x^2 + y"]\n')
    status, out, man = run(tmp_path, "ops", "--ring", str(bad), "--order-max", "1", "--degree-min", "-1",
                           "--degree-max", "0")
    assert status == 1 and man["exit_status"] == 1
    assert "3:15" in man["error"] and "degrees 2 and 1" in man["error"]
    status, _, man = run(tmp_path, "ops", "--ring", str(RINGS / "bgg.ring"), "--order-max", "33",
                         "--degree-min", "-1", "--degree-max", "0", name="cap")
    assert status == 1 and "order-max" in man["error"]
    status, _, man = run(tmp_path, "vanish", "--degree", "3", "--sym-max", "65", name="sym")
    assert status == 1
    status, _, man = run(tmp_path, "fedder", "--poly", "x^2", "--primes", "4", name="prime")
    assert status == 1 and "not a prime" in man["error"]


def test_outputs_are_byte_identical(tmp_path):
    for argv in (["ops", "--ring", str(RINGS / "quadric.ring"), "--order-max", "2", "--degree-min", "-1",
                  "--degree-max", "1", "--format", "record"],
                 ["vanish", "--degree", "3", "--sym-max", "5"]):
        _, a, man_a = run(tmp_path, *argv, name="a")
        _, b, man_b = run(tmp_path, *argv, name="b")
        for name, digest in man_a["artifacts"].items():
            assert (a / name).read_bytes() == (b / name).read_bytes()
            assert man_b["artifacts"][name] == digest


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "diffcoh", "fedder", "--poly", "x", "--primes", "2,3",
                           "--out", str(tmp_path / "m")], capture_output=True, text=True)
    assert proc.returncode == 0
    assert (tmp_path / "m" / "manifest.json").exists()


def test_out_is_a_file(tmp_path):
    f = tmp_path / "file"
    f.write_text("x")
    assert main(["fedder", "--poly", "x", "--primes", "2", "--out", str(f)]) == 1


def test_invariant_violation_exit_2(tmp_path, monkeypatch):
    from diffcoh import cli
    from diffcoh.errors import InvariantViolation

    def broken(*a, **k):
        raise InvariantViolation("kernel check failed")

    monkeypatch.setattr(cli.diffop, "compute_grid", broken)
    status, _, man = run(tmp_path, "ops", "--ring", str(RINGS / "bgg.ring"), "--order-max", "1",
                         "--degree-min", "-1", "--degree-max", "0")
    assert status == 2 and man["exit_status"] == 2 and "kernel check failed" in man["error"]
