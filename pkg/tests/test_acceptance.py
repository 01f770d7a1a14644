"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]`` / ``[FAIL]`` line (visible even under
output capture) and then asserts.  Criterion 10 is slow and only runs with
``DIFFCOH_SLOW=1``.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

import pytest

from diffcoh import bigprobe, diffop, fsing, hypervanish, projcoh
from diffcoh.cli import main as cli_main
from diffcoh.polyring import RingSpec

# frozen values observed with the tool; see the decisions ledger
F5_FIRST_ORDER = 9  # minimal m with (D^m)_{-1} != 0 on F5[x,y,z,w]/(x^3+y^3+z^3+w^3)
F5_FIRST_DIM = 20


@pytest.fixture
def report(capsys):
    def emit(label, ok: bool, detail: str):
        name = f"criterion {label}" if isinstance(label, int) else label
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, detail
    return emit


def test_c01_bgg_cone(ring, report):
    spec = ring("bgg")
    t = time.perf_counter()
    rep = diffop.negative_degree_scan(spec, 5, -3)
    took = time.perf_counter() - t
    ok = all(v == 0 for v in rep.grid.values()) and len(rep.grid) == 15 and took < 120
    report(1, ok, f"BGG cone: all 15 cells (m<=5, -3<=e<=-1) zero, {took:.1f}s (< 120s)")


def test_c02_fermat_cubic_surface(ring, report):
    spec = ring("fermat4")
    t = time.perf_counter()
    exact = diffop.negative_degree_scan(spec, 4, -3)
    t_exact = time.perf_counter() - t
    t = time.perf_counter()
    modular = diffop.negative_degree_scan(spec, 4, -3, method="multimodular")
    t_mod = time.perf_counter() - t
    ok = (all(v == 0 for v in exact.grid.values()) and exact.grid == modular.grid
          and t_exact < 1200 and t_mod < 300)
    report(2, ok, f"Fermat cubic surface cone: 12 cells zero; exact {t_exact:.1f}s (< 1200s), "
                  f"multimodular {t_mod:.1f}s (< 300s)")


def test_c03_quadric_positive_control(ring, report):
    spec = ring("quadric")
    t = time.perf_counter()
    rep = diffop.negative_degree_scan(spec, 3, -1)
    cell = rep.first_nonzero
    replay = False
    if cell is not None:
        space = diffop.graded_operator_space(spec, *cell)
        op = space.basis[0]
        replay = diffop.replay_ideal_preservation(spec, op, n_samples=20, max_degree=4, seed=0)
    took = time.perf_counter() - t
    ok = cell is not None and cell[0] <= 3 and replay and took < 300
    report(3, ok, f"quadric cone: first nonzero cell {cell}, dim {rep.grid.get(cell)}; "
                  f"witness replay on 20 products {'ok' if replay else 'FAILED'}; {took:.1f}s")


CORPUS = {
    "k[x0]": RingSpec.from_strings("Q", ["x0"], []),
    "k[x0,x1]": RingSpec.from_strings("Q", ["x0", "x1"], []),
    "k[x0..x2]": RingSpec.from_strings("Q", ["x0", "x1", "x2"], []),
    "k[x0..x3]": RingSpec.from_strings("Q", ["x0", "x1", "x2", "x3"], []),
    "k[x0..x4]": RingSpec.from_strings("Q", ["x0", "x1", "x2", "x3", "x4"], []),
}


def test_c04_euler_operator(ring, report):
    specs = dict(CORPUS)
    for name in ("bgg", "fermat4", "quadric", "two_quadrics", "fermat4_f5"):
        specs[name] = ring(name)
    failures = []
    for name, spec in specs.items():
        space = diffop.graded_operator_space(spec, 1, 0)
        euler = diffop.euler_operator(spec.nvars, spec.field)
        if space.dim < 1 or not diffop.in_span_modulo_ideal(spec, euler, space):
            failures.append(name)
    report(4, not failures, f"Euler operator in (D^1)_0 for {len(specs)} specs"
                            + (f"; failed: {failures}" if failures else ""))


def test_c05_projective_space_grid(report):
    t = time.perf_counter()
    bad = []
    count = 0
    for n in (3, 4, 5):
        for m in range(1, 7):
            for e in range(-10, 11):
                h = projcoh.sym_omega_cohomology(n, m, e).h
                count += 1
                if e < m + 1 and h[0]:
                    bad.append(("h0", n, m, e))
                if e < m - 1 and h[1]:
                    bad.append(("h1", n, m, e))
                if any(h[i] for i in range(2, n)):
                    bad.append(("middle", n, m, e))
                if sum((-1) ** i * x for i, x in enumerate(h)) != projcoh.omega_euler_characteristic(n, m, e):
                    bad.append(("chi", n, m, e))
                if not projcoh.serre_dual_pair_agrees(n, m, e):
                    bad.append(("serre", n, m, e))
    took = time.perf_counter() - t
    ok = not bad and took < 600
    report(5, ok, f"{count} tables on P^3..P^5: vanishing ranges, Euler characteristic and "
                  f"Serre duality hold, {took:.1f}s (< 600s)" + (f"; violations {bad[:5]}" if bad else ""))


def test_c06_cubic_surface_certificates(tmp_path, report):
    t = time.perf_counter()
    status = cli_main(["vanish", "--ambient", "3", "--degree", "3", "--sym-max", "20",
                       "--out", str(tmp_path / "v")])
    summary = (tmp_path / "v" / "summary.txt").read_text()
    replayed = 0
    for path in sorted((tmp_path / "v" / "certificates").glob("*.json")):
        doc = json.loads(path.read_text())
        if "rule" in doc:
            hypervanish.replay_certificate(doc)
            replayed += 1
    quadric_unknown = all(not hypervanish.sym_tangent_h0(2, m).certified for m in range(1, 21))
    took = time.perf_counter() - t
    ok = (status == 0 and "certified for m = 1..20" in summary and replayed == 20
          and quadric_unknown and took < 120)
    report(6, ok, f"cubic surface: {replayed}/20 certificates replayed; quadric Unknown for all "
                  f"m <= 20: {quadric_unknown}; {took:.1f}s (< 120s)")


def test_c07_cross_module(ring, report):
    q = bigprobe.bigness_evidence(ring("quadric"), 1, 3, degree_zero=False)
    q_ok, q_rows = bigprobe.cross_check(q)
    jump = q.found[1]
    node = hypervanish.sym_tangent_twist_h0(2, jump[0], -1) if jump else None
    f = bigprobe.bigness_evidence(ring("fermat4"), 3, 4, degree_zero=False)
    f_ok, f_rows = bigprobe.cross_check(f)
    all_cert = all(r.hypervanish == hypervanish.CERTIFIED for r in f_rows)
    ok = (jump is not None and node is not None and not node.certified and q_ok
          and f.verdict == bigprobe.NO_NEGATIVE and f_ok and all_cert)
    report(7, ok, f"quadric jump {jump} at e=1 with chase {node.verdict if node else None}; "
                  f"Fermat cubic: no jump for m<=4, e<=3, {len(f_rows)} nodes Certified-Zero={all_cert}")


def test_c08_oracle_agreement(ring, report):
    t = time.perf_counter()
    mismatches = []
    cells = 0
    for name in ("bgg", "quadric"):
        spec = ring(name)
        for m in range(3):
            for e in range(-2, 2):
                got = diffop.operator_dim(spec, m, e)
                ref, _ = diffop.stabilized_oracle(spec, m, e)
                cells += 1
                if got != ref:
                    mismatches.append((name, m, e, got, ref))
    took = time.perf_counter() - t
    ok = not mismatches and took < 600
    report(8, ok, f"oracle agrees on {cells - len(mismatches)}/{cells} cells, {took:.1f}s (< 600s)")


def test_c09_fedder_sweep(report):
    t = time.perf_counter()
    primes = [p for p in range(5, 38) if all(p % q for q in range(2, p))]
    verdicts = fsing.sweep("x^3+y^3+z^3", ["x", "y", "z"], primes)
    pattern = all(v.f_pure == (v.p % 3 == 1) for v in verdicts)
    witnesses = all(fsing.verify_witness(v) for v in verdicts)
    took = time.perf_counter() - t
    ok = pattern and witnesses and took < 60
    report(9, ok, f"x^3+y^3+z^3 over {len(primes)} primes 5..37: F-pure iff p = 1 mod 3 "
                  f"({pattern}), witnesses re-verify ({witnesses}), {took:.2f}s")


@pytest.mark.slow
def test_c10_char5_contrast(ring, report):
    spec = ring("fermat4_f5")
    t = time.perf_counter()
    first = None
    dims = {}
    for m in range(1, 11):
        dims[m] = diffop.operator_dim(spec, m, -1, unknowns="standard")
        if first is None and dims[m] > 0:
            first = m
    replay = None
    if first is not None:
        space = diffop.graded_operator_space(spec, first, -1, unknowns="standard")
        op = space.basis[0]
        replay = (diffop.replay_ideal_preservation(spec, op, n_samples=20, max_degree=12, seed=0)
                  and diffop.replay_well_defined(spec, op, n_samples=10, max_degree=10, seed=0)
                  and diffop.first_nonzero_value(spec, op, 12) is not None
                  # the other unknown basis must see the same jump
                  and diffop.operator_dim(spec, first, -1, unknowns="weyl") == dims[first]
                  and diffop.operator_dim(spec, first - 1, -1, unknowns="weyl") == 0)
    took = time.perf_counter() - t
    completed = len(dims) == 10 and took < 3600
    ok = completed and (first is None or replay)
    outcome = (f"first operator of degree -1 at order {first} (dim {dims.get(first)}), "
               f"witness replay {'ok' if replay else 'FAILED'}" if first
               else "no operator of degree -1 up to order 10 (bounded search)")
    report(10, ok, f"F5 Fermat cubic surface cone, e=-1, m<=10 in {took:.0f}s (< 3600s): {outcome}")
    # frozen observation, checked separately so a change is visible
    assert (first, dims.get(first)) == (F5_FIRST_ORDER, F5_FIRST_DIM)


def test_x4_one_sided_inequality(ring, report):
    # not a numbered criterion: the degree-4 del Pezzo check that replaces the
    # unreachable dimension count
    spec = ring("two_quadrics")
    d1 = diffop.operator_dim(spec, 1, 0)
    d2 = diffop.operator_dim(spec, 2, 0)
    with_note = f"dim D^2_0 - dim D^1_0 = {d2} - {d1} = {d2 - d1} <= 2"
    ok = d2 - d1 <= 2
    report("X4 inequality", ok, f"two-quadric surface: {with_note}")


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(pytest.main([str(Path(__file__)), "-q"]))
