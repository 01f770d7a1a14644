"""Command-line front end.

Every run writes its artifacts plus ``manifest.json`` into ``--out``.  The
manifest is written even when the run fails with an input error.  Exit codes:
0 success, 1 bad input, 2 internal invariant violated.

CSV schemas
-----------
ops        ``m,e=<lo>,...,e=<hi>``: one row per order, one column per degree
pn-coh     ``n,bundle,m,e,h0,...,h<n>,euler_char``
vanish     ``m,twist,verdict,leaves,certificate``
big-probe  ``e,found,m,jump,searched_up_to``
fedder     ``prime,f_pure,witness,coefficient``
oracle     ``m,e,graded_operator_space,oracle,d_cap,agree``
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import platform
import re
import sys
import tempfile
import time
from pathlib import Path

from . import __version__, bigprobe, diffop, fsing, hypervanish, projcoh
from .errors import InputError, InvariantViolation
from .exactlinalg import is_prime
from .ringfile import load_ring

ORDER_CAP = 32
SYM_CAP = 64
TWIST_CAP = 256
FORMATS = ("csv", "record", "pretty")
EXT = {"csv": ".csv", "record": ".json", "pretty": ".txt"}


# ---------------------------------------------------------------------------
# output helpers


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def to_pretty(header, rows) -> str:
    cells = [[str(h) for h in header]] + [["" if c is None else str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def to_record(header, rows, extra=None) -> str:
    doc = {"columns": list(header), "rows": [dict(zip(header, r)) for r in rows]}
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


class Run:
    """Collects artifacts for one invocation."""

    def __init__(self, args):
        self.args = args
        self.out = Path(args.out)
        self.artifacts: dict[str, str] = {}
        self.fmt = args.format

    def write(self, name: str, text: str) -> Path:
        path = self.out / name
        atomic_write(path, text)
        self.artifacts[name] = hashlib.sha256(text.encode()).hexdigest()
        return path

    def table(self, stem: str, header, rows, extra=None) -> str:
        if self.fmt == "csv":
            text = to_csv(header, rows)
        elif self.fmt == "record":
            text = to_record(header, rows, extra)
        else:
            text = to_pretty(header, rows)
        self.write(stem + EXT[self.fmt], text)
        return text


def _config_echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def write_manifest(out: Path, args, status: int, elapsed: float, artifacts: dict,
                   field: str | None, error: str | None) -> None:
    doc = {
        "tool": "diffcoh",
        "version": __version__,
        "python": platform.python_version(),
        "command": args.command,
        "config": _config_echo(args),
        "field": field,
        "exit_status": status,
        "error": error,
        "artifacts": dict(sorted(artifacts.items())),
        "timing_seconds": round(elapsed, 3),
    }
    atomic_write(out / "manifest.json", json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")


# ---------------------------------------------------------------------------
# validation


def _cap(name: str, value: int, lo: int, hi: int) -> None:
    if not lo <= value <= hi:
        raise InputError(f"--{name} must lie in [{lo}, {hi}], got {value}")


def _primes(text: str) -> list[int]:
    """Explicit entries are kept as given; a range ``a-b`` contributes its primes."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part or ".." in part:
            a, b = (int(x) for x in re.split(r"-|\.\.", part, maxsplit=1))
            if b > 1000:
                raise InputError(f"prime {b} exceeds the supported bound 1000")
            out.extend(p for p in range(a, b + 1) if p > 1 and is_prime(p))
        else:
            out.append(int(part))
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_ops(run: Run):
    a = run.args
    _cap("order-max", a.order_max, 0, ORDER_CAP)
    if a.degree_min > a.degree_max:
        raise InputError("--degree-min exceeds --degree-max")
    spec = load_ring(a.ring)
    run.field = spec.field.name
    degrees = list(range(a.degree_min, a.degree_max + 1))
    cells = [(m, e) for m in range(a.order_max + 1) for e in degrees]
    grid = diffop.compute_grid(spec, cells, method=a.method, unknowns=a.unknowns, workers=a.workers)
    header = ["m"] + [f"e={e}" for e in degrees]
    rows = [[m] + [grid[(m, e)] for e in degrees] for m in range(a.order_max + 1)]
    neg = [(m, e) for (m, e), v in sorted(grid.items()) if e < 0 and v > 0]
    return run.table("grid", header, rows, {"first_negative_cell": neg[0] if neg else None})


def cmd_pn_coh(run: Run):
    a = run.args
    _cap("ambient", a.ambient, 1 if a.bundle == "line" else 2, 64)
    _cap("sym-max", a.sym_max, 1, SYM_CAP)
    _cap("twist-min", a.twist_min, -TWIST_CAP, TWIST_CAP)
    _cap("twist-max", a.twist_max, a.twist_min, TWIST_CAP)
    n = a.ambient
    run.field = "Q"
    rows = []
    for e in range(a.twist_min, a.twist_max + 1):
        if a.bundle == "line":
            tables = [projcoh.line_cohomology(n, e)]
        else:
            fn = projcoh.sym_omega_cohomology if a.bundle == "omega" else projcoh.sym_tangent_cohomology
            tables = [fn(n, m, e) for m in range(1, a.sym_max + 1)]
        for t in tables:
            rows.append([n, t.bundle, t.m, t.e, *t.h, t.euler_char])
    rows.sort(key=lambda r: (r[2], r[3]))
    header = ["n", "bundle", "m", "e"] + [f"h{i}" for i in range(n + 1)] + ["euler_char"]
    return run.table("cohomology", header, rows)


def cmd_vanish(run: Run):
    a = run.args
    _cap("sym-max", a.sym_max, 1, SYM_CAP)
    _cap("degree", a.degree, 1, 64)
    run.field = "Q"
    tangent = a.twist is None
    if tangent and a.ambient != 3:
        raise InputError("the tangent-bundle chase needs --ambient 3; pass --twist for Omega_X")
    if not tangent:
        _cap("ambient", a.ambient, 3, 64)
    rows, certified = [], []
    for m in range(1, a.sym_max + 1):
        if tangent:
            verdict = hypervanish.sym_tangent_h0(a.degree, m)
            twist = m * (4 - a.degree)
        else:
            verdict = hypervanish.intrinsic_h0_vanishing(a.ambient, a.degree, m, a.twist)
            twist = a.twist
        name = f"certificates/m{m:02d}.json"
        if verdict.certified:
            leaves = hypervanish.replay_certificate(verdict.to_dict())
            run.write(name, verdict.to_json() + "\n")
            certified.append(m)
        else:
            leaves = 0
            run.write(name, json.dumps(verdict.to_dict(), indent=2, sort_keys=True) + "\n")
        rows.append([m, twist, verdict.verdict, leaves, name])
    what = "Sym^m T_X" if tangent else f"Sym^m Omega_X({a.twist})"
    if len(certified) == a.sym_max:
        line = f"H^0(X, {what}) = 0 certified for m = 1..{a.sym_max}"
    elif certified:
        line = f"H^0(X, {what}) = 0 certified for m in {certified}; other m Unknown"
    else:
        line = f"no vanishing certified for m = 1..{a.sym_max} (Unknown, not a nonvanishing claim)"
    summary = f"X: degree {a.degree} hypersurface in P^{a.ambient}\n{line}\n"
    run.write("summary.txt", summary)
    run.table("verdicts", ["m", "twist", "verdict", "leaves", "certificate"], rows)
    return summary


def cmd_big_probe(run: Run):
    a = run.args
    _cap("order-max", a.order_max, 1, ORDER_CAP)
    _cap("e-max", a.e_max, 1, ORDER_CAP)
    spec = load_ring(a.ring)
    run.field = spec.field.name
    rep = bigprobe.bigness_evidence(spec, a.e_max, a.order_max, method=a.method,
                                    workers=a.workers, degree_zero=not a.skip_degree_zero)
    rows = [[r["e"], str(r["found"]).lower(), r["m"], r["jump"], r["searched_up_to"]]
            for r in rep.rows()]
    run.table("report", ["e", "found", "m", "jump", "searched_up_to"], rows, rep.to_dict())
    text = (f"verdict: {rep.verdict}\n" + "".join(f"assumption: {s}\n" for s in rep.assumptions)
            + rep.summary() + "\n")
    run.write("summary.txt", text)
    return text


def _infer_vars(poly: str) -> list[str]:
    seen = []
    for name in re.findall(r"[A-Za-z_][A-Za-z0-9_]*", poly):
        if name not in seen:
            seen.append(name)
    return sorted(seen)


def cmd_fedder(run: Run):
    a = run.args
    primes = _primes(a.primes)
    if not primes:
        raise InputError("--primes is empty")
    for p in primes:
        if p > 1000:
            raise InputError(f"prime {p} exceeds the supported bound 1000")
        if not is_prime(p):
            raise InputError(f"{p} is not a prime")
    names = a.vars.split(",") if a.vars else _infer_vars(a.poly)
    run.field = "F_p sweep"
    verdicts = fsing.sweep(a.poly, names, primes)
    for v in verdicts:
        if not fsing.verify_witness(v):
            raise InvariantViolation(f"witness for p={v.p} failed re-verification")
    rows = [[v.p, str(v.f_pure).lower(), v.witness_text(names),
             "" if v.coefficient is None else v.coefficient] for v in verdicts]
    return run.table("verdicts", ["prime", "f_pure", "witness", "coefficient"], rows)


def cmd_oracle(run: Run):
    a = run.args
    _cap("order-max", a.order_max, 0, 4)
    if a.degree_min > a.degree_max:
        raise InputError("--degree-min exceeds --degree-max")
    spec = load_ring(a.ring)
    run.field = spec.field.name
    rows = []
    bad = []
    for m in range(a.order_max + 1):
        for e in range(a.degree_min, a.degree_max + 1):
            got = diffop.operator_dim(spec, m, e)
            ref, cap = diffop.stabilized_oracle(spec, m, e, d_cap_max=a.dcap_max)
            rows.append([m, e, got, ref, cap, str(got == ref).lower()])
            if got != ref:
                bad.append((m, e))
    text = run.table("comparison", ["m", "e", "graded_operator_space", "oracle", "d_cap", "agree"], rows)
    if bad:
        raise InvariantViolation(f"oracle disagrees on cells {bad}")
    return text


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="diffcoh", description=(
        "Graded differential operators on quotient rings and symmetric-power "
        "cohomology on projective space."))
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, default_out):
        p.add_argument("--out", default=default_out, help="output directory (default: %(default)s)")
        p.add_argument("--format", choices=FORMATS, default="csv")

    def ring(p):
        p.add_argument("--ring", required=True, help="ring file (TOML)")

    p = sub.add_parser("ops", help="dimension grid of (D^m_R)_e")
    ring(p)
    p.add_argument("--order-max", type=int, required=True)
    p.add_argument("--degree-min", type=int, required=True)
    p.add_argument("--degree-max", type=int, required=True)
    p.add_argument("--method", choices=("exact", "multimodular"), default="exact")
    p.add_argument("--unknowns", choices=("weyl", "standard"), default="weyl")
    p.add_argument("--workers", type=int, default=1)
    common(p, "out-ops")
    p.set_defaults(func=cmd_ops)

    p = sub.add_parser("pn-coh", help="cohomology tables on P^n")
    p.add_argument("--ambient", type=int, required=True, help="n in P^n")
    p.add_argument("--bundle", choices=("omega", "tangent", "line"), default="omega")
    p.add_argument("--sym-max", type=int, default=1)
    p.add_argument("--twist-min", type=int, required=True)
    p.add_argument("--twist-max", type=int, required=True)
    common(p, "out-pn-coh")
    p.set_defaults(func=cmd_pn_coh)

    p = sub.add_parser("vanish", help="vanishing certificates on a hypersurface")
    p.add_argument("--ambient", type=int, default=3)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--sym-max", type=int, required=True)
    p.add_argument("--twist", type=int, default=None,
                   help="chase Sym^m Omega_X(twist) instead of Sym^m T_X")
    common(p, "out-vanish")
    p.set_defaults(func=cmd_vanish)

    p = sub.add_parser("big-probe", help="tangent-bundle evidence from operator jumps")
    ring(p)
    p.add_argument("--e-max", type=int, required=True)
    p.add_argument("--order-max", type=int, required=True)
    p.add_argument("--method", choices=("exact", "multimodular"), default="exact")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--skip-degree-zero", action="store_true",
                   help="do not compute the degree-0 column")
    common(p, "out-big-probe")
    p.set_defaults(func=cmd_big_probe)

    p = sub.add_parser("fedder", help="Fedder F-purity sweep over primes")
    p.add_argument("--poly", required=True)
    p.add_argument("--vars", default=None, help="comma-separated names (default: sorted names in --poly)")
    p.add_argument("--primes", required=True, help="e.g. 5,7,11 or 5-37")
    common(p, "out-fedder")
    p.set_defaults(func=cmd_fedder)

    p = sub.add_parser("oracle", help="compare with the truncated-action oracle")
    ring(p)
    p.add_argument("--order-max", type=int, default=2)
    p.add_argument("--degree-min", type=int, default=-2)
    p.add_argument("--degree-max", type=int, default=1)
    p.add_argument("--dcap-max", type=int, default=14)
    common(p, "out-oracle")
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    run = Run(args)
    run.field = None
    start = time.perf_counter()
    status, error, text = 0, None, None
    try:
        out = Path(args.out)
        if out.exists() and not out.is_dir():
            raise InputError(f"--out {out} exists and is not a directory")
        text = args.func(run)
    except InvariantViolation as err:
        status, error = 2, f"invariant violated: {err}"
    except (InputError, ValueError, OSError) as err:
        status, error = 1, str(err)
    try:
        write_manifest(run.out, args, status, time.perf_counter() - start, run.artifacts,
                       run.field, error)
    except OSError as err:
        print(f"diffcoh: could not write manifest: {err}", file=sys.stderr)
        status = status or 1
    if error:
        print(f"diffcoh: error: {error}", file=sys.stderr)
    elif text is not None:
        sys.stdout.write(text if args.format == "pretty" or args.command == "vanish"
                         else f"wrote {len(run.artifacts)} artifact(s) to {run.out}\n")
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
