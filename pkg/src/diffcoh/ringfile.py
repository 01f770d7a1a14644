"""Ring files: a small TOML document describing a graded quotient ring.

::

    field = "Q"                 # or "F5", "F7", ...
    vars = ["x", "y", "z", "w"]
    relations = ["x^3 + y^3 + z^3 + w^3"]
    assert_smooth_proj = true   # optional, default false
    weights = [1, 1, 1, 1]      # optional; only all-ones is accepted

Every error message carries a 1-based line and column.
"""

from __future__ import annotations

import re
import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .errors import InputError
from .polyring import PolyParseError, RingSpec, parse_field, parse_poly

KNOWN_KEYS = {"field", "vars", "relations", "assert_smooth_proj", "weights", "name"}


class RingFileError(InputError):
    def __init__(self, message: str, line: int, column: int, path: str | None = None):
        where = f"{path}:" if path else ""
        super().__init__(f"{where}{line}:{column}: {message}")
        self.line = line
        self.column = column


def _locate(text: str, key: str) -> tuple[int, int]:
    m = re.search(rf"^\s*{re.escape(key)}\s*=", text, re.MULTILINE)
    if not m:
        return 1, 1
    start = m.start() + len(m.group(0)) - len(m.group(0).lstrip())
    line = text.count("\n", 0, start) + 1
    return line, start - (text.rfind("\n", 0, start) + 1) + 1


def _locate_string(text: str, value: str, after_key: str) -> tuple[int, int]:
    """Position of the first character inside the quoted literal ``value``."""
    key_line, _ = _locate(text, after_key)
    offset = sum(len(s) for s in text.splitlines(keepends=True)[: key_line - 1])
    for quote in ('"', "'"):
        i = text.find(quote + value + quote, offset)
        if i >= 0:
            i += 1
            line = text.count("\n", 0, i) + 1
            return line, i - (text.rfind("\n", 0, i) + 1) + 1
    return key_line, 1


def _toml_position(err: Exception) -> tuple[int, int]:
    m = re.search(r"line (\d+), column (\d+)", str(err))
    if m:
        return int(m.group(1)), int(m.group(2))
    return getattr(err, "lineno", 1) or 1, getattr(err, "colno", 1) or 1


def parse_ring_text(text: str, path: str | None = None) -> RingSpec:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        line, col = _toml_position(err)
        msg = getattr(err, "msg", None) or re.sub(r"\s*\(at line.*\)$", "", str(err))
        raise RingFileError(f"not a valid ring file: {msg}", line, col, path) from None

    def fail(message, key):
        raise RingFileError(message, *_locate(text, key), path)

    for key in data:
        if key not in KNOWN_KEYS:
            fail(f"unknown key {key!r}", key)
    for key in ("field", "vars"):
        if key not in data:
            raise RingFileError(f"missing required key {key!r}", 1, 1, path)
    if not isinstance(data["field"], str):
        fail("field must be a string such as \"Q\" or \"F5\"", "field")
    try:
        field = parse_field(data["field"])
    except ValueError as err:
        fail(str(err), "field")
    names = data["vars"]
    if not isinstance(names, list) or not names or not all(isinstance(v, str) for v in names):
        fail("vars must be a non-empty list of names", "vars")
    for v in names:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", v):
            fail(f"invalid variable name {v!r}", "vars")
    if len(set(names)) != len(names):
        fail("duplicate variable names", "vars")
    weights = data.get("weights", [1] * len(names))
    if not isinstance(weights, list) or len(weights) != len(names):
        fail("weights must list one integer per variable", "weights")
    if any(w != 1 for w in weights):
        fail("non-standard weights are not supported: every variable must have weight 1", "weights")
    smooth = data.get("assert_smooth_proj", False)
    if not isinstance(smooth, bool):
        fail("assert_smooth_proj must be true or false", "assert_smooth_proj")
    rel_texts = data.get("relations", [])
    if not isinstance(rel_texts, list) or not all(isinstance(r, str) for r in rel_texts):
        fail("relations must be a list of strings", "relations")
    rels = []
    for r in rel_texts:
        try:
            rels.append(parse_poly(r, names, field))
        except PolyParseError as err:
            line, col = _locate_string(text, r, "relations")
            pos = err.position or 0
            raise RingFileError(f"relation {r!r}: {err}", line, col + pos, path) from None
    try:
        return RingSpec(field, tuple(names), tuple(rels), smooth)
    except ValueError as err:
        fail(str(err), "relations")


def load_ring(path: str | Path) -> RingSpec:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as err:
        raise InputError(f"cannot read ring file {p}: {err.strerror}") from None
    return parse_ring_text(text, str(p))
