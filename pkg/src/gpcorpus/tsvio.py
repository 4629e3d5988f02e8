"""Escaping and row iteration for the package's TSV file formats.

All files are UTF-8 with LF line endings. ``#``-prefixed lines are comments
and blank lines are skipped. Free-text fields escape backslash, tab, newline
and carriage return so a record always stays on one physical line.
"""

from __future__ import annotations

from typing import Iterator

from .errors import FormatError

_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}


def escape_field(value: str) -> str:
    for raw, esc in _ESCAPES.items():
        value = value.replace(raw, esc)
    return value


def unescape_field(value: str) -> str:
    out = []
    i = 0
    while i < len(value):
        c = value[i]
        if c == "\\" and i + 1 < len(value):
            nxt = value[i + 1]
            mapped = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt)
            if mapped is not None:
                out.append(mapped)
                i += 2
                continue
        out.append(c)
        i += 1
    return "".join(out)


def iter_rows(path) -> Iterator[tuple[int, list[str]]]:
    """Yield (line_no, columns) for every data line of a TSV file."""
    with open(path, encoding="utf-8", newline="") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line or line.startswith("#"):
                continue
            yield line_no, line.split("\t")


def require_columns(path, line_no: int, columns: list[str], expected: int) -> list[str]:
    if len(columns) != expected:
        raise FormatError(
            path, line_no, f"expected {expected} tab-separated columns, got {len(columns)}"
        )
    return columns
