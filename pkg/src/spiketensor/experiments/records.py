"""CSV emission: header row, RFC 4180 quoting, 17 significant digits, ``n/a`` for missing."""
from __future__ import annotations

import csv
import io
import math
import sys
from typing import Iterable, Optional, Sequence, TextIO

MISSING = "n/a"


def format_value(v) -> str:
    if v is None:
        return MISSING
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError(f"non-finite value {v} in record")
        return format(v, ".17g")
    if hasattr(v, "item"):  # numpy scalar
        return format_value(v.item())
    return str(v)


def write_records(rows: Iterable[dict], columns: Sequence[str], fh: TextIO) -> int:
    writer = csv.writer(fh, lineterminator="\r\n")
    writer.writerow(columns)
    n = 0
    for row in rows:
        writer.writerow([format_value(row.get(c)) for c in columns])
        n += 1
    return n


def write_csv(rows: Sequence[dict], columns: Sequence[str], path: Optional[str]) -> int:
    """Write to ``path``, or to stdout when ``path`` is None or ``-``."""
    if path in (None, "-"):
        return write_records(rows, columns, sys.stdout)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        return write_records(rows, columns, fh)


def to_csv_string(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    write_records(rows, columns, buf)
    return buf.getvalue()


def read_csv(path: str) -> list[dict]:
    """Read a file written by :func:`write_csv` back into rows of floats/ints/strings."""
    with open(path, newline="", encoding="utf-8") as fh:
        return [{k: _parse(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def _parse(v: str):
    if v == MISSING:
        return None
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v
