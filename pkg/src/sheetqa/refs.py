"""A1-style coordinate helpers: column letters, cell refs, range refs."""

from __future__ import annotations

import re

_A1_RE = re.compile(r"([A-Za-z]{1,3})([1-9][0-9]*)")

MAX_COLS = 702  # two-letter labels: A..Z, AA..ZZ


class BadReference(ValueError):
    """Malformed A1 coordinate or range."""


def col_to_index(label: str) -> int:
    """Column letters to 1-based index: A=1, Z=26, AA=27."""
    if not label or not label.isalpha():
        raise BadReference(f"bad column label: {label!r}")
    index = 0
    for ch in label.upper():
        index = index * 26 + (ord(ch) - ord("A") + 1)
    return index


def index_to_col(index: int) -> str:
    """1-based column index to letters: 1=A, 26=Z, 27=AA."""
    if index < 1:
        raise BadReference(f"bad column index: {index}")
    label = ""
    while index > 0:
        index, rem = divmod(index - 1, 26)
        label = chr(ord("A") + rem) + label
    return label


def parse_a1(ref: str) -> tuple[int, int]:
    """Parse ``B4`` into (col, row), both 1-based."""
    m = _A1_RE.fullmatch(ref.strip())
    if not m:
        raise BadReference(f"bad cell reference: {ref!r}")
    return col_to_index(m.group(1)), int(m.group(2))


def format_a1(col: int, row: int) -> str:
    return f"{index_to_col(col)}{row}"
