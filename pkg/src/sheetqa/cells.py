"""Typed cell values and coercion from raw source strings.

Coercion is total: any string maps to exactly one of number, text, boolean,
date, or empty, and the raw string is always kept verbatim so views can be
re-rendered without loss.
"""

from __future__ import annotations

import datetime
import re
from dataclasses import dataclass

NUMBER = "number"
TEXT = "text"
BOOLEAN = "boolean"
DATE = "date"
EMPTY = "empty"

KINDS = frozenset({NUMBER, TEXT, BOOLEAN, DATE, EMPTY})

_CURRENCY = "$€£"

# Plain or comma-grouped decimal, optional exponent. Comma groups must be
# well-formed (1,234 yes; 1,23 no) so ordinary text with commas stays text.
_NUMBER_RE = re.compile(
    r"[+-]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?(?:[eE][+-]?\d+)?|[+-]?\.\d+"
)

_ISO_DATE_RE = re.compile(r"\d{4}-\d{2}-\d{2}")

# "January 5, 2011" / "Jan 5, 2011" and "5 January 2011" / "5 Jan 2011"
_DATE_FORMATS = ("%B %d, %Y", "%b %d, %Y", "%d %B %Y", "%d %b %Y")


@dataclass(frozen=True)
class CellValue:
    """One table cell: a kind tag, the verbatim source string, and at most
    one typed payload matching the kind."""

    kind: str
    raw: str
    number_value: float | None = None
    date_value: datetime.date | None = None
    bool_value: bool | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown cell kind: {self.kind!r}")

    def is_numeric(self) -> bool:
        return self.kind == NUMBER

    def is_empty(self) -> bool:
        return self.kind == EMPTY


def parse_number(text: str) -> float | None:
    """Parse a spreadsheet-style numeric literal, or None.

    Strips a single leading currency symbol and a trailing percent sign
    (percent divides by 100); thousands separators must be well-grouped.
    """
    s = text.strip()
    if not s:
        return None
    percent = s.endswith("%")
    if percent:
        s = s[:-1].strip()
    sign = ""
    if s and s[0] in "+-":
        sign, s = s[0], s[1:].lstrip()
    if s and s[0] in _CURRENCY:
        s = s[1:].lstrip()
    if not s:
        return None
    if not _NUMBER_RE.fullmatch(s):
        return None
    try:
        value = float(sign + s.replace(",", ""))
    except ValueError:
        return None
    return value / 100.0 if percent else value


def parse_date(text: str) -> datetime.date | None:
    """Parse ISO-8601 or ``Month D, YYYY`` / ``D Month YYYY`` dates, or None."""
    s = text.strip()
    if _ISO_DATE_RE.fullmatch(s):
        try:
            return datetime.date.fromisoformat(s)
        except ValueError:
            return None
    for fmt in _DATE_FORMATS:
        try:
            return datetime.datetime.strptime(s, fmt).date()
        except ValueError:
            continue
    return None


def coerce_cell(raw: str) -> CellValue:
    """Coerce a raw source string to a typed CellValue.

    Total function: whitespace-only input is empty, unparseable input stays
    text. The raw string is preserved untouched in every case.
    """
    stripped = raw.strip()
    if not stripped:
        return CellValue(EMPTY, raw)
    lowered = stripped.lower()
    if lowered == "true":
        return CellValue(BOOLEAN, raw, bool_value=True)
    if lowered == "false":
        return CellValue(BOOLEAN, raw, bool_value=False)
    number = parse_number(stripped)
    if number is not None:
        return CellValue(NUMBER, raw, number_value=number)
    date = parse_date(stripped)
    if date is not None:
        return CellValue(DATE, raw, date_value=date)
    return CellValue(TEXT, raw)


def number_cell(value: float) -> CellValue:
    return CellValue(NUMBER, format_number(value), number_value=value)


def text_cell(value: str) -> CellValue:
    return CellValue(TEXT, value)


def bool_cell(value: bool) -> CellValue:
    return CellValue(BOOLEAN, "TRUE" if value else "FALSE", bool_value=value)


def date_cell(value: datetime.date) -> CellValue:
    return CellValue(DATE, value.isoformat(), date_value=value)


def empty_cell() -> CellValue:
    return CellValue(EMPTY, "")


def format_number(value: float) -> str:
    """Canonical decimal form: no trailing zeros, no thousands separators,
    shortest representation that round-trips."""
    if value != value or value in (float("inf"), float("-inf")):
        return str(value)
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def canonical_text(cell: CellValue) -> str:
    """Canonical rendering of a cell for answer comparison and output."""
    if cell.kind == NUMBER:
        return format_number(cell.number_value)
    if cell.kind == DATE:
        return cell.date_value.isoformat()
    if cell.kind == BOOLEAN:
        return "TRUE" if cell.bool_value else "FALSE"
    if cell.kind == EMPTY:
        return ""
    return cell.raw
