"""Runtime value model for formula evaluation.

Evaluation works over immutable CellValue scalars and Grid arrays; failures
travel as FormulaError exceptions and are materialized into EvalResult at
the evaluation boundary, so a bad formula can never crash a batch.
"""

from __future__ import annotations

from dataclasses import dataclass

from sheetqa.cells import (
    BOOLEAN,
    DATE,
    EMPTY,
    NUMBER,
    TEXT,
    CellValue,
    canonical_text,
    parse_number,
)

DIV0 = "DIV0"
VALUE = "VALUE"
REF = "REF"
NA = "NA"
NAME = "NAME"
UNSUPPORTED = "UNSUPPORTED"

ERROR_CODES = (DIV0, VALUE, REF, NA, NAME, UNSUPPORTED)

_ERROR_DISPLAY = {
    DIV0: "#DIV/0!",
    VALUE: "#VALUE!",
    REF: "#REF!",
    NA: "#N/A",
    NAME: "#NAME?",
    UNSUPPORTED: "#UNSUPPORTED!",
}


def error_display(code: str) -> str:
    """Spreadsheet-style display string for an error code."""
    return _ERROR_DISPLAY.get(code, f"#{code}!")


class FormulaError(Exception):
    """Evaluation failure carrying a spreadsheet error code."""

    def __init__(self, code: str, message: str = ""):
        self.code = code
        super().__init__(message or error_display(code))


@dataclass(frozen=True)
class Grid:
    """Rectangular array of cells produced by a range or array function."""

    values: tuple[CellValue, ...]
    n_rows: int
    n_cols: int

    def __post_init__(self):
        if len(self.values) != self.n_rows * self.n_cols:
            raise ValueError("grid shape does not match value count")

    @classmethod
    def column(cls, values) -> "Grid":
        vals = tuple(values)
        return cls(vals, len(vals), 1)


@dataclass(frozen=True)
class EvalResult:
    """Outcome of evaluating one formula: scalar, 1-D array, or error."""

    kind: str  # "scalar" | "array" | "error"
    value: CellValue | None = None
    values: tuple[CellValue, ...] = ()
    error_code: str | None = None

    @classmethod
    def scalar(cls, value: CellValue) -> "EvalResult":
        return cls("scalar", value=value)

    @classmethod
    def array(cls, values) -> "EvalResult":
        return cls("array", values=tuple(values))

    @classmethod
    def error(cls, code: str) -> "EvalResult":
        return cls("error", error_code=code)

    @property
    def is_error(self) -> bool:
        return self.kind == "error"


def to_number(cell: CellValue) -> float:
    """Numeric coercion: numbers as-is, booleans 1/0, dates as day ordinals,
    empty as 0, numeric-looking text parsed; anything else is a VALUE error."""
    if cell.kind == NUMBER:
        return cell.number_value
    if cell.kind == BOOLEAN:
        return 1.0 if cell.bool_value else 0.0
    if cell.kind == DATE:
        return float(cell.date_value.toordinal())
    if cell.kind == EMPTY:
        return 0.0
    number = parse_number(cell.raw)
    if number is None:
        raise FormulaError(VALUE, f"not a number: {cell.raw!r}")
    return number


def to_bool(cell: CellValue) -> bool:
    if cell.kind == BOOLEAN:
        return cell.bool_value
    if cell.kind == NUMBER:
        return cell.number_value != 0
    if cell.kind == EMPTY:
        return False
    if cell.kind == TEXT:
        lowered = cell.raw.strip().lower()
        if lowered == "true":
            return True
        if lowered == "false":
            return False
    raise FormulaError(VALUE, f"not a boolean: {cell.raw!r}")


def to_text(cell: CellValue) -> str:
    return canonical_text(cell)


def _comparison_key(cell: CellValue):
    # Spreadsheet comparison ranking: numbers (and dates) < text < booleans.
    if cell.kind == NUMBER:
        return (0, cell.number_value)
    if cell.kind == DATE:
        return (0, float(cell.date_value.toordinal()))
    if cell.kind == TEXT:
        return (1, cell.raw.strip().casefold())
    if cell.kind == BOOLEAN:
        return (2, cell.bool_value)
    return (3, None)


def _coerce_empty(cell: CellValue, other: CellValue) -> CellValue:
    """A blank compared against a typed value acts as that type's zero."""
    if cell.kind != EMPTY or other.kind == EMPTY:
        return cell
    if other.kind in (NUMBER, DATE):
        return CellValue(NUMBER, "", number_value=0.0)
    if other.kind == BOOLEAN:
        return CellValue(BOOLEAN, "", bool_value=False)
    return CellValue(TEXT, "")


def compare_values(a: CellValue, b: CellValue) -> int:
    """Total ordering over cell values: -1, 0, or 1.

    Numbers and dates share one numeric axis; text compares case-insensitively;
    cross-type values order by type rank, matching spreadsheet conventions.
    """
    a = _coerce_empty(a, b)
    b = _coerce_empty(b, a)
    ka, kb = _comparison_key(a), _comparison_key(b)
    if ka < kb:
        return -1
    if ka > kb:
        return 1
    return 0


def values_equal(a: CellValue, b: CellValue) -> bool:
    return compare_values(a, b) == 0


def equality_key(cell: CellValue):
    """Hashable key under which equal values (per compare_values) collide."""
    return _comparison_key(cell)


def iter_cells(value) -> list[CellValue]:
    """Flatten a scalar or Grid argument into a list of cells (row-major)."""
    if isinstance(value, Grid):
        return list(value.values)
    return [value]


def cell_truthy(cell: CellValue) -> bool:
    """Truthiness for include/condition arrays: blanks are false."""
    if cell.kind == EMPTY:
        return False
    return to_bool(cell)
