"""Rectangular table model and its two pipe-delimited text views.

The same grid feeds both the plain view (for direct answering) and the
spreadsheet view with column letters and row numbers (for formula
generation and execution). Tables are immutable after construction.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from sheetqa.cells import CellValue, coerce_cell, empty_cell
from sheetqa.refs import MAX_COLS, BadReference, index_to_col, parse_a1

MARKDOWN = "markdown"
CSV = "csv"
JSON_GRID = "json-grid"

FORMATS = (MARKDOWN, CSV, JSON_GRID)


class UnparseableSource(ValueError):
    """Source text does not parse as the declared format."""


class EmptyTable(ValueError):
    """Zero rows or zero columns."""


class TooManyColumns(ValueError):
    """More columns than two-letter spreadsheet labels can address."""


class OutOfBounds(IndexError):
    """Coordinate outside the grid."""


@dataclass(frozen=True)
class Table:
    """Immutable rectangular grid of typed cells.

    ``data_row_span`` is the inclusive 1-based range of data rows; it
    defaults to everything below the header rows and is the hook for
    excluding known summary ("Total") rows.
    """

    title: str
    cells: tuple[tuple[CellValue, ...], ...]
    header_rows: int = 0
    data_row_span: tuple[int, int] = field(default=(0, 0))

    def __post_init__(self):
        if not self.cells or not self.cells[0]:
            raise EmptyTable("table must have at least one row and one column")
        width = len(self.cells[0])
        for i, row in enumerate(self.cells):
            if len(row) != width:
                raise ValueError(f"row {i + 1} has {len(row)} cells, expected {width}")
        if self.header_rows < 0 or self.header_rows >= len(self.cells):
            raise ValueError(f"header_rows {self.header_rows} out of range")
        if self.data_row_span == (0, 0):
            object.__setattr__(
                self, "data_row_span", (self.header_rows + 1, len(self.cells))
            )
        start, end = self.data_row_span
        if not (1 <= start <= end <= len(self.cells)):
            raise ValueError(f"data_row_span {self.data_row_span} out of range")

    @property
    def n_rows(self) -> int:
        return len(self.cells)

    @property
    def n_cols(self) -> int:
        return len(self.cells[0])

    def cell(self, row: int, col: int) -> CellValue:
        """Cell at 1-based (row, col)."""
        if not (1 <= row <= self.n_rows and 1 <= col <= self.n_cols):
            raise OutOfBounds(f"({row}, {col}) outside {self.n_rows}x{self.n_cols} grid")
        return self.cells[row - 1][col - 1]

    @classmethod
    def from_rows(
        cls,
        rows: list[list[str]],
        title: str = "",
        header_rows: int = 0,
        data_row_span: tuple[int, int] | None = None,
    ) -> "Table":
        """Build a table from raw string rows; ragged rows are padded."""
        if not rows or not any(len(r) for r in rows):
            raise EmptyTable("no rows or no columns in source")
        width = max(len(r) for r in rows)
        grid = tuple(
            tuple(coerce_cell(v) for v in row) + tuple(empty_cell() for _ in range(width - len(row)))
            for row in rows
        )
        return cls(title, grid, header_rows, data_row_span or (0, 0))


def parse_table(
    source: str,
    format: str = MARKDOWN,
    title: str = "",
    header_rows: int = 0,
    data_row_span: tuple[int, int] | None = None,
) -> Table:
    """Parse markdown, CSV, or a JSON grid into a Table.

    Cells pass through coercion; ragged rows are padded with empty cells.
    """
    if format == MARKDOWN:
        rows = _parse_markdown(source)
    elif format == CSV:
        rows = _parse_csv(source)
    elif format == JSON_GRID:
        return _parse_json_grid(source, title, header_rows, data_row_span)
    else:
        raise UnparseableSource(f"unknown table format: {format!r}")
    return Table.from_rows(rows, title=title, header_rows=header_rows, data_row_span=data_row_span)


def _parse_markdown(source: str) -> list[list[str]]:
    rows = []
    for lineno, line in enumerate(source.split("\n"), start=1):
        if not line.strip():
            continue
        stripped = line.strip()
        if not (stripped.startswith("|") and stripped.endswith("|") and len(stripped) >= 2):
            raise UnparseableSource(f"line {lineno} is not a pipe-delimited row: {line!r}")
        cells = stripped[1:-1].split("|")
        # GitHub-style alignment separator directly under the first row.
        if lineno == 2 and rows and all(_is_md_separator(c) for c in cells):
            continue
        rows.append(cells)
    if not rows:
        raise UnparseableSource("no table rows in markdown source")
    return rows


def _is_md_separator(cell: str) -> bool:
    c = cell.strip()
    return len(c) >= 3 and set(c) <= {"-", ":"} and "-" in c


def _parse_csv(source: str) -> list[list[str]]:
    try:
        rows = [row for row in csv.reader(io.StringIO(source)) if row]
    except csv.Error as exc:
        raise UnparseableSource(f"bad csv: {exc}") from exc
    if not rows:
        raise UnparseableSource("no table rows in csv source")
    return rows


def _parse_json_grid(
    source: str, title: str, header_rows: int, data_row_span: tuple[int, int] | None
) -> Table:
    try:
        payload = json.loads(source)
    except json.JSONDecodeError as exc:
        raise UnparseableSource(f"bad json: {exc}") from exc
    if not isinstance(payload, dict) or "cells" not in payload:
        raise UnparseableSource("json grid must be an object with a 'cells' key")
    cells = payload["cells"]
    if not isinstance(cells, list) or any(not isinstance(r, list) for r in cells):
        raise UnparseableSource("'cells' must be a list of rows")
    rows = [[_json_value_to_raw(v) for v in row] for row in cells]
    span = data_row_span
    if span is None and "data_row_span" in payload:
        span = tuple(payload["data_row_span"])
    return Table.from_rows(
        rows,
        title=payload.get("title", title) or title,
        header_rows=payload.get("header_rows", header_rows),
        data_row_span=span,
    )


def _json_value_to_raw(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float) and value == int(value):
        return str(int(value))
    return str(value)


def render_plain(table: Table) -> str:
    """Pipe-delimited rows with raw cell text, no coordinate labels."""
    return "\n".join("|" + "|".join(c.raw for c in row) + "|" for row in table.cells)


def render_spreadsheet(table: Table) -> str:
    """Pipe-delimited view with a column-label header and row numbers.

    First line is ``|0|A|B|...|``; body rows carry their 1-based number.
    """
    if table.n_cols > MAX_COLS:
        raise TooManyColumns(f"{table.n_cols} columns exceed label limit {MAX_COLS}")
    lines = ["|0|" + "|".join(index_to_col(i) for i in range(1, table.n_cols + 1)) + "|"]
    for num, row in enumerate(table.cells, start=1):
        lines.append(f"|{num}|" + "|".join(c.raw for c in row) + "|")
    return "\n".join(lines)


def cell_at(table: Table, ref: str) -> CellValue:
    """Cell at an A1 coordinate such as ``B4``."""
    col, row = parse_a1(ref)
    if not (1 <= row <= table.n_rows and 1 <= col <= table.n_cols):
        raise OutOfBounds(f"{ref} outside {table.n_rows}x{table.n_cols} grid")
    return table.cells[row - 1][col - 1]


def load_table_file(path: str, format: str | None = None, **options) -> Table:
    """Load a table from a file, inferring the format from the extension."""
    if format is None:
        lowered = path.lower()
        if lowered.endswith((".md", ".markdown")):
            format = MARKDOWN
        elif lowered.endswith(".csv"):
            format = CSV
        elif lowered.endswith(".json"):
            format = JSON_GRID
        else:
            raise UnparseableSource(f"cannot infer table format from path: {path}")
    with open(path, encoding="utf-8") as fh:
        return parse_table(fh.read(), format=format, **options)


__all__ = [
    "Table",
    "parse_table",
    "render_plain",
    "render_spreadsheet",
    "cell_at",
    "load_table_file",
    "UnparseableSource",
    "EmptyTable",
    "TooManyColumns",
    "OutOfBounds",
    "BadReference",
    "MARKDOWN",
    "CSV",
    "JSON_GRID",
]
