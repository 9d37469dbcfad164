"""Formula evaluation against a Table.

Evaluation is pure: the same (ast, table) pair always produces the same
EvalResult, and failures surface as typed error results rather than
exceptions, so batches of model-generated formulas can run unattended.
"""

from __future__ import annotations

from sheetqa.cells import CellValue, bool_cell, canonical_text, number_cell, text_cell
from sheetqa.formula.functions import get_function
from sheetqa.formula.nodes import (
    Binary,
    BoolLit,
    CellRef,
    FuncCall,
    Node,
    NumberLit,
    RangeRef,
    TextLit,
    Unary,
)
from sheetqa.formula.parser import (
    FormulaParseError,
    UnknownFunction,
    parse_formula,
)
from sheetqa.formula.values import (
    DIV0,
    NAME,
    REF,
    UNSUPPORTED,
    VALUE,
    EvalResult,
    FormulaError,
    Grid,
    compare_values,
    to_number,
    to_text,
)
from sheetqa.table import Table

_COMPARISON_OK = {
    "=": (0,),
    "<>": (-1, 1),
    "<": (-1,),
    "<=": (-1, 0),
    ">": (1,),
    ">=": (0, 1),
}


class _Evaluator:
    def __init__(self, table: Table):
        self.table = table

    def eval(self, node: Node):
        if isinstance(node, NumberLit):
            return number_cell(node.value)
        if isinstance(node, TextLit):
            return text_cell(node.value)
        if isinstance(node, BoolLit):
            return bool_cell(node.value)
        if isinstance(node, CellRef):
            return self._cell(node.col, node.row)
        if isinstance(node, RangeRef):
            return self._range(node)
        if isinstance(node, Unary):
            return self._unary(node)
        if isinstance(node, Binary):
            return self._binary(node)
        if isinstance(node, FuncCall):
            return self._call(node)
        raise FormulaError(UNSUPPORTED, f"cannot evaluate {node!r}")

    def _cell(self, col: int, row: int) -> CellValue:
        if not (1 <= row <= self.table.n_rows and 1 <= col <= self.table.n_cols):
            raise FormulaError(REF, f"reference outside the table: col {col}, row {row}")
        return self.table.cells[row - 1][col - 1]

    def _range(self, ref: RangeRef) -> Grid:
        if not (
            1 <= ref.start_row
            and ref.end_row <= self.table.n_rows
            and 1 <= ref.start_col
            and ref.end_col <= self.table.n_cols
        ):
            raise FormulaError(REF, "range outside the table")
        values = tuple(
            self.table.cells[r - 1][c - 1]
            for r in range(ref.start_row, ref.end_row + 1)
            for c in range(ref.start_col, ref.end_col + 1)
        )
        return Grid(values, ref.end_row - ref.start_row + 1, ref.end_col - ref.start_col + 1)

    def _unary(self, node: Unary):
        operand = self.eval(node.operand)
        if node.op == "+":
            return operand
        if isinstance(operand, Grid):
            return Grid(
                tuple(number_cell(-to_number(c)) for c in operand.values),
                operand.n_rows,
                operand.n_cols,
            )
        return number_cell(-to_number(operand))

    def _binary(self, node: Binary):
        left = self.eval(node.left)
        right = self.eval(node.right)
        if isinstance(left, Grid) or isinstance(right, Grid):
            return self._elementwise(node.op, left, right)
        return _binary_scalar(node.op, left, right)

    def _elementwise(self, op: str, left, right) -> Grid:
        lg, rg = _as_grid(left), _as_grid(right)
        if (lg.n_rows, lg.n_cols) != (rg.n_rows, rg.n_cols):
            if len(lg.values) == 1:
                lg = Grid(lg.values * len(rg.values), rg.n_rows, rg.n_cols)
            elif len(rg.values) == 1:
                rg = Grid(rg.values * len(lg.values), lg.n_rows, lg.n_cols)
            else:
                raise FormulaError(VALUE, "array size mismatch")
        values = tuple(
            _binary_scalar(op, a, b) for a, b in zip(lg.values, rg.values)
        )
        return Grid(values, lg.n_rows, lg.n_cols)

    def _call(self, node: FuncCall):
        spec = get_function(node.name)
        if spec is None:
            raise FormulaError(NAME, f"unknown function {node.name}")
        if spec.lazy:
            return spec.impl(node.args, self)
        args = [self.eval(arg) for arg in node.args]
        return spec.impl(args, self)


def _as_grid(value) -> Grid:
    return value if isinstance(value, Grid) else Grid((value,), 1, 1)


def _binary_scalar(op: str, a: CellValue, b: CellValue) -> CellValue:
    if op in ("+", "-", "*", "/", "^"):
        x, y = to_number(a), to_number(b)
        if op == "+":
            return number_cell(x + y)
        if op == "-":
            return number_cell(x - y)
        if op == "*":
            return number_cell(x * y)
        if op == "/":
            if y == 0:
                raise FormulaError(DIV0, "division by zero")
            return number_cell(x / y)
        try:
            result = x**y
        except ZeroDivisionError:
            raise FormulaError(DIV0, "zero to a negative power") from None
        except (OverflowError, ValueError):
            raise FormulaError(VALUE, "invalid exponentiation") from None
        if isinstance(result, complex):
            raise FormulaError(VALUE, "complex result")
        return number_cell(result)
    if op == "&":
        return text_cell(to_text(a) + to_text(b))
    if op in _COMPARISON_OK:
        return bool_cell(compare_values(a, b) in _COMPARISON_OK[op])
    raise FormulaError(UNSUPPORTED, f"unknown operator {op!r}")


def evaluate(ast: Node, table: Table) -> EvalResult:
    """Evaluate one parsed formula; errors become EvalResult errors."""
    try:
        out = _Evaluator(table).eval(ast)
    except FormulaError as exc:
        return EvalResult.error(exc.code)
    if isinstance(out, Grid):
        return EvalResult.array(out.values)
    return EvalResult.scalar(out)


def execute_all(src: str, table: Table) -> list[EvalResult]:
    """Parse and evaluate every formula fragment in ``src``.

    A parse failure yields one error result for the whole input; evaluation
    failures are per-fragment. Never raises.
    """
    try:
        asts = parse_formula(src)
    except UnknownFunction:
        return [EvalResult.error(NAME)]
    except FormulaParseError:
        return [EvalResult.error(UNSUPPORTED)]
    return [evaluate(ast, table) for ast in asts]


def format_result(results) -> str | None:
    """Join results into the ``|``-separated answer string.

    Returns None when any result is an error: the candidate is invalid but
    nothing is raised.
    """
    results = list(results)
    if not results:
        raise ValueError("format_result needs at least one result")
    parts: list[str] = []
    for result in results:
        if result.is_error:
            return None
        if result.kind == "scalar":
            parts.append(canonical_text(result.value))
        else:
            parts.extend(canonical_text(v) for v in result.values)
    return "|".join(parts)


def first_error(results) -> str | None:
    """Error code of the first failed result, or None."""
    for result in results:
        if result.is_error:
            return result.error_code
    return None
