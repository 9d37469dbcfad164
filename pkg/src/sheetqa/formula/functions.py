"""Built-in spreadsheet function registry.

The set covers lookups, the conditional *IF/*IFS family, logical, text, and
date helpers. Aggregators skip non-numeric cells; MIN/MAX/AVERAGE (and their
conditional variants) over an empty numeric selection return #N/A instead of
silently yielding 0. The registry is frozen at import time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Callable

from sheetqa.cells import (
    BOOLEAN,
    DATE,
    EMPTY,
    NUMBER,
    CellValue,
    bool_cell,
    number_cell,
    parse_date,
    parse_number,
    text_cell,
)
from sheetqa.formula.criteria import Criterion, criterion_from_cell, match_criteria
from sheetqa.formula.values import (
    NA,
    REF,
    VALUE,
    FormulaError,
    Grid,
    cell_truthy,
    compare_values,
    equality_key,
    iter_cells,
    to_bool,
    to_number,
    to_text,
)


@dataclass(frozen=True)
class FunctionSpec:
    name: str
    min_arity: int
    max_arity: int | None  # None = unbounded
    impl: Callable
    lazy: bool = False  # lazy impls receive unevaluated arg nodes + context


def _scalar(value, what: str = "argument") -> CellValue:
    """Require a scalar; a 1x1 grid collapses, anything larger is a misuse."""
    if isinstance(value, Grid):
        if len(value.values) == 1:
            return value.values[0]
        raise FormulaError(VALUE, f"{what} must be a single value")
    return value


def _as_grid(value) -> Grid:
    if isinstance(value, Grid):
        return value
    return Grid((value,), 1, 1)


def _int_of(value, what: str = "argument") -> int:
    return int(to_number(_scalar(value, what)))


def _numeric_cells(args) -> list[tuple[float, CellValue]]:
    """Numeric selection across all args: numbers by value, dates by ordinal;
    text, booleans, and blanks are skipped."""
    out = []
    for arg in args:
        for cell in iter_cells(arg):
            if cell.kind == NUMBER:
                out.append((cell.number_value, cell))
            elif cell.kind == DATE:
                out.append((float(cell.date_value.toordinal()), cell))
    return out


def _criteria_pairs(args) -> list[tuple[list[CellValue], Criterion]]:
    if len(args) % 2 != 0:
        raise FormulaError(VALUE, "criteria arguments must come in range/criterion pairs")
    pairs = []
    for i in range(0, len(args), 2):
        cells = iter_cells(args[i])
        crit = criterion_from_cell(_scalar(args[i + 1], "criterion"))
        pairs.append((cells, crit))
    return pairs


def _matching_rows(pairs, length: int) -> list[int]:
    for cells, _ in pairs:
        if len(cells) != length:
            raise FormulaError(VALUE, "criteria ranges must have matching sizes")
    return [
        i
        for i in range(length)
        if all(match_criteria(cells[i], crit) for cells, crit in pairs)
    ]


def _pick(values: list[tuple[float, CellValue]], want_min: bool) -> CellValue:
    if not values:
        raise FormulaError(NA, "empty numeric selection")
    best_num, best_cell = values[0]
    for num, cell in values[1:]:
        if (num < best_num) if want_min else (num > best_num):
            best_num, best_cell = num, cell
    return best_cell


def _fn_min(args, ctx):
    return _pick(_numeric_cells(args), want_min=True)


def _fn_max(args, ctx):
    return _pick(_numeric_cells(args), want_min=False)


def _fn_sum(args, ctx):
    return number_cell(math.fsum(num for num, _ in _numeric_cells(args)))


def _fn_average(args, ctx):
    nums = [num for num, _ in _numeric_cells(args)]
    if not nums:
        raise FormulaError(NA, "AVERAGE of empty selection")
    return number_cell(math.fsum(nums) / len(nums))


def _fn_count(args, ctx):
    return number_cell(float(len(_numeric_cells(args))))


def _fn_counta(args, ctx):
    n = sum(1 for arg in args for cell in iter_cells(arg) if cell.kind != EMPTY)
    return number_cell(float(n))


def _fn_countif(args, ctx):
    cells = iter_cells(args[0])
    crit = criterion_from_cell(_scalar(args[1], "criterion"))
    return number_cell(float(sum(1 for c in cells if match_criteria(c, crit))))


def _fn_countifs(args, ctx):
    pairs = _criteria_pairs(args)
    rows = _matching_rows(pairs, len(pairs[0][0]))
    return number_cell(float(len(rows)))


def _conditional_selection(target_cells, pairs) -> list[tuple[float, CellValue]]:
    rows = _matching_rows(pairs, len(target_cells))
    return [
        (
            target_cells[i].number_value
            if target_cells[i].kind == NUMBER
            else float(target_cells[i].date_value.toordinal()),
            target_cells[i],
        )
        for i in rows
        if target_cells[i].kind in (NUMBER, DATE)
    ]


def _fn_sumif(args, ctx):
    crit_cells = iter_cells(args[0])
    crit = criterion_from_cell(_scalar(args[1], "criterion"))
    target = iter_cells(args[2]) if len(args) == 3 else crit_cells
    selected = _conditional_selection(target, [(crit_cells, crit)])
    return number_cell(math.fsum(num for num, _ in selected))


def _fn_sumifs(args, ctx):
    target = iter_cells(args[0])
    selected = _conditional_selection(target, _criteria_pairs(args[1:]))
    return number_cell(math.fsum(num for num, _ in selected))


def _fn_averageif(args, ctx):
    crit_cells = iter_cells(args[0])
    crit = criterion_from_cell(_scalar(args[1], "criterion"))
    target = iter_cells(args[2]) if len(args) == 3 else crit_cells
    selected = _conditional_selection(target, [(crit_cells, crit)])
    if not selected:
        raise FormulaError(NA, "no cells match AVERAGEIF criteria")
    return number_cell(math.fsum(num for num, _ in selected) / len(selected))


def _fn_averageifs(args, ctx):
    target = iter_cells(args[0])
    selected = _conditional_selection(target, _criteria_pairs(args[1:]))
    if not selected:
        raise FormulaError(NA, "no cells match AVERAGEIFS criteria")
    return number_cell(math.fsum(num for num, _ in selected) / len(selected))


def _fn_minifs(args, ctx):
    target = iter_cells(args[0])
    return _pick(_conditional_selection(target, _criteria_pairs(args[1:])), want_min=True)


def _fn_maxifs(args, ctx):
    target = iter_cells(args[0])
    return _pick(_conditional_selection(target, _criteria_pairs(args[1:])), want_min=False)


def _fn_unique(args, ctx):
    seen = set()
    out = []
    for cell in iter_cells(args[0]):
        key = equality_key(cell)
        if key not in seen:
            seen.add(key)
            out.append(cell)
    return Grid.column(out)


def _fn_index(args, ctx):
    grid = _as_grid(args[0])
    first = _int_of(args[1], "INDEX row")
    if len(args) == 3:
        row, col = first, _int_of(args[2], "INDEX column")
    elif grid.n_cols == 1:
        row, col = first, 1
    elif grid.n_rows == 1:
        row, col = 1, first
    else:
        raise FormulaError(REF, "INDEX on a 2-D range needs both row and column")
    if not (1 <= row <= grid.n_rows and 1 <= col <= grid.n_cols):
        raise FormulaError(REF, "INDEX position outside the range")
    return grid.values[(row - 1) * grid.n_cols + (col - 1)]


def _fn_match(args, ctx):
    lookup = _scalar(args[0], "MATCH value")
    cells = iter_cells(args[1])
    match_type = _int_of(args[2], "MATCH type") if len(args) == 3 else 1
    if match_type == 0:
        crit = criterion_from_cell(lookup)
        for i, cell in enumerate(cells):
            if match_criteria(cell, crit):
                return number_cell(float(i + 1))
        raise FormulaError(NA, "MATCH found no exact match")
    # Approximate: largest value <= lookup (1) or smallest >= lookup (-1),
    # by linear scan; no sortedness assumption. First position wins ties.
    best_pos, best_cell = None, None
    for i, cell in enumerate(cells):
        if cell.kind == EMPTY:
            continue
        side = compare_values(cell, lookup)
        qualifies = side <= 0 if match_type > 0 else side >= 0
        if not qualifies:
            continue
        if best_cell is None:
            best_pos, best_cell = i + 1, cell
            continue
        against_best = compare_values(cell, best_cell)
        if (match_type > 0 and against_best > 0) or (match_type < 0 and against_best < 0):
            best_pos, best_cell = i + 1, cell
    if best_pos is None:
        raise FormulaError(NA, "MATCH found no qualifying value")
    return number_cell(float(best_pos))


def _fn_filter(args, ctx):
    source = iter_cells(args[0])
    include = iter_cells(args[1])
    if len(include) != len(source):
        raise FormulaError(VALUE, "FILTER include array size mismatch")
    kept = [cell for cell, flag in zip(source, include) if cell_truthy(flag)]
    if kept:
        return Grid.column(kept)
    if len(args) == 3:
        return _scalar(args[2], "FILTER if_empty")
    raise FormulaError(NA, "FILTER produced no rows")


def _fn_if(nodes, ctx):
    cond = to_bool(_scalar(ctx.eval(nodes[0]), "IF condition"))
    if cond:
        return ctx.eval(nodes[1])
    if len(nodes) == 3:
        return ctx.eval(nodes[2])
    return bool_cell(False)


def _fn_iferror(nodes, ctx):
    try:
        return ctx.eval(nodes[0])
    except FormulaError:
        return ctx.eval(nodes[1])


def _logical_stream(args) -> list[bool]:
    flags = []
    for arg in args:
        if isinstance(arg, Grid):
            # Ranges contribute only their boolean and numeric cells.
            flags.extend(
                to_bool(c) for c in arg.values if c.kind in (BOOLEAN, NUMBER)
            )
        else:
            flags.append(to_bool(arg))
    if not flags:
        raise FormulaError(VALUE, "no logical values")
    return flags


def _fn_and(args, ctx):
    return bool_cell(all(_logical_stream(args)))


def _fn_or(args, ctx):
    return bool_cell(any(_logical_stream(args)))


def _fn_not(args, ctx):
    return bool_cell(not to_bool(_scalar(args[0], "NOT argument")))


def _fn_abs(args, ctx):
    return number_cell(abs(to_number(_scalar(args[0], "ABS argument"))))


def _round_half_away(value: float, digits: int) -> float:
    quantum = Decimal(1).scaleb(-digits)
    return float(Decimal(str(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def _fn_round(args, ctx):
    value = to_number(_scalar(args[0], "ROUND value"))
    digits = _int_of(args[1], "ROUND digits") if len(args) == 2 else 0
    return number_cell(_round_half_away(value, digits))


def _fn_rows(args, ctx):
    return number_cell(float(_as_grid(args[0]).n_rows))


def _fn_columns(args, ctx):
    return number_cell(float(_as_grid(args[0]).n_cols))


def _fn_concatenate(args, ctx):
    return text_cell("".join(to_text(c) for arg in args for c in iter_cells(arg)))


def _count_arg(args, index: int, default: int) -> int:
    n = _int_of(args[index], "length") if len(args) > index else default
    if n < 0:
        raise FormulaError(VALUE, "negative length")
    return n


def _fn_left(args, ctx):
    text = to_text(_scalar(args[0], "LEFT text"))
    return text_cell(text[: _count_arg(args, 1, 1)])


def _fn_right(args, ctx):
    text = to_text(_scalar(args[0], "RIGHT text"))
    n = _count_arg(args, 1, 1)
    return text_cell(text[-n:] if n else "")


def _fn_mid(args, ctx):
    text = to_text(_scalar(args[0], "MID text"))
    start = _int_of(args[1], "MID start")
    length = _count_arg(args, 2, 0)
    if start < 1:
        raise FormulaError(VALUE, "MID start must be >= 1")
    return text_cell(text[start - 1 : start - 1 + length])


def _fn_len(args, ctx):
    return number_cell(float(len(to_text(_scalar(args[0], "LEN text")))))


def _fn_value(args, ctx):
    cell = _scalar(args[0], "VALUE argument")
    if cell.kind == NUMBER:
        return cell
    if cell.kind == DATE:
        return number_cell(float(cell.date_value.toordinal()))
    number = parse_number(to_text(cell))
    if number is not None:
        return number_cell(number)
    date = parse_date(to_text(cell))
    if date is not None:
        return number_cell(float(date.toordinal()))
    raise FormulaError(VALUE, f"VALUE cannot parse {to_text(cell)!r}")


def _fn_text(args, ctx):
    cell = _scalar(args[0], "TEXT value")
    fmt = to_text(_scalar(args[1], "TEXT format"))
    if cell.kind == DATE:
        return text_cell(cell.date_value.isoformat())
    number = to_number(cell)
    if fmt.endswith("%"):
        decimals = _format_decimals(fmt[:-1])
        rounded = _round_half_away(number * 100, decimals)
        return text_cell(f"{rounded:.{decimals}f}%")
    decimals = _format_decimals(fmt)
    rounded = _round_half_away(number, decimals)
    if "," in fmt:
        return text_cell(f"{rounded:,.{decimals}f}")
    return text_cell(f"{rounded:.{decimals}f}")


def _format_decimals(fmt: str) -> int:
    if "." in fmt:
        return len(fmt.split(".", 1)[1].replace("#", "0"))
    return 0


def _date_component(args, picker, what: str):
    cell = _scalar(args[0], what)
    if cell.kind == DATE:
        return number_cell(float(picker(cell.date_value)))
    date = parse_date(to_text(cell))
    if date is None:
        raise FormulaError(VALUE, f"{what} needs a date")
    return number_cell(float(picker(date)))


def _fn_year(args, ctx):
    return _date_component(args, lambda d: d.year, "YEAR")


def _fn_month(args, ctx):
    return _date_component(args, lambda d: d.month, "MONTH")


def _fn_day(args, ctx):
    return _date_component(args, lambda d: d.day, "DAY")


def _spec(name, lo, hi, impl, lazy=False):
    return FunctionSpec(name, lo, hi, impl, lazy)


REGISTRY: dict[str, FunctionSpec] = {
    spec.name: spec
    for spec in (
        _spec("MIN", 1, None, _fn_min),
        _spec("MAX", 1, None, _fn_max),
        _spec("SUM", 1, None, _fn_sum),
        _spec("AVERAGE", 1, None, _fn_average),
        _spec("COUNT", 1, None, _fn_count),
        _spec("COUNTA", 1, None, _fn_counta),
        _spec("COUNTIF", 2, 2, _fn_countif),
        _spec("COUNTIFS", 2, None, _fn_countifs),
        _spec("SUMIF", 2, 3, _fn_sumif),
        _spec("SUMIFS", 3, None, _fn_sumifs),
        _spec("AVERAGEIF", 2, 3, _fn_averageif),
        _spec("AVERAGEIFS", 3, None, _fn_averageifs),
        _spec("MINIFS", 3, None, _fn_minifs),
        _spec("MAXIFS", 3, None, _fn_maxifs),
        _spec("UNIQUE", 1, 1, _fn_unique),
        _spec("INDEX", 2, 3, _fn_index),
        _spec("MATCH", 2, 3, _fn_match),
        _spec("FILTER", 2, 3, _fn_filter),
        _spec("IF", 2, 3, _fn_if, lazy=True),
        _spec("IFERROR", 2, 2, _fn_iferror, lazy=True),
        _spec("AND", 1, None, _fn_and),
        _spec("OR", 1, None, _fn_or),
        _spec("NOT", 1, 1, _fn_not),
        _spec("ABS", 1, 1, _fn_abs),
        _spec("ROUND", 1, 2, _fn_round),
        _spec("ROWS", 1, 1, _fn_rows),
        _spec("COLUMNS", 1, 1, _fn_columns),
        _spec("CONCATENATE", 1, None, _fn_concatenate),
        _spec("LEFT", 1, 2, _fn_left),
        _spec("RIGHT", 1, 2, _fn_right),
        _spec("MID", 3, 3, _fn_mid),
        _spec("LEN", 1, 1, _fn_len),
        _spec("VALUE", 1, 1, _fn_value),
        _spec("TEXT", 2, 2, _fn_text),
        _spec("YEAR", 1, 1, _fn_year),
        _spec("MONTH", 1, 1, _fn_month),
        _spec("DAY", 1, 1, _fn_day),
    )
}


def function_names() -> tuple[str, ...]:
    return tuple(sorted(REGISTRY))


def get_function(name: str) -> FunctionSpec | None:
    return REGISTRY.get(name.upper())
