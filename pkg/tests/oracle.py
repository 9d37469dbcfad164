"""Independent brute-force formula interpreter used as a test oracle.

Walks the same AST node structures as the engine but shares none of its
evaluation code: values, coercion, comparison, criteria matching, and every
function are re-implemented here with plain loops, straight from the
documented semantics. Agreement between this interpreter and the engine is
the core correctness check for the formula language.
"""

from __future__ import annotations

import re
from decimal import ROUND_HALF_UP, Decimal

from sheetqa.cells import parse_date, parse_number
from sheetqa.formula.nodes import (
    Binary,
    BoolLit,
    CellRef,
    FuncCall,
    NumberLit,
    RangeRef,
    TextLit,
    Unary,
)

# Oracle value model: ("num", float) | ("text", str) | ("bool", bool)
# | ("date", date) | ("empty",) | ("array", [cells], n_rows, n_cols)


class OracleError(Exception):
    def __init__(self, code):
        self.code = code
        super().__init__(code)


def _cell_val(cell):
    if cell.kind == "number":
        return ("num", cell.number_value)
    if cell.kind == "date":
        return ("date", cell.date_value)
    if cell.kind == "boolean":
        return ("bool", cell.bool_value)
    if cell.kind == "empty":
        return ("empty",)
    return ("text", cell.raw)


def _num(val):
    tag = val[0]
    if tag == "num":
        return val[1]
    if tag == "bool":
        return 1.0 if val[1] else 0.0
    if tag == "date":
        return float(val[1].toordinal())
    if tag == "empty":
        return 0.0
    if tag == "text":
        parsed = parse_number(val[1])
        if parsed is None:
            raise OracleError("VALUE")
        return parsed
    raise OracleError("VALUE")


def _bool(val):
    tag = val[0]
    if tag == "bool":
        return val[1]
    if tag == "num":
        return val[1] != 0
    if tag == "empty":
        return False
    if tag == "text":
        lowered = val[1].strip().lower()
        if lowered == "true":
            return True
        if lowered == "false":
            return False
    raise OracleError("VALUE")


def _fmt_num(x):
    if x != x or x in (float("inf"), float("-inf")):
        return str(x)
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def _text(val):
    tag = val[0]
    if tag == "num":
        return _fmt_num(val[1])
    if tag == "date":
        return val[1].isoformat()
    if tag == "bool":
        return "TRUE" if val[1] else "FALSE"
    if tag == "empty":
        return ""
    return val[1]


def _key(val):
    tag = val[0]
    if tag == "num":
        return (0, val[1])
    if tag == "date":
        return (0, float(val[1].toordinal()))
    if tag == "text":
        return (1, val[1].strip().casefold())
    if tag == "bool":
        return (2, val[1])
    return (3, None)


def _cmp(a, b):
    if a[0] == "empty" and b[0] != "empty":
        a = {"num": ("num", 0.0), "date": ("num", 0.0), "bool": ("bool", False)}.get(
            b[0], ("text", "")
        )
    if b[0] == "empty" and a[0] != "empty":
        b = {"num": ("num", 0.0), "date": ("num", 0.0), "bool": ("bool", False)}.get(
            a[0], ("text", "")
        )
    ka, kb = _key(a), _key(b)
    return -1 if ka < kb else (1 if ka > kb else 0)


# --- criteria -------------------------------------------------------------

_COMPS = ("<>", "<=", ">=", "=", "<", ">")


def _split_criterion(text):
    for comp in _COMPS:
        if text.startswith(comp):
            rest = text[len(comp):]
            if not rest and comp not in ("=", "<>"):
                break
            return comp, rest
    return "=", text


def _criterion_of(val):
    if val[0] in ("num", "bool", "date"):
        return "=", _text(val)
    if val[0] == "empty":
        return "=", ""
    return _split_criterion(val[1])


def _wild(text, pattern):
    regex = "".join(
        ".*" if ch == "*" else "." if ch == "?" else re.escape(ch) for ch in pattern
    )
    return re.fullmatch(regex, text, re.IGNORECASE) is not None


def _ordered(comp, sign):
    table = {
        "=": (0,),
        "<>": (-1, 1),
        "<": (-1,),
        "<=": (-1, 0),
        ">": (1,),
        ">=": (0, 1),
    }
    return sign in table[comp]


def _crit_match(val, comp, operand_text):
    if not operand_text.strip():
        if comp == "=":
            return val[0] == "empty"
        if comp == "<>":
            return val[0] != "empty"
        return False
    if val[0] == "empty":
        return False

    op_num = parse_number(operand_text.strip())
    op_date = None if op_num is not None else parse_date(operand_text.strip())
    lowered = operand_text.strip().lower()
    op_bool = True if lowered == "true" else (False if lowered == "false" else None)

    if op_bool is not None and val[0] == "bool":
        sign = 0 if val[1] == op_bool else (-1 if val[1] < op_bool else 1)
        return _ordered(comp, sign)
    if op_num is not None and val[0] == "num":
        sign = 0 if val[1] == op_num else (-1 if val[1] < op_num else 1)
        return _ordered(comp, sign)
    if op_date is not None and val[0] == "date":
        sign = 0 if val[1] == op_date else (-1 if val[1] < op_date else 1)
        return _ordered(comp, sign)

    value_text = _text(val).strip()
    pattern = operand_text.strip()
    if comp in ("=", "<>") and ("*" in pattern or "?" in pattern):
        hit = _wild(value_text, pattern)
        return hit if comp == "=" else not hit
    a, b = value_text.casefold(), pattern.casefold()
    sign = 0 if a == b else (-1 if a < b else 1)
    return _ordered(comp, sign)


# --- evaluation -----------------------------------------------------------


def _cells_of(val):
    if val[0] == "array":
        return list(val[1])
    return [val]


def _numeric_sel(args):
    out = []
    for arg in args:
        for cell in _cells_of(arg):
            if cell[0] == "num":
                out.append((cell[1], cell))
            elif cell[0] == "date":
                out.append((float(cell[1].toordinal()), cell))
    return out


def _pairs(args):
    if len(args) % 2:
        raise OracleError("VALUE")
    out = []
    for i in range(0, len(args), 2):
        comp, operand = _criterion_of(_one(args[i + 1]))
        out.append((_cells_of(args[i]), comp, operand))
    return out


def _rows_matching(pairs, length):
    for cells, _, _ in pairs:
        if len(cells) != length:
            raise OracleError("VALUE")
    hits = []
    for i in range(length):
        if all(_crit_match(cells[i], comp, operand) for cells, comp, operand in pairs):
            hits.append(i)
    return hits


def _one(val):
    if val[0] == "array":
        if len(val[1]) == 1:
            return val[1][0]
        raise OracleError("VALUE")
    return val


def _round_half(x, digits):
    quantum = Decimal(1).scaleb(-digits)
    return float(Decimal(str(x)).quantize(quantum, rounding=ROUND_HALF_UP))


class Oracle:
    def __init__(self, table):
        self.table = table

    def run(self, node):
        """Evaluate to ('ok', kind, [atoms]) or ('error', code)."""
        try:
            val = self.eval(node)
        except OracleError as exc:
            return ("error", exc.code)
        if val[0] == "array":
            return ("ok", "array", [self.atom(v) for v in val[1]])
        return ("ok", "scalar", [self.atom(val)])

    @staticmethod
    def atom(val):
        if val[0] == "date":
            return ("date", val[1].isoformat())
        return val

    def eval(self, node):
        if isinstance(node, NumberLit):
            return ("num", node.value)
        if isinstance(node, TextLit):
            return ("text", node.value)
        if isinstance(node, BoolLit):
            return ("bool", node.value)
        if isinstance(node, CellRef):
            return self.cell(node.col, node.row)
        if isinstance(node, RangeRef):
            return self.range(node)
        if isinstance(node, Unary):
            return self.unary(node)
        if isinstance(node, Binary):
            return self.binary(node)
        if isinstance(node, FuncCall):
            return self.call(node)
        raise OracleError("UNSUPPORTED")

    def cell(self, col, row):
        if not (1 <= row <= self.table.n_rows and 1 <= col <= self.table.n_cols):
            raise OracleError("REF")
        return _cell_val(self.table.cells[row - 1][col - 1])

    def range(self, ref):
        if not (
            1 <= ref.start_row
            and ref.end_row <= self.table.n_rows
            and 1 <= ref.start_col
            and ref.end_col <= self.table.n_cols
        ):
            raise OracleError("REF")
        cells = [
            _cell_val(self.table.cells[r - 1][c - 1])
            for r in range(ref.start_row, ref.end_row + 1)
            for c in range(ref.start_col, ref.end_col + 1)
        ]
        return (
            "array",
            cells,
            ref.end_row - ref.start_row + 1,
            ref.end_col - ref.start_col + 1,
        )

    def unary(self, node):
        val = self.eval(node.operand)
        if node.op == "+":
            return val
        if val[0] == "array":
            return ("array", [("num", -_num(v)) for v in val[1]], val[2], val[3])
        return ("num", -_num(val))

    def binary(self, node):
        left = self.eval(node.left)
        right = self.eval(node.right)
        if left[0] == "array" or right[0] == "array":
            return self.elementwise(node.op, left, right)
        return self.scalar_op(node.op, left, right)

    def elementwise(self, op, left, right):
        la = left if left[0] == "array" else ("array", [left], 1, 1)
        ra = right if right[0] == "array" else ("array", [right], 1, 1)
        if (la[2], la[3]) != (ra[2], ra[3]):
            if len(la[1]) == 1:
                la = ("array", la[1] * len(ra[1]), ra[2], ra[3])
            elif len(ra[1]) == 1:
                ra = ("array", ra[1] * len(la[1]), la[2], la[3])
            else:
                raise OracleError("VALUE")
        cells = [self.scalar_op(op, a, b) for a, b in zip(la[1], ra[1])]
        return ("array", cells, la[2], la[3])

    def scalar_op(self, op, a, b):
        if op in ("+", "-", "*", "/", "^"):
            x, y = _num(a), _num(b)
            if op == "+":
                return ("num", x + y)
            if op == "-":
                return ("num", x - y)
            if op == "*":
                return ("num", x * y)
            if op == "/":
                if y == 0:
                    raise OracleError("DIV0")
                return ("num", x / y)
            try:
                out = x**y
            except ZeroDivisionError:
                raise OracleError("DIV0") from None
            except (OverflowError, ValueError):
                raise OracleError("VALUE") from None
            if isinstance(out, complex):
                raise OracleError("VALUE")
            return ("num", out)
        if op == "&":
            return ("text", _text(a) + _text(b))
        sign = _cmp(a, b)
        table = {
            "=": (0,),
            "<>": (-1, 1),
            "<": (-1,),
            "<=": (-1, 0),
            ">": (1,),
            ">=": (0, 1),
        }
        return ("bool", sign in table[op])

    def call(self, node):
        name = node.name
        if name == "IF":
            cond = _bool(_one(self.eval(node.args[0])))
            if cond:
                return self.eval(node.args[1])
            if len(node.args) == 3:
                return self.eval(node.args[2])
            return ("bool", False)
        if name == "IFERROR":
            try:
                return self.eval(node.args[0])
            except OracleError:
                return self.eval(node.args[1])
        args = [self.eval(a) for a in node.args]
        return self.apply(name, args)

    def apply(self, name, args):
        if name in ("MIN", "MAX"):
            sel = _numeric_sel(args)
            if not sel:
                raise OracleError("NA")
            best = sel[0]
            for item in sel[1:]:
                if (item[0] < best[0]) if name == "MIN" else (item[0] > best[0]):
                    best = item
            return best[1]
        if name == "SUM":
            return ("num", sum(n for n, _ in _numeric_sel(args)))
        if name == "AVERAGE":
            sel = _numeric_sel(args)
            if not sel:
                raise OracleError("NA")
            return ("num", sum(n for n, _ in sel) / len(sel))
        if name == "COUNT":
            return ("num", float(len(_numeric_sel(args))))
        if name == "COUNTA":
            cells = [c for a in args for c in _cells_of(a)]
            return ("num", float(sum(1 for c in cells if c[0] != "empty")))
        if name == "COUNTIF":
            comp, operand = _criterion_of(_one(args[1]))
            cells = _cells_of(args[0])
            return ("num", float(sum(1 for c in cells if _crit_match(c, comp, operand))))
        if name == "COUNTIFS":
            pairs = _pairs(args)
            return ("num", float(len(_rows_matching(pairs, len(pairs[0][0])))))
        if name in ("SUMIF", "AVERAGEIF"):
            comp, operand = _criterion_of(_one(args[1]))
            crit_cells = _cells_of(args[0])
            target = _cells_of(args[2]) if len(args) == 3 else crit_cells
            rows = _rows_matching([(crit_cells, comp, operand)], len(target))
            sel = [
                (target[i][1] if target[i][0] == "num" else float(target[i][1].toordinal()))
                for i in rows
                if target[i][0] in ("num", "date")
            ]
            if name == "SUMIF":
                return ("num", sum(sel))
            if not sel:
                raise OracleError("NA")
            return ("num", sum(sel) / len(sel))
        if name in ("SUMIFS", "AVERAGEIFS", "MINIFS", "MAXIFS"):
            target = _cells_of(args[0])
            rows = _rows_matching(_pairs(args[1:]), len(target))
            sel = [
                (
                    target[i][1] if target[i][0] == "num" else float(target[i][1].toordinal()),
                    target[i],
                )
                for i in rows
                if target[i][0] in ("num", "date")
            ]
            if name == "SUMIFS":
                return ("num", sum(n for n, _ in sel))
            if not sel:
                raise OracleError("NA")
            if name == "AVERAGEIFS":
                return ("num", sum(n for n, _ in sel) / len(sel))
            best = sel[0]
            for item in sel[1:]:
                if (item[0] < best[0]) if name == "MINIFS" else (item[0] > best[0]):
                    best = item
            return best[1]
        if name == "UNIQUE":
            seen = []
            out = []
            for cell in _cells_of(args[0]):
                key = _key(cell)
                if key not in seen:
                    seen.append(key)
                    out.append(cell)
            return ("array", out, len(out), 1)
        if name == "INDEX":
            return self.index(args)
        if name == "MATCH":
            return self.match(args)
        if name == "FILTER":
            source = _cells_of(args[0])
            include = _cells_of(args[1])
            if len(include) != len(source):
                raise OracleError("VALUE")
            kept = []
            for cell, flag in zip(source, include):
                truthy = False if flag[0] == "empty" else _bool(flag)
                if truthy:
                    kept.append(cell)
            if kept:
                return ("array", kept, len(kept), 1)
            if len(args) == 3:
                return _one(args[2])
            raise OracleError("NA")
        if name in ("AND", "OR"):
            flags = []
            for arg in args:
                if arg[0] == "array":
                    flags.extend(_bool(c) for c in arg[1] if c[0] in ("bool", "num"))
                else:
                    flags.append(_bool(arg))
            if not flags:
                raise OracleError("VALUE")
            return ("bool", all(flags) if name == "AND" else any(flags))
        if name == "NOT":
            return ("bool", not _bool(_one(args[0])))
        if name == "ABS":
            return ("num", abs(_num(_one(args[0]))))
        if name == "ROUND":
            digits = int(_num(_one(args[1]))) if len(args) == 2 else 0
            return ("num", _round_half(_num(_one(args[0])), digits))
        if name == "ROWS":
            return ("num", float(args[0][2] if args[0][0] == "array" else 1))
        if name == "COLUMNS":
            return ("num", float(args[0][3] if args[0][0] == "array" else 1))
        if name == "CONCATENATE":
            return ("text", "".join(_text(c) for a in args for c in _cells_of(a)))
        if name in ("LEFT", "RIGHT"):
            text = _text(_one(args[0]))
            n = int(_num(_one(args[1]))) if len(args) == 2 else 1
            if n < 0:
                raise OracleError("VALUE")
            if name == "LEFT":
                return ("text", text[:n])
            return ("text", text[-n:] if n else "")
        if name == "MID":
            text = _text(_one(args[0]))
            start = int(_num(_one(args[1])))
            length = int(_num(_one(args[2])))
            if start < 1 or length < 0:
                raise OracleError("VALUE")
            return ("text", text[start - 1 : start - 1 + length])
        if name == "LEN":
            return ("num", float(len(_text(_one(args[0])))))
        if name == "VALUE":
            val = _one(args[0])
            if val[0] == "num":
                return val
            if val[0] == "date":
                return ("num", float(val[1].toordinal()))
            text = _text(val)
            parsed = parse_number(text)
            if parsed is not None:
                return ("num", parsed)
            date = parse_date(text)
            if date is not None:
                return ("num", float(date.toordinal()))
            raise OracleError("VALUE")
        if name == "TEXT":
            return self.text_fn(args)
        if name in ("YEAR", "MONTH", "DAY"):
            val = _one(args[0])
            date = val[1] if val[0] == "date" else parse_date(_text(val))
            if date is None:
                raise OracleError("VALUE")
            part = {"YEAR": date.year, "MONTH": date.month, "DAY": date.day}[name]
            return ("num", float(part))
        raise OracleError("NAME")

    def index(self, args):
        grid = args[0] if args[0][0] == "array" else ("array", [args[0]], 1, 1)
        first = int(_num(_one(args[1])))
        n_rows, n_cols = grid[2], grid[3]
        if len(args) == 3:
            row, col = first, int(_num(_one(args[2])))
        elif n_cols == 1:
            row, col = first, 1
        elif n_rows == 1:
            row, col = 1, first
        else:
            raise OracleError("REF")
        if not (1 <= row <= n_rows and 1 <= col <= n_cols):
            raise OracleError("REF")
        return grid[1][(row - 1) * n_cols + (col - 1)]

    def match(self, args):
        lookup = _one(args[0])
        cells = _cells_of(args[1])
        match_type = int(_num(_one(args[2]))) if len(args) == 3 else 1
        if match_type == 0:
            comp, operand = _criterion_of(lookup)
            for i, cell in enumerate(cells):
                if _crit_match(cell, comp, operand):
                    return ("num", float(i + 1))
            raise OracleError("NA")
        best_pos, best = None, None
        for i, cell in enumerate(cells):
            if cell[0] == "empty":
                continue
            side = _cmp(cell, lookup)
            qualifies = side <= 0 if match_type > 0 else side >= 0
            if not qualifies:
                continue
            if best is None:
                best_pos, best = i + 1, cell
                continue
            against = _cmp(cell, best)
            if (match_type > 0 and against > 0) or (match_type < 0 and against < 0):
                best_pos, best = i + 1, cell
        if best_pos is None:
            raise OracleError("NA")
        return ("num", float(best_pos))

    def text_fn(self, args):
        val = _one(args[0])
        fmt = _text(_one(args[1]))
        if val[0] == "date":
            return ("text", val[1].isoformat())
        number = _num(val)

        def decimals(f):
            return len(f.split(".", 1)[1].replace("#", "0")) if "." in f else 0

        if fmt.endswith("%"):
            d = decimals(fmt[:-1])
            return ("text", f"{_round_half(number * 100, d):.{d}f}%")
        d = decimals(fmt)
        rounded = _round_half(number, d)
        if "," in fmt:
            return ("text", f"{rounded:,.{d}f}")
        return ("text", f"{rounded:.{d}f}")


def oracle_outcome(node, table):
    return Oracle(table).run(node)
