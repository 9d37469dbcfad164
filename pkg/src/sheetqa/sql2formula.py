"""Template-based conversion of restricted SQL into spreadsheet formulas.

The grammar is deliberately the template grammar — single table ``w``,
flat conditions, optional ORDER BY/LIMIT — not general SQL. Shapes outside
it classify as unsupported, which is an expected outcome, not a failure.
Two synthetic columns get special handling: ``agg = 0`` restricts ranges to
the data rows (summary rows excluded), and ``id`` ordering or equality
resolves to direct coordinates.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from sheetqa.cells import format_number
from sheetqa.formula.criteria import criterion_from_cell, match_criteria
from sheetqa.formula.evaluator import evaluate, format_result
from sheetqa.formula.nodes import CellRef, FuncCall, NumberLit, RangeRef, render
from sheetqa.formula.parser import FormulaParseError, parse_formula
from sheetqa.formula.values import FormulaError, cell_truthy
from sheetqa.table import Table

LOOKUP_EQ = "LOOKUP_EQ"
LOOKUP_FIRST_ROW = "LOOKUP_FIRST_ROW"
LOOKUP_LAST_ROW = "LOOKUP_LAST_ROW"
AGG_PLAIN = "AGG_PLAIN"
COUNT_ALL = "COUNT_ALL"
COUNT_DISTINCT = "COUNT_DISTINCT"
AGG_COND = "AGG_COND"
ARGMIN = "ARGMIN"
ARGMAX = "ARGMAX"
UNSUPPORTED = "UNSUPPORTED"

_AGG_FNS = ("MIN", "MAX", "SUM", "AVG", "COUNT")
_FORMULA_FN = {"MIN": "MIN", "MAX": "MAX", "SUM": "SUM", "AVG": "AVERAGE"}

_KEYWORDS = frozenset(
    "select from where and or order by limit asc desc distinct group having join not in like between union".split()
)

_SUFFIX_RE = re.compile(r"^(c\d+)_\w+$")


class SqlSyntaxError(ValueError):
    """Query is not well-formed."""


class UnsupportedSql(ValueError):
    """Well-formed SQL outside the template grammar (expected outcome)."""


class UnmappedColumn(KeyError):
    """A referenced column has no spreadsheet letter in the map."""


class UnsupportedTemplate(ValueError):
    """convert() was called on a shape that classifies as unsupported."""


@dataclass(frozen=True)
class SqlCondition:
    column: str
    comparator: str  # normalized: =, <>, >, >=, <, <=
    literal: str | float


@dataclass(frozen=True)
class OrderBy:
    column: str
    direction: str  # "asc" | "desc"
    limit: int | None


@dataclass(frozen=True)
class RestrictedSql:
    select_kind: str  # "column" | "aggregate" | "count_star" | "count_distinct"
    column: str | None = None
    agg_fn: str | None = None
    conditions: tuple[SqlCondition, ...] = ()
    order_by: OrderBy | None = None
    distinct: bool = False


@dataclass(frozen=True)
class ColumnMap:
    """Squall column name -> spreadsheet letter, plus the data row window."""

    entries: dict[str, str]
    data_rows: tuple[int, int]

    def __post_init__(self):
        start, end = self.data_rows
        if start < 1 or end < start:
            raise ValueError(f"bad data_rows window: {self.data_rows}")

    def letter_for(self, column: str) -> str:
        if column in self.entries:
            return self.entries[column]
        m = _SUFFIX_RE.match(column)
        if m and m.group(1) in self.entries:
            return self.entries[m.group(1)]
        raise UnmappedColumn(column)

    def data_range(self, column: str) -> str:
        letter = self.letter_for(column)
        start, end = self.data_rows
        return f"{letter}{start}:{letter}{end}"

    @classmethod
    def from_dict(cls, payload: dict) -> "ColumnMap":
        return cls(dict(payload["columns"]), tuple(payload["data_rows"]))


_SQL_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>'(?:[^']|'')*')
  | (?P<number>\d+\.\d*|\.\d+|\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><>|!=|<=|>=|[=<>])
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<comma>,)
  | (?P<star>\*)
  | (?P<semicolon>;)
    """,
    re.VERBOSE,
)


def _sql_tokens(query: str) -> list[tuple[str, str]]:
    tokens = []
    i = 0
    while i < len(query):
        m = _SQL_TOKEN_RE.match(query, i)
        if not m:
            raise SqlSyntaxError(f"unexpected character {query[i]!r} at offset {i}")
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group()))
        i = m.end()
    return tokens


class _SqlParser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek_kw(self) -> str | None:
        if self.i < len(self.tokens) and self.tokens[self.i][0] == "ident":
            return self.tokens[self.i][1].lower()
        return None

    def take(self):
        if self.i >= len(self.tokens):
            raise SqlSyntaxError("unexpected end of query")
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def take_kw(self, word: str):
        kind, text = self.take()
        if kind != "ident" or text.lower() != word:
            raise SqlSyntaxError(f"expected {word.upper()}, got {text!r}")

    def take_column(self) -> str:
        kind, text = self.take()
        if kind != "ident" or text.lower() in _KEYWORDS:
            raise SqlSyntaxError(f"expected a column name, got {text!r}")
        return text.lower()

    def done(self) -> bool:
        while self.i < len(self.tokens) and self.tokens[self.i][0] == "semicolon":
            self.i += 1
        return self.i >= len(self.tokens)


def parse_sql(query: str) -> RestrictedSql:
    """Parse a template-shaped SQL query over the single table ``w``."""
    if not query or not query.strip():
        raise SqlSyntaxError("empty query")
    parser = _SqlParser(_sql_tokens(query))
    parser.take_kw("select")
    select_kind, column, agg_fn, distinct = _parse_select(parser)
    parser.take_kw("from")
    kind, table_name = parser.take()
    if kind != "ident":
        raise SqlSyntaxError(f"expected a table name, got {table_name!r}")
    if table_name.lower() != "w":
        raise UnsupportedSql(f"only the single table 'w' is supported, got {table_name!r}")

    conditions: list[SqlCondition] = []
    order_by = None
    while not parser.done():
        word = parser.peek_kw()
        if word == "where":
            parser.take()
            conditions = _parse_conditions(parser)
        elif word == "order":
            parser.take()
            parser.take_kw("by")
            order_by = _parse_order(parser)
        elif word in ("join", "group", "having", "union"):
            raise UnsupportedSql(f"{word.upper()} is outside the template grammar")
        else:
            raise SqlSyntaxError(f"unexpected token {parser.take()[1]!r}")
    return RestrictedSql(
        select_kind=select_kind,
        column=column,
        agg_fn=agg_fn,
        conditions=tuple(conditions),
        order_by=order_by,
        distinct=distinct,
    )


def _parse_select(parser: _SqlParser):
    if parser.i < len(parser.tokens) and parser.tokens[parser.i][0] == "star":
        raise UnsupportedSql("SELECT * is outside the template grammar")
    word = parser.peek_kw()
    distinct = False
    if word == "distinct":
        parser.take()
        distinct = True
        word = parser.peek_kw()
    if word in (fn.lower() for fn in _AGG_FNS) and _next_is_lparen(parser):
        fn = parser.take()[1].upper()
        parser.take()  # (
        if fn == "COUNT" and parser.tokens[parser.i][0] == "star":
            parser.take()
            _expect_rparen(parser)
            return "count_star", None, None, distinct
        inner_distinct = False
        if parser.peek_kw() == "distinct":
            parser.take()
            inner_distinct = True
        column = parser.take_column()
        _expect_rparen(parser)
        if inner_distinct:
            if fn != "COUNT":
                raise UnsupportedSql(f"{fn}(DISTINCT ...) is outside the template grammar")
            return "count_distinct", column, None, distinct
        return "aggregate", column, fn, distinct
    column = parser.take_column()
    if parser.i < len(parser.tokens) and parser.tokens[parser.i][0] == "comma":
        raise UnsupportedSql("multi-column SELECT is outside the template grammar")
    return "column", column, None, distinct


def _next_is_lparen(parser: _SqlParser) -> bool:
    return (
        parser.i + 1 < len(parser.tokens) and parser.tokens[parser.i + 1][0] == "lparen"
    )


def _expect_rparen(parser: _SqlParser):
    kind, text = parser.take()
    if kind != "rparen":
        raise SqlSyntaxError(f"expected ')', got {text!r}")


def _parse_conditions(parser: _SqlParser) -> list[SqlCondition]:
    conditions = [_parse_condition(parser)]
    while parser.peek_kw() in ("and", "or"):
        word = parser.take()[1].lower()
        if word == "or":
            raise UnsupportedSql("OR conditions are outside the template grammar")
        conditions.append(_parse_condition(parser))
    return conditions


def _parse_condition(parser: _SqlParser) -> SqlCondition:
    column = parser.take_column()
    kind, op = parser.take()
    if kind != "op":
        if kind == "ident" and op.lower() in ("in", "like", "between", "is", "not"):
            raise UnsupportedSql(f"{op.upper()} conditions are outside the template grammar")
        raise SqlSyntaxError(f"expected a comparator, got {op!r}")
    comparator = "<>" if op in ("!=", "<>") else op
    kind, literal = parser.take()
    if kind == "string":
        value: str | float = literal[1:-1].replace("''", "'")
    elif kind == "number":
        value = float(literal)
    elif kind == "lparen":
        raise UnsupportedSql("subqueries are outside the template grammar")
    else:
        raise SqlSyntaxError(f"expected a literal, got {literal!r}")
    return SqlCondition(column, comparator, value)


def _parse_order(parser: _SqlParser) -> OrderBy:
    column = parser.take_column()
    direction = "asc"
    if parser.peek_kw() in ("asc", "desc"):
        direction = parser.take()[1].lower()
    limit = None
    if parser.peek_kw() == "limit":
        parser.take()
        kind, number = parser.take()
        if kind != "number":
            raise SqlSyntaxError(f"expected a LIMIT count, got {number!r}")
        limit = int(float(number))
    return OrderBy(column, direction, limit)


def _split_conditions(ast: RestrictedSql):
    agg_conds = [c for c in ast.conditions if c.column == "agg"]
    id_conds = [c for c in ast.conditions if c.column == "id"]
    real = [c for c in ast.conditions if c.column not in ("agg", "id")]
    return agg_conds, id_conds, real


def classify_template(ast: RestrictedSql) -> str:
    """Assign the conversion template, or UNSUPPORTED (a value, not an error)."""
    agg_conds, id_conds, real = _split_conditions(ast)
    # agg = 0 is consumed by the data-row window; any other agg use is out.
    if any(c.comparator != "=" or c.literal != 0 for c in agg_conds):
        return UNSUPPORTED

    if ast.select_kind == "count_star":
        if ast.order_by or id_conds:
            return UNSUPPORTED
        return AGG_COND if real else COUNT_ALL
    if ast.select_kind == "count_distinct":
        if ast.order_by or id_conds or real:
            return UNSUPPORTED
        return COUNT_DISTINCT
    if ast.select_kind == "aggregate":
        if ast.order_by or id_conds or ast.distinct:
            return UNSUPPORTED
        return AGG_COND if real else AGG_PLAIN

    # Plain column select.
    if ast.distinct:
        return UNSUPPORTED
    if ast.order_by is not None:
        if ast.order_by.limit != 1 or real or id_conds:
            return UNSUPPORTED
        if ast.order_by.column == "id":
            return LOOKUP_FIRST_ROW if ast.order_by.direction == "asc" else LOOKUP_LAST_ROW
        return ARGMIN if ast.order_by.direction == "asc" else ARGMAX
    if id_conds:
        if real or len(id_conds) != 1 or id_conds[0].comparator != "=":
            return UNSUPPORTED
        return LOOKUP_EQ
    if real:
        return LOOKUP_EQ
    return UNSUPPORTED


def _criterion_text(cond: SqlCondition) -> str:
    literal = (
        format_number(cond.literal) if isinstance(cond.literal, float) else cond.literal
    )
    return f"{cond.comparator}{literal}"


def _quote_formula_text(value: str) -> str:
    return '"' + value.replace('"', '""') + '"'


def _include_expr(cond: SqlCondition, cmap: ColumnMap) -> str:
    rng = cmap.data_range(cond.column)
    if isinstance(cond.literal, float):
        return f"{rng}{cond.comparator}{format_number(cond.literal)}"
    return f"{rng}{cond.comparator}{_quote_formula_text(cond.literal)}"


def _criteria_pairs_text(conds, cmap: ColumnMap) -> str:
    return ", ".join(
        f"{cmap.data_range(c.column)},{_quote_formula_text(_criterion_text(c))}"
        for c in conds
    )


def convert(ast: RestrictedSql, cmap: ColumnMap) -> str:
    """Emit the formula for a supported template; deterministic text."""
    template = classify_template(ast)
    if template == UNSUPPORTED:
        raise UnsupportedTemplate("query shape has no conversion template")
    _, id_conds, real = _split_conditions(ast)
    start, end = cmap.data_rows

    if template == LOOKUP_FIRST_ROW:
        return f"={cmap.letter_for(ast.column)}{start}"
    if template == LOOKUP_LAST_ROW:
        return f"={cmap.letter_for(ast.column)}{end}"
    if template == LOOKUP_EQ and id_conds:
        offset = int(id_conds[0].literal)
        return f"={cmap.letter_for(ast.column)}{start + offset - 1}"
    if template == LOOKUP_EQ:
        sel = cmap.data_range(ast.column)
        if len(real) == 1:
            include = _include_expr(real[0], cmap)
        else:
            include = "*".join(f"({_include_expr(c, cmap)})" for c in real)
        return f"=FILTER({sel}, {include})"
    if template == COUNT_ALL:
        try:
            letter = cmap.letter_for("c1")
        except UnmappedColumn:
            letter = "A"
        return f"=COUNTA({letter}{start}:{letter}{end})"
    if template == COUNT_DISTINCT:
        return f"=COUNTA(UNIQUE({cmap.data_range(ast.column)}))"
    if template == AGG_PLAIN:
        if ast.agg_fn == "COUNT":
            return f"=COUNTA({cmap.data_range(ast.column)})"
        return f"={_FORMULA_FN[ast.agg_fn]}({cmap.data_range(ast.column)})"
    if template == AGG_COND:
        pairs = _criteria_pairs_text(real, cmap)
        if ast.select_kind == "count_star" or ast.agg_fn == "COUNT":
            return f"=COUNTIFS({pairs})"
        return f"={_FORMULA_FN[ast.agg_fn]}IFS({cmap.data_range(ast.column)}, {pairs})"
    if template in (ARGMIN, ARGMAX):
        sel = cmap.data_range(ast.column)
        ordr = cmap.data_range(ast.order_by.column)
        fn = "MIN" if template == ARGMIN else "MAX"
        return f"=INDEX({sel}, MATCH({fn}({ordr}),{ordr},0))"
    raise UnsupportedTemplate(template)


def simplify_lookup(formula: str, table: Table) -> str:
    """Replace a single-hit INDEX/MATCH or FILTER lookup with the direct
    cell coordinate; anything else returns unchanged.

    The simplified formula is verified to evaluate to the same answer on
    the given table before it is returned.
    """
    try:
        asts = parse_formula(formula)
    except FormulaParseError:
        return formula
    if len(asts) != 1:
        return formula
    ast = asts[0]
    try:
        ref = _direct_ref(ast, table)
    except FormulaError:
        return formula
    if ref is None:
        return formula
    simplified = "=" + render(ref)
    original_answer = format_result([evaluate(ast, table)])
    simplified_answer = format_result([evaluate(ref, table)])
    if original_answer is None or original_answer != simplified_answer:
        return formula
    return simplified


def _direct_ref(ast, table: Table) -> CellRef | None:
    if not isinstance(ast, FuncCall):
        return None
    if ast.name == "INDEX" and len(ast.args) == 2:
        sel, match_node = ast.args
        if not (isinstance(sel, RangeRef) and _is_exact_match_call(match_node)):
            return None
        if not _match_is_unique(match_node, table):
            return None
        position = evaluate(match_node, table)
        if position.is_error:
            return None
        return _offset_ref(sel, int(position.value.number_value))
    if ast.name == "FILTER" and len(ast.args) in (2, 3):
        sel, include = ast.args[0], ast.args[1]
        if not isinstance(sel, RangeRef):
            return None
        flags = _include_flags(include, table)
        if flags is None or sum(flags) != 1:
            return None
        return _offset_ref(sel, flags.index(True) + 1)
    return None


def _is_exact_match_call(node) -> bool:
    return (
        isinstance(node, FuncCall)
        and node.name == "MATCH"
        and len(node.args) == 3
        and isinstance(node.args[2], NumberLit)
        and node.args[2].value == 0
    )


def _match_is_unique(match_node: FuncCall, table: Table) -> bool:
    lookup = evaluate(match_node.args[0], table)
    cells = evaluate(match_node.args[1], table)
    if lookup.kind != "scalar" or cells.kind != "array":
        return False
    crit = criterion_from_cell(lookup.value)
    return sum(1 for c in cells.values if match_criteria(c, crit)) == 1


def _include_flags(include, table: Table) -> list[bool] | None:
    value = evaluate(include, table)
    if value.kind != "array":
        return None
    return [cell_truthy(c) for c in value.values]


def _offset_ref(sel: RangeRef, position: int) -> CellRef | None:
    if sel.start_col == sel.end_col:
        row = sel.start_row + position - 1
        if row > sel.end_row:
            return None
        return CellRef(sel.start_col, row)
    if sel.start_row == sel.end_row:
        col = sel.start_col + position - 1
        if col > sel.end_col:
            return None
        return CellRef(col, sel.start_row)
    return None
