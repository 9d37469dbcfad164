"""Excel-style criteria strings for the *IF / *IFS function family.

A criterion is an optional leading comparator followed by an operand, e.g.
``"=60"``, ``"<>b"``, ``">5"``. Matching is numeric when both sides are
numbers, date-valued when both are dates, and case-insensitive text with
``*``/``?`` wildcards otherwise.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from sheetqa.cells import (
    BOOLEAN,
    DATE,
    EMPTY,
    NUMBER,
    CellValue,
    canonical_text,
    coerce_cell,
)

_COMPARATORS = ("<>", "<=", ">=", "=", "<", ">")

_ORDER_OK = {"<": (-1,), "<=": (-1, 0), ">": (1,), ">=": (0, 1)}


@dataclass(frozen=True)
class Criterion:
    comparator: str  # one of =, <>, >, >=, <, <=
    operand: str  # operand text, uncoerced


def parse_criterion(text: str) -> Criterion:
    """Split a criterion string into comparator and operand.

    No leading comparator means equality. An ordering comparator with no
    operand degrades to plain text equality on the literal string.
    """
    for comp in _COMPARATORS:
        if text.startswith(comp):
            operand = text[len(comp):]
            if not operand and comp not in ("=", "<>"):
                break  # "<" alone is not a comparison; match the literal
            return Criterion(comp, operand)
    return Criterion("=", text)


def criterion_from_cell(cell: CellValue) -> Criterion:
    """Criteria may be given as non-text scalars (e.g. COUNTIF(A1:A5, 60))."""
    if cell.kind in (NUMBER, BOOLEAN, DATE):
        return Criterion("=", canonical_text(cell))
    return parse_criterion(cell.raw)


def _wildcard_match(text: str, pattern: str) -> bool:
    regex = "".join(
        ".*" if ch == "*" else "." if ch == "?" else re.escape(ch) for ch in pattern
    )
    return re.fullmatch(regex, text, re.IGNORECASE) is not None


def _has_wildcards(pattern: str) -> bool:
    return "*" in pattern or "?" in pattern


def match_criteria(value: CellValue, criterion: str | Criterion) -> bool:
    """Test one cell against a criterion string.

    Blank cells match only the explicit blank test ``"="``; they are skipped
    by every other comparison, numeric or textual.
    """
    crit = criterion if isinstance(criterion, Criterion) else parse_criterion(criterion)
    comp, operand_text = crit.comparator, crit.operand

    if not operand_text.strip():
        if comp == "=":
            return value.kind == EMPTY
        if comp == "<>":
            return value.kind != EMPTY
        return False
    if value.kind == EMPTY:
        return False

    operand = coerce_cell(operand_text)

    if operand.kind == NUMBER and value.kind == NUMBER:
        return _ordered(comp, value.number_value, operand.number_value)
    if operand.kind == DATE and value.kind == DATE:
        return _ordered(comp, value.date_value, operand.date_value)
    if operand.kind == BOOLEAN and value.kind == BOOLEAN:
        return _ordered(comp, value.bool_value, operand.bool_value)

    # Cross-type and plain text fall back to case-insensitive text matching.
    value_text = canonical_text(value).strip()
    if comp in ("=", "<>") and _has_wildcards(operand_text):
        hit = _wildcard_match(value_text, operand_text.strip())
        return hit if comp == "=" else not hit
    return _ordered(comp, value_text.casefold(), operand_text.strip().casefold())


def _ordered(comp: str, left, right) -> bool:
    if comp == "=":
        return left == right
    if comp == "<>":
        return left != right
    sign = -1 if left < right else (1 if left > right else 0)
    return sign in _ORDER_OK[comp]
