"""Formula AST node types and the text renderer.

Rendering a parsed tree and re-parsing it yields a structurally identical
tree: sub-expressions are parenthesized explicitly so no precedence
knowledge is needed to read a rendered formula back.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from sheetqa.cells import format_number
from sheetqa.refs import format_a1


@dataclass(frozen=True)
class NumberLit:
    value: float


@dataclass(frozen=True)
class TextLit:
    value: str


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class CellRef:
    col: int  # 1-based
    row: int  # 1-based


@dataclass(frozen=True)
class RangeRef:
    """Rectangular range; start is always the top-left corner."""

    start_col: int
    start_row: int
    end_col: int
    end_row: int

    @classmethod
    def normalized(cls, a: CellRef, b: CellRef) -> "RangeRef":
        return cls(
            min(a.col, b.col), min(a.row, b.row), max(a.col, b.col), max(a.row, b.row)
        )


@dataclass(frozen=True)
class Unary:
    op: str  # "-" or "+"
    operand: "Node"


@dataclass(frozen=True)
class Binary:
    op: str  # arithmetic, comparison, or "&" concatenation
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class FuncCall:
    name: str  # upper-cased
    args: tuple["Node", ...]


Node = Union[NumberLit, TextLit, BoolLit, CellRef, RangeRef, Unary, Binary, FuncCall]


def render(node: Node) -> str:
    """Render an AST back to formula text (without the leading ``=``)."""
    if isinstance(node, NumberLit):
        return format_number(node.value)
    if isinstance(node, TextLit):
        return '"' + node.value.replace('"', '""') + '"'
    if isinstance(node, BoolLit):
        return "TRUE" if node.value else "FALSE"
    if isinstance(node, CellRef):
        return format_a1(node.col, node.row)
    if isinstance(node, RangeRef):
        return f"{format_a1(node.start_col, node.start_row)}:{format_a1(node.end_col, node.end_row)}"
    if isinstance(node, Unary):
        return node.op + _wrapped(node.operand)
    if isinstance(node, Binary):
        return f"{_wrapped(node.left)}{node.op}{_wrapped(node.right)}"
    if isinstance(node, FuncCall):
        return f"{node.name}({','.join(render(a) for a in node.args)})"
    raise TypeError(f"not a formula node: {node!r}")


def _wrapped(node: Node) -> str:
    if isinstance(node, (Binary, Unary)):
        return f"({render(node)})"
    return render(node)
