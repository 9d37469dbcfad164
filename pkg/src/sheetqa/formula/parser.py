"""Recursive-descent parser for the formula dialect.

Input may hold several formulas separated by top-level ``|`` or ``;``
(separators inside string literals or parentheses do not split). Each
fragment may start with an optional ``=``. Function names and arities are
checked against the registry while parsing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

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
from sheetqa.refs import col_to_index


class FormulaParseError(ValueError):
    """Base for all formula parse failures."""


class FormulaSyntaxError(FormulaParseError):
    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} (at offset {position})")


class UnknownFunction(FormulaParseError):
    def __init__(self, name: str, position: int):
        self.name = name
        self.position = position
        super().__init__(f"unknown function {name} (at offset {position})")


class ArityError(FormulaParseError):
    def __init__(self, name: str, got: int, lo: int, hi: int | None, position: int):
        self.name = name
        self.position = position
        bound = f"{lo}+" if hi is None else (str(lo) if lo == hi else f"{lo}..{hi}")
        super().__init__(f"{name} takes {bound} arguments, got {got} (at offset {position})")


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)
  | (?P<string>"(?:[^"]|"")*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<op><>|<=|>=|[=<>+\-*/^&])
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<comma>,)
  | (?P<colon>:)
    """,
    re.VERBOSE,
)

_A1_IDENT_RE = re.compile(r"([A-Za-z]{1,3})([1-9][0-9]*)")


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(src: str, base: int) -> list[_Token]:
    tokens = []
    i = 0
    while i < len(src):
        m = _TOKEN_RE.match(src, i)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {src[i]!r}", base + i)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), base + i))
        i = m.end()
    tokens.append(_Token("eof", "", base + len(src)))
    return tokens


def split_formulas(src: str) -> list[tuple[str, int]]:
    """Split multi-formula input on top-level ``|`` / ``;``.

    Returns (fragment, offset-of-fragment-in-src) pairs; blank fragments
    between consecutive separators are dropped.
    """
    pieces = []
    depth = 0
    in_string = False
    start = 0
    i = 0
    while i < len(src):
        ch = src[i]
        if in_string:
            if ch == '"':
                if i + 1 < len(src) and src[i + 1] == '"':
                    i += 1  # escaped quote
                else:
                    in_string = False
        elif ch == '"':
            in_string = True
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth = max(0, depth - 1)
        elif ch in "|;" and depth == 0:
            pieces.append((src[start:i], start))
            start = i + 1
        i += 1
    pieces.append((src[start:], start))
    return [(frag, off) for frag, off in pieces if frag.strip()]


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        if self.cur.kind != kind:
            raise FormulaSyntaxError(f"expected {what}", self.cur.pos)
        return self.advance()

    def at_op(self, *ops: str) -> bool:
        return self.cur.kind == "op" and self.cur.text in ops

    # Precedence, loosest first: comparison, &, +/-, */, ^, unary, atom.
    def parse_expression(self) -> Node:
        node = self.parse_concat()
        while self.at_op("=", "<>", "<", "<=", ">", ">="):
            op = self.advance().text
            node = Binary(op, node, self.parse_concat())
        return node

    def parse_concat(self) -> Node:
        node = self.parse_additive()
        while self.at_op("&"):
            self.advance()
            node = Binary("&", node, self.parse_additive())
        return node

    def parse_additive(self) -> Node:
        node = self.parse_multiplicative()
        while self.at_op("+", "-"):
            op = self.advance().text
            node = Binary(op, node, self.parse_multiplicative())
        return node

    def parse_multiplicative(self) -> Node:
        node = self.parse_power()
        while self.at_op("*", "/"):
            op = self.advance().text
            node = Binary(op, node, self.parse_power())
        return node

    def parse_power(self) -> Node:
        node = self.parse_unary()
        while self.at_op("^"):
            self.advance()
            node = Binary("^", node, self.parse_unary())
        return node

    def parse_unary(self) -> Node:
        if self.at_op("-", "+"):
            op = self.advance().text
            return Unary(op, self.parse_unary())
        return self.parse_atom()

    def parse_atom(self) -> Node:
        tok = self.cur
        if tok.kind == "number":
            self.advance()
            return NumberLit(float(tok.text))
        if tok.kind == "string":
            self.advance()
            return TextLit(tok.text[1:-1].replace('""', '"'))
        if tok.kind == "lparen":
            self.advance()
            node = self.parse_expression()
            self.expect("rparen", "')'")
            return node
        if tok.kind == "ident":
            return self.parse_ident()
        raise FormulaSyntaxError("expected a value, reference, or function call", tok.pos)

    def parse_ident(self) -> Node:
        tok = self.advance()
        upper = tok.text.upper()
        if self.cur.kind == "lparen":
            return self.parse_call(upper, tok.pos)
        if upper == "TRUE":
            return BoolLit(True)
        if upper == "FALSE":
            return BoolLit(False)
        ref = self.parse_ref(tok)
        if self.cur.kind == "colon":
            self.advance()
            other_tok = self.expect("ident", "a cell reference after ':'")
            other = self.parse_ref(other_tok)
            return RangeRef.normalized(ref, other)
        return ref

    def parse_ref(self, tok: _Token) -> CellRef:
        m = _A1_IDENT_RE.fullmatch(tok.text)
        if not m:
            raise FormulaSyntaxError(f"unknown name {tok.text!r}", tok.pos)
        return CellRef(col_to_index(m.group(1)), int(m.group(2)))

    def parse_call(self, name: str, pos: int) -> Node:
        spec = get_function(name)
        if spec is None:
            raise UnknownFunction(name, pos)
        self.expect("lparen", "'('")
        args: list[Node] = []
        if self.cur.kind == "rparen":
            self.advance()
        else:
            while True:
                args.append(self.parse_expression())
                if self.cur.kind == "comma":
                    self.advance()
                    continue
                self.expect("rparen", "',' or ')'")
                break
        got = len(args)
        if got < spec.min_arity or (spec.max_arity is not None and got > spec.max_arity):
            raise ArityError(name, got, spec.min_arity, spec.max_arity, pos)
        return FuncCall(name, tuple(args))


def _parse_fragment(fragment: str, offset: int) -> Node:
    body = fragment
    base = offset
    lead = len(body) - len(body.lstrip())
    body = body.lstrip()
    base += lead
    if body.startswith("="):
        body = body[1:]
        base += 1
    tokens = _tokenize(body, base)
    parser = _Parser(tokens)
    node = parser.parse_expression()
    if parser.cur.kind != "eof":
        raise FormulaSyntaxError(f"unexpected {parser.cur.text!r}", parser.cur.pos)
    return node


def parse_formula(src: str) -> list[Node]:
    """Parse one or more ``|``/``;``-separated formulas into ASTs."""
    if not src or not src.strip():
        raise FormulaSyntaxError("empty formula", 0)
    return [_parse_fragment(frag, off) for frag, off in split_formulas(src)]
