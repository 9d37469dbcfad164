"""Spreadsheet-formula dialect: lexer, parser, function registry, evaluator."""

from sheetqa.formula.criteria import Criterion, match_criteria, parse_criterion
from sheetqa.formula.evaluator import evaluate, execute_all, first_error, format_result
from sheetqa.formula.functions import FunctionSpec, REGISTRY, function_names
from sheetqa.formula.nodes import (
    Binary,
    BoolLit,
    CellRef,
    FuncCall,
    NumberLit,
    RangeRef,
    TextLit,
    Unary,
    render,
)
from sheetqa.formula.parser import (
    ArityError,
    FormulaParseError,
    FormulaSyntaxError,
    UnknownFunction,
    parse_formula,
    split_formulas,
)
from sheetqa.formula.values import (
    DIV0,
    ERROR_CODES,
    EvalResult,
    FormulaError,
    Grid,
    NA,
    NAME,
    REF,
    UNSUPPORTED,
    VALUE,
    error_display,
)

__all__ = [
    "parse_formula",
    "split_formulas",
    "evaluate",
    "execute_all",
    "format_result",
    "first_error",
    "match_criteria",
    "parse_criterion",
    "Criterion",
    "render",
    "NumberLit",
    "TextLit",
    "BoolLit",
    "CellRef",
    "RangeRef",
    "Unary",
    "Binary",
    "FuncCall",
    "FunctionSpec",
    "REGISTRY",
    "function_names",
    "EvalResult",
    "FormulaError",
    "Grid",
    "FormulaParseError",
    "FormulaSyntaxError",
    "UnknownFunction",
    "ArityError",
    "ERROR_CODES",
    "DIV0",
    "VALUE",
    "REF",
    "NA",
    "NAME",
    "UNSUPPORTED",
    "error_display",
]
