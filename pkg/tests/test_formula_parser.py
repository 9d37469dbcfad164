import pytest

from sheetqa.formula import (
    ArityError,
    Binary,
    BoolLit,
    CellRef,
    FormulaSyntaxError,
    FuncCall,
    NumberLit,
    RangeRef,
    TextLit,
    Unary,
    UnknownFunction,
    parse_formula,
    render,
    split_formulas,
)


def test_single_cell_assignment():
    assert parse_formula("=B2") == [CellRef(2, 2)]


def test_leading_equals_optional():
    assert parse_formula("B2") == parse_formula("=B2")


def test_two_formulas_semicolon():
    asts = parse_formula("=MAX(A1:A10);=MIN(B2:B5)")
    assert asts == [
        FuncCall("MAX", (RangeRef(1, 1, 1, 10),)),
        FuncCall("MIN", (RangeRef(2, 2, 2, 5),)),
    ]


def test_two_formulas_pipe():
    assert len(parse_formula("=B4|=B5")) == 2


def test_separator_inside_string_does_not_split():
    asts = parse_formula('=COUNTIF(A1:A3,"x|y")')
    assert len(asts) == 1
    assert asts[0].args[1] == TextLit("x|y")


def test_separator_inside_parens_does_not_split():
    # No function with a ';' in args exists, but '|' may appear in criteria.
    asts = parse_formula('=IF(A1="a|b",1,2)')
    assert len(asts) == 1


def test_unbalanced_paren_position():
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula("=SUM(")
    assert info.value.position == 5


def test_unknown_function():
    with pytest.raises(UnknownFunction):
        parse_formula("=NOSUCHFN(1)")


def test_arity_validated_at_parse():
    with pytest.raises(ArityError):
        parse_formula("=ABS(1,2)")
    with pytest.raises(ArityError):
        parse_formula("=SUMIFS(A1:A2)")


def test_empty_input_rejected():
    with pytest.raises(FormulaSyntaxError):
        parse_formula("")
    with pytest.raises(FormulaSyntaxError):
        parse_formula("   ")


def test_trailing_garbage_rejected():
    with pytest.raises(FormulaSyntaxError):
        parse_formula("=1 2")


def test_function_names_uppercased():
    assert parse_formula("=sum(A1:A2)") == [FuncCall("SUM", (RangeRef(1, 1, 1, 2),))]


def test_range_normalized():
    assert parse_formula("=SUM(B5:A1)") == [FuncCall("SUM", (RangeRef(1, 1, 2, 5),))]


def test_precedence():
    ast = parse_formula("=1+2*3")[0]
    assert ast == Binary("+", NumberLit(1), Binary("*", NumberLit(2), NumberLit(3)))


def test_comparison_binds_loosest():
    ast = parse_formula("=A1+1>B2")[0]
    assert isinstance(ast, Binary) and ast.op == ">"


def test_unary_minus():
    assert parse_formula("=-A1")[0] == Unary("-", CellRef(1, 1))


def test_power_and_unary():
    ast = parse_formula("=-2^2")[0]
    assert ast == Binary("^", Unary("-", NumberLit(2)), NumberLit(2))


def test_string_escape():
    assert parse_formula('="say ""hi"""')[0] == TextLit('say "hi"')


def test_booleans():
    assert parse_formula("=TRUE")[0] == BoolLit(True)
    assert parse_formula("=false")[0] == BoolLit(False)


def test_concat_operator():
    ast = parse_formula('="a"&"b"')[0]
    assert ast == Binary("&", TextLit("a"), TextLit("b"))


def test_split_formulas_offsets():
    pieces = split_formulas("=A1|=B2")
    assert pieces == [("=A1", 0), ("=B2", 4)]


def test_split_drops_blank_fragments():
    assert [frag for frag, _ in split_formulas("=A1||=B2|")] == ["=A1", "=B2"]


@pytest.mark.parametrize(
    "src",
    [
        "=B2",
        "=MIN(G2:G35)",
        "=COUNTA(UNIQUE(A2:A39))",
        '=SUMIFS(N2:N22, G2:G22,"=60")',
        '=MINIFS(D2:D33, G2:G33,"=a", H2:H33,"<>b")',
        "=INDEX(A2:A13, MATCH(MIN(D2:D13),D2:D13,0))",
        '=IF(AND(A1>1,B2<=3),"yes","no")',
        "=-A1+2.5*B2^2",
        '="a"&"b"&C1',
        '=IFERROR(1/0,"fallback")',
        "=LEFT(A1,2)",
        "=NOT(TRUE)",
    ],
)
def test_print_parse_round_trip(src):
    asts = parse_formula(src)
    for ast in asts:
        assert parse_formula(render(ast)) == [ast]
