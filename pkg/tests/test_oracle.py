"""Engine vs brute-force-oracle equivalence on randomized cases."""

from sheetqa.cells import CellValue
from sheetqa.formula import evaluate, parse_formula, render

from tests.formula_gen import outcomes_agree, random_case
from tests.oracle import oracle_outcome


def cell_atom(cell: CellValue):
    if cell.kind == "number":
        return ("num", cell.number_value)
    if cell.kind == "date":
        return ("date", cell.date_value.isoformat())
    if cell.kind == "boolean":
        return ("bool", cell.bool_value)
    if cell.kind == "empty":
        return ("empty",)
    return ("text", cell.raw)


def engine_outcome(node, table):
    result = evaluate(node, table)
    if result.is_error:
        return ("error", result.error_code)
    cells = [result.value] if result.kind == "scalar" else list(result.values)
    return ("ok", result.kind, [cell_atom(c) for c in cells])


def run_equivalence(n_cases: int, seed_base: int = 0) -> list:
    failures = []
    for i in range(n_cases):
        table, node = random_case(seed_base + i)
        engine = engine_outcome(node, table)
        oracle = oracle_outcome(node, table)
        if not outcomes_agree(engine, oracle):
            failures.append((seed_base + i, render(node), engine, oracle))
    return failures


def test_engine_matches_oracle_400_cases():
    failures = run_equivalence(400, seed_base=10_000)
    assert not failures, f"{len(failures)} disagreements, first: {failures[0]}"


def test_generated_formulas_round_trip_through_parser():
    for i in range(300):
        table, node = random_case(20_000 + i)
        text = render(node)
        assert parse_formula(text) == [node], text


def test_generated_formulas_evaluate_the_same_after_rendering():
    # parse(render(ast)) must not change evaluation either
    for i in range(200):
        table, node = random_case(30_000 + i)
        reparsed = parse_formula(render(node))[0]
        assert engine_outcome(reparsed, table) == engine_outcome(node, table)
