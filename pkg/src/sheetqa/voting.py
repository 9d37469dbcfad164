"""Mixed-mode majority voting over answer candidates.

Formula outputs are executed first and vote with their executed results;
direct answers vote with their normalized text. Equivalent answers pool
into one class (merged transitively) so surface variants like ``2.90`` and
``2.9`` count together.
"""

from __future__ import annotations

from dataclasses import dataclass

from sheetqa.answers import NormalizedAnswer, denotation_match, normalize_answer
from sheetqa.formula.evaluator import evaluate, format_result
from sheetqa.formula.parser import FormulaParseError, parse_formula
from sheetqa.table import Table

DP = "dp"
FORMULA = "formula"

EXEC_ERROR = "exec_error"
PARSE_ERROR = "parse_error"
EMPTY = "empty"

ORDER_TIE_BREAK = "order"
FORMULA_FIRST_TIE_BREAK = "formula-first"


class NoValidCandidates(ValueError):
    """Every candidate was invalid; the caller decides the fallback."""


@dataclass(frozen=True)
class Candidate:
    mode: str  # "dp" | "formula"
    raw_output: str
    normalized: NormalizedAnswer | None
    valid: bool
    invalid_reason: str | None = None


@dataclass(frozen=True)
class VoteOutcome:
    winner: NormalizedAnswer
    tally: dict[str, int]
    n_valid: int
    tie_broken: bool


def formula_candidate(output: str, table: Table) -> Candidate:
    """Execute one formula output; execution problems mark it invalid."""
    if not output.strip():
        return Candidate(FORMULA, output, None, False, EMPTY)
    try:
        asts = parse_formula(output)
    except FormulaParseError:
        return Candidate(FORMULA, output, None, False, PARSE_ERROR)
    answer = format_result([evaluate(ast, table) for ast in asts])
    if answer is None:
        return Candidate(FORMULA, output, None, False, EXEC_ERROR)
    return Candidate(FORMULA, output, normalize_answer(answer), True)


def dp_candidate(output: str) -> Candidate:
    if not output.strip():
        return Candidate(DP, output, None, False, EMPTY)
    return Candidate(DP, output, normalize_answer(output), True)


def collect_candidates(
    formula_outputs, dp_outputs, table: Table | None = None
) -> list[Candidate]:
    """Turn raw model outputs into candidates; nothing is dropped."""
    formula_outputs = list(formula_outputs)
    dp_outputs = list(dp_outputs)
    if not formula_outputs and not dp_outputs:
        raise ValueError("no outputs to collect")
    if formula_outputs and table is None:
        raise ValueError("formula outputs need a table to execute against")
    candidates = [formula_candidate(o, table) for o in formula_outputs]
    candidates.extend(dp_candidate(o) for o in dp_outputs)
    return candidates


def vote(candidates, tie_break: str = FORMULA_FIRST_TIE_BREAK) -> VoteOutcome:
    """Majority vote over the valid candidates.

    Ties between equally sized classes break by (1) more formula-mode
    members, then (2) earliest first appearance; ``tie_break="order"`` skips
    rule (1).
    """
    candidates = list(candidates)
    valid = [(i, c) for i, c in enumerate(candidates) if c.valid]
    if not valid:
        raise NoValidCandidates("no valid candidates to vote on")

    # Transitive pooling of denotation-equivalent answers: a candidate that
    # matches members of several classes merges those classes into one.
    classes: list[list[tuple[int, Candidate]]] = []
    for i, cand in valid:
        hits = [
            members
            for members in classes
            if any(denotation_match(cand.normalized, m.normalized) for _, m in members)
        ]
        merged = [member for members in hits for member in members] + [(i, cand)]
        merged.sort(key=lambda pair: pair[0])
        classes = [members for members in classes if members not in hits]
        classes.append(merged)

    def score(members):
        size = len(members)
        formula_members = sum(1 for _, c in members if c.mode == FORMULA)
        first_seen = members[0][0]
        if tie_break == ORDER_TIE_BREAK:
            return (size, 0, -first_seen)
        return (size, formula_members, -first_seen)

    ranked = sorted(classes, key=score, reverse=True)
    winner_class = ranked[0]
    top_size = len(winner_class)
    tie_broken = sum(1 for members in classes if len(members) == top_size) > 1

    tally = {members[0][1].normalized.key(): len(members) for members in classes}
    return VoteOutcome(
        winner=winner_class[0][1].normalized,
        tally=tally,
        n_valid=len(valid),
        tie_broken=tie_broken,
    )
