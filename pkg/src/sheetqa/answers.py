"""Answer normalization, denotation matching, dataset scoring, and rewards.

Answers are ``|``-separated part lists. Normalization is total and
idempotent; matching is type-aware (numbers within a small relative
tolerance, dates by value, text by canonical string) and, by default,
order-insensitive.
"""

from __future__ import annotations

import datetime
import math
from dataclasses import dataclass

from sheetqa.cells import format_number, parse_date, parse_number

QA = "qa"
FACT_VERIFICATION = "fact_verification"

ENTAILED = "entailed"
REFUTED = "refuted"

_TRUE_WORDS = frozenset({"true", "1", "yes"})
_FALSE_WORDS = frozenset({"false", "0", "no"})

REL_TOL = 1e-6


class EmptyDataset(ValueError):
    """score_dataset needs at least one record."""


@dataclass(frozen=True)
class AnswerPart:
    kind: str  # "number" | "date" | "text"
    canonical: str
    number_value: float | None = None
    date_value: datetime.date | None = None


@dataclass(frozen=True)
class NormalizedAnswer:
    parts: tuple[AnswerPart, ...]

    @property
    def text(self) -> str:
        return "|".join(p.canonical for p in self.parts)

    def key(self) -> str:
        """Canonical identity for tallying; equal answers share a key only
        when exactly equal (tolerance-close numbers may still differ)."""
        return self.text


def _normalize_part(raw: str) -> AnswerPart:
    s = raw.strip()
    # Surrounding quotes and trailing sentence period are presentation noise.
    while len(s) >= 2 and s[0] == s[-1] and s[0] in "\"'":
        s = s[1:-1].strip()
    s = s.rstrip(".").strip() if s.rstrip(".") else s
    number = parse_number(s)
    if number is not None:
        return AnswerPart("number", format_number(number), number_value=number)
    date = parse_date(s)
    if date is not None:
        return AnswerPart("date", date.isoformat(), date_value=date)
    return AnswerPart("text", s.lower())


def normalize_answer(raw: str) -> NormalizedAnswer:
    """Split on ``|`` and canonicalize each part. Total: never raises."""
    if raw is None or not raw.strip():
        return NormalizedAnswer(())
    return NormalizedAnswer(tuple(_normalize_part(p) for p in raw.split("|")))


def parts_equal(a: AnswerPart, b: AnswerPart) -> bool:
    if a.kind == "number" and b.kind == "number":
        return math.isclose(a.number_value, b.number_value, rel_tol=REL_TOL, abs_tol=1e-9)
    if a.kind != b.kind:
        return False
    if a.kind == "date":
        return a.date_value == b.date_value
    return a.canonical == b.canonical


def denotation_match(pred: NormalizedAnswer, gold: NormalizedAnswer, ordered: bool = False) -> bool:
    """Type-aware equality of answer part multisets (or sequences).

    Default is order-insensitive; pass ``ordered=True`` for positional
    comparison.
    """
    if len(pred.parts) != len(gold.parts):
        return False
    if ordered:
        return all(parts_equal(p, g) for p, g in zip(pred.parts, gold.parts))
    return _multiset_match(list(pred.parts), list(gold.parts))


def _multiset_match(pred: list[AnswerPart], gold: list[AnswerPart]) -> bool:
    # Backtracking bipartite matching: tolerance equality is not transitive,
    # so greedy pairing could miss a valid assignment. Part counts are tiny.
    if not pred:
        return not gold
    head, rest = pred[0], pred[1:]
    for i, candidate in enumerate(gold):
        if parts_equal(head, candidate) and _multiset_match(rest, gold[:i] + gold[i + 1 :]):
            return True
    return False


@dataclass(frozen=True)
class ScoreReport:
    accuracy: float
    n: int
    flags: tuple[bool, ...]


def _fact_label(text: str) -> str | None:
    word = text.strip().strip('"').strip("'").rstrip(".").lower()
    if word in _TRUE_WORDS or word == ENTAILED:
        return ENTAILED
    if word in _FALSE_WORDS or word == REFUTED:
        return REFUTED
    return None


def score_dataset(records, task: str = QA, ordered: bool = False) -> ScoreReport:
    """Score (pred, gold) pairs; accuracy is the mean of per-record flags.

    ``records`` holds objects or dicts with ``pred`` and ``gold`` strings.
    For fact verification, gold labels are entailed/refuted and predictions
    map from TRUE/FALSE/1/0/yes/no; unmappable predictions count as wrong.
    """
    records = list(records)
    if not records:
        raise EmptyDataset("no records to score")
    flags = []
    for record in records:
        pred, gold = _pred_gold(record)
        if task == FACT_VERIFICATION:
            gold_label = _fact_label(gold)
            if gold_label is None:
                raise ValueError(f"fact gold must be entailed/refuted, got {gold!r}")
            flags.append(_fact_label(pred) == gold_label)
        else:
            flags.append(denotation_match(normalize_answer(pred), normalize_answer(gold), ordered))
    return ScoreReport(sum(flags) / len(flags), len(flags), tuple(flags))


def _pred_gold(record) -> tuple[str, str]:
    if isinstance(record, dict):
        return record["pred"], record["gold"]
    return record.pred, record.gold


def reward_fast(correct: bool) -> float:
    """Correctness-only reward: 1 for a correct output, else 0."""
    return 1.0 if correct else 0.0


def reward_cot(format_ok: bool, correct: bool) -> float:
    """Joint format/correctness reward: 1.5 correct and well-formed,
    0.5 well-formed but wrong, 0 for a format violation."""
    if not format_ok:
        return 0.0
    return 1.5 if correct else 0.5
