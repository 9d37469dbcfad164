"""Response parsing and the annotation / inference loops.

Direct annotation samples a batch of formulas per round, executes them, and
keeps the most concise correct one, feeding failures back into the retry
prompt for up to three rounds. Structured annotation takes one sample per
attempt and keeps it only when both the tag format and the (executed)
answer check out. Accepted records always re-verify against gold.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

from sheetqa.answers import NormalizedAnswer, denotation_match, normalize_answer
from sheetqa.client import ANNOTATION_TEMPERATURE, INFERENCE_TEMPERATURE, ChatClient
from sheetqa.formula.evaluator import execute_all, first_error, format_result
from sheetqa.formula.values import error_display
from sheetqa.prompts import (
    MODE_DP,
    MODE_FORMULA,
    VARIANT_COT,
    VARIANT_FAST,
    annotate_cot_prompt,
    annotate_direct_prompt,
    build_prompt,
)
from sheetqa.table import Table
from sheetqa.voting import NoValidCandidates, collect_candidates, vote

ACCEPTED = "accepted"
EXHAUSTED = "exhausted"

PAYLOAD_FORMULA = "formula"
PAYLOAD_ANSWER = "answer"

_COT_RE = re.compile(
    r"\A\s*<think>(?P<think>.*?)</think>\s*"
    r"<(?P<tag>formula|answer)>(?P<payload>.*?)</(?P=tag)>\s*\Z",
    re.DOTALL,
)

_ANY_TAG_RE = re.compile(r"<(formula|answer)>(.*?)</\1>", re.DOTALL)
_THINK_RE = re.compile(r"<think>.*?</think>", re.DOTALL)
_TAG_TOKEN_RE = re.compile(r"</?(?:think|formula|answer)>")


@dataclass(frozen=True)
class ParsedResponse:
    think: str | None
    payload: str
    payload_kind: str
    format_ok: bool


def parse_response(raw: str, variant: str, expected_kind: str) -> ParsedResponse:
    """Extract the payload from a model response.

    Fast responses pass through whole. Structured responses must be exactly
    one think block followed by one tag of the expected kind; anything else
    sets format_ok=False with a best-effort payload.
    """
    if variant == VARIANT_FAST:
        return ParsedResponse(None, raw.strip(), expected_kind, True)
    m = _COT_RE.match(raw)
    if (
        m
        and m.group("tag") == expected_kind
        # Lazy groups can backtrack across extra blocks; a well-formed
        # response has no tag tokens inside the think or payload segments.
        and not _TAG_TOKEN_RE.search(m.group("think"))
        and not _TAG_TOKEN_RE.search(m.group("payload"))
    ):
        return ParsedResponse(m.group("think").strip(), m.group("payload").strip(), expected_kind, True)
    return ParsedResponse(*_best_effort(raw, expected_kind), format_ok=False)


def _best_effort(raw: str, expected_kind: str) -> tuple[str | None, str, str]:
    think_match = _THINK_RE.search(raw)
    think = think_match.group(0)[len("<think>") : -len("</think>")].strip() if think_match else None
    tags = _ANY_TAG_RE.findall(raw)
    for kind, payload in tags:
        if kind == expected_kind:
            return think, payload.strip(), expected_kind
    if tags:
        kind, payload = tags[0]
        return think, payload.strip(), kind
    remainder = _THINK_RE.sub("", raw).strip()
    return think, remainder, expected_kind


@dataclass(frozen=True)
class AnnotationRecord:
    question: str
    table_id: str
    gold: NormalizedAnswer
    mode: str
    rounds_used: int
    status: str  # "accepted" | "exhausted"
    formula: str | None = None
    answer: str | None = None
    cot: str | None = None

    def to_dict(self) -> dict:
        return {
            "question": self.question,
            "table_id": self.table_id,
            "gold": self.gold.text,
            "mode": self.mode,
            "rounds_used": self.rounds_used,
            "status": self.status,
            "formula": self.formula,
            "answer": self.answer,
            "cot": self.cot,
        }


def _formula_answer(formula: str, table: Table) -> tuple[str | None, str]:
    """Execute a formula; returns (answer or None, display text for retry
    feedback)."""
    results = execute_all(formula, table)
    answer = format_result(results)
    if answer is not None:
        return answer, answer
    return None, error_display(first_error(results) or "UNSUPPORTED")


def annotate_direct(
    question: str,
    table: Table,
    gold: str,
    client: ChatClient,
    title: str = "",
    table_id: str = "",
    n: int = 10,
    max_rounds: int = 3,
    temperature: float = ANNOTATION_TEMPERATURE,
    tokenizer: Callable[[str], int] | None = None,
) -> AnnotationRecord:
    """Sample-execute-select loop for direct formula annotation.

    Each round draws ``n`` formulas; among those whose executed result
    matches gold, the most concise wins (fewest tokens, then shortest text,
    then sampling order). Failed formulas and their results are folded into
    the next round's prompt, deduplicated.
    """
    count_tokens = tokenizer or len
    gold_norm = normalize_answer(gold)
    wrong: list[tuple[str, str]] = []
    seen_wrong: set[str] = set()

    for round_no in range(1, max_rounds + 1):
        prompt = annotate_direct_prompt(table, title, question, gold, wrong or None)
        replies = client.sample(prompt, n=n, temperature=temperature)
        correct: list[tuple[int, int, int, str]] = []
        for index, raw in enumerate(replies):
            formula = raw.strip()
            if not formula:
                continue
            answer, display = _formula_answer(formula, table)
            if answer is not None and denotation_match(normalize_answer(answer), gold_norm):
                correct.append((count_tokens(formula), len(formula), index, formula))
            elif formula not in seen_wrong:
                seen_wrong.add(formula)
                wrong.append((formula, display))
        if correct:
            correct.sort()
            return AnnotationRecord(
                question=question,
                table_id=table_id,
                gold=gold_norm,
                mode=MODE_FORMULA,
                rounds_used=round_no,
                status=ACCEPTED,
                formula=correct[0][3],
            )
    return AnnotationRecord(
        question=question,
        table_id=table_id,
        gold=gold_norm,
        mode=MODE_FORMULA,
        rounds_used=max_rounds,
        status=EXHAUSTED,
    )


def annotate_cot(
    question: str,
    table: Table,
    gold: str,
    mode: str,
    client: ChatClient,
    title: str = "",
    table_id: str = "",
    max_attempts: int = 3,
    temperature: float = ANNOTATION_TEMPERATURE,
) -> AnnotationRecord:
    """One structured sample per attempt; keep it only if the format holds
    and the answer (or executed formula result) matches gold."""
    gold_norm = normalize_answer(gold)
    expected_kind = PAYLOAD_FORMULA if mode == MODE_FORMULA else PAYLOAD_ANSWER
    prompt = annotate_cot_prompt(mode, table, title, question)

    for attempt in range(1, max_attempts + 1):
        raw = client.sample(prompt, n=1, temperature=temperature)[0]
        parsed = parse_response(raw, VARIANT_COT, expected_kind)
        if not parsed.format_ok:
            continue
        if mode == MODE_FORMULA:
            answer, _ = _formula_answer(parsed.payload, table)
            correct = answer is not None and denotation_match(
                normalize_answer(answer), gold_norm
            )
        else:
            correct = denotation_match(normalize_answer(parsed.payload), gold_norm)
        if correct:
            return AnnotationRecord(
                question=question,
                table_id=table_id,
                gold=gold_norm,
                mode=mode,
                rounds_used=attempt,
                status=ACCEPTED,
                formula=parsed.payload if mode == MODE_FORMULA else None,
                answer=parsed.payload if mode == MODE_DP else None,
                cot=parsed.think,
            )
    return AnnotationRecord(
        question=question,
        table_id=table_id,
        gold=gold_norm,
        mode=mode,
        rounds_used=max_attempts,
        status=EXHAUSTED,
    )


@dataclass(frozen=True)
class InferenceSettings:
    n_formula: int = 5
    n_dp: int = 5
    variant: str = VARIANT_FAST
    temperature: float = INFERENCE_TEMPERATURE
    tie_break: str = "formula-first"

    def __post_init__(self):
        if self.n_formula + self.n_dp < 1:
            raise ValueError("need at least one candidate overall")


def infer_question(
    client: ChatClient,
    table: Table,
    title: str,
    question: str,
    settings: InferenceSettings = InferenceSettings(),
) -> dict:
    """Generate both modes, execute formulas, and vote the final answer.

    Returns a JSON-ready dict; an unanswerable question (every candidate
    invalid) yields an empty answer rather than an exception.
    """
    formula_payloads: list[str] = []
    dp_payloads: list[str] = []
    if settings.n_formula:
        prompt = build_prompt(MODE_FORMULA, settings.variant, table, title, question)
        for raw in client.sample(prompt, n=settings.n_formula, temperature=settings.temperature):
            formula_payloads.append(
                parse_response(raw, settings.variant, PAYLOAD_FORMULA).payload
            )
    if settings.n_dp:
        prompt = build_prompt(MODE_DP, settings.variant, table, title, question)
        for raw in client.sample(prompt, n=settings.n_dp, temperature=settings.temperature):
            dp_payloads.append(parse_response(raw, settings.variant, PAYLOAD_ANSWER).payload)

    candidates = collect_candidates(formula_payloads, dp_payloads, table)
    try:
        outcome = vote(candidates, tie_break=settings.tie_break)
    except NoValidCandidates:
        return {
            "answer": "",
            "n_valid": 0,
            "tally": {},
            "tie_broken": False,
        }
    return {
        "answer": outcome.winner.text,
        "n_valid": outcome.n_valid,
        "tally": outcome.tally,
        "tie_broken": outcome.tie_broken,
    }
