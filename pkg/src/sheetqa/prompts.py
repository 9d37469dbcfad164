"""Prompt templates for generation and annotation.

Formula-mode prompts embed the spreadsheet view (column letters and row
numbers); answer-mode prompts embed the plain view. The structured-response
templates spell out the literal ``\\n\\n`` separator between the think block
and the payload tag, so generated text can be checked mechanically.

Template text is frozen: golden tests pin the exact bytes.
"""

from __future__ import annotations

from dataclasses import dataclass

from sheetqa.table import Table, render_plain, render_spreadsheet

MODE_DP = "dp"
MODE_FORMULA = "formula"

VARIANT_FAST = "fast"
VARIANT_COT = "cot"

FAST_FORMULA_SYSTEM = (
    "You are an Excel Expert. Based on the Excel table, generate excel formula "
    "to answer the user question."
)

FAST_DP_SYSTEM = (
    "This is table question answering task, based on the given table, answer "
    "the given question. Only output the answer."
)

COT_FORMULA_SYSTEM = (
    "You are an advanced Table-question solving assistant with access to the "
    "Excel Formula Engine Tool. Given a question and the corresponding table, "
    "your task is to generate a formula to solve this question. I'll execute "
    "the generated formula to obtain the final answer.\n"
    "\n"
    "## Response Structure\n"
    "Your response must follow this specific format:\n"
    "1. <think> ...think with less than 300 words ... </think>\\n\\n<formula>=...</formula>\n"
    '2. If there are multiple formulas, join them with "|" '
    '(e.g. "=MAX(A1:A10);=MIN(B2:B5)" ).'
)

COT_DP_SYSTEM = (
    "You are an advanced Table-question solving assistant. Given a question "
    "and the corresponding table, your task is to analyze the question and "
    "generate the final answer.\n"
    "\n"
    "## Response Structure\n"
    "Your response must follow this specific format:\n"
    "1. <think> ...think with less than 300 words ... </think>\\n\\n<answer>The most concise answer</answer>\n"
    "2. Ensure that the content inside `<answer>...</answer>` is as concise as "
    'possible (e.g. "21 years" should be "21"). Additionally, If there are '
    'multiple answers, join them with "|" (e.g. "Tom|Carl|Lisa").'
)

ANNOTATE_DIRECT_SYSTEM = (
    "Given an Excel table, a question, and the answer to the question. Write "
    "an Excel formula (=???) to obtain the answer. You should only output the "
    "formula."
)

_RETRY_INSTRUCTION = (
    "In the previous rounds, you attempted to generate the following formulas, "
    "but none of them is correct. Please try to generate the correct formula. "
    "You should only output the Formula."
)


@dataclass(frozen=True)
class PromptSpec:
    mode: str  # "dp" | "formula"
    variant: str  # "fast" | "cot"
    system: str
    user: str


def _table_view(mode: str, table: Table) -> str:
    return render_spreadsheet(table) if mode == MODE_FORMULA else render_plain(table)


def _inference_user(mode: str, table: Table, title: str, question: str) -> str:
    tag = "[Formula]" if mode == MODE_FORMULA else "[Answer]"
    return (
        f"[Table Title] {title}\n"
        f"[Table]\n{_table_view(mode, table)}\n"
        f"[Question]\n{question}\n"
        f"{tag}"
    )


def build_prompt(mode: str, variant: str, table: Table, title: str, question: str) -> PromptSpec:
    """Generation prompt for one (mode, variant) combination."""
    if mode not in (MODE_DP, MODE_FORMULA):
        raise ValueError(f"unknown mode: {mode!r}")
    if variant not in (VARIANT_FAST, VARIANT_COT):
        raise ValueError(f"unknown variant: {variant!r}")
    if variant == VARIANT_FAST:
        system = FAST_FORMULA_SYSTEM if mode == MODE_FORMULA else FAST_DP_SYSTEM
    else:
        system = COT_FORMULA_SYSTEM if mode == MODE_FORMULA else COT_DP_SYSTEM
    return PromptSpec(mode, variant, system, _inference_user(mode, table, title, question))


def annotate_direct_prompt(
    table: Table,
    title: str,
    question: str,
    gold: str,
    wrong_attempts: list[tuple[str, str]] | None = None,
) -> PromptSpec:
    """Direct formula-annotation prompt; pass failed (formula, result) pairs
    from earlier rounds to get the retry wording."""
    lines = [
        f"[Table Title] {title}",
        "[Table]",
        _table_view(MODE_FORMULA, table),
        f"[Question] {question}",
        f"[Gold Answer] {gold}",
    ]
    if wrong_attempts:
        lines.append(_RETRY_INSTRUCTION)
        lines.append("[The wrong formula you generate in previous rounds]")
        for i, (formula, result) in enumerate(wrong_attempts, start=1):
            lines.append(f"{i}. Formula is: {formula} ; Execution Results is: {result}")
    lines.append("[The Formula You think to answer the question]")
    return PromptSpec(MODE_FORMULA, VARIANT_FAST, ANNOTATE_DIRECT_SYSTEM, "\n".join(lines))


def annotate_cot_prompt(mode: str, table: Table, title: str, question: str) -> PromptSpec:
    """Structured-response annotation prompt (no gold answer shown)."""
    system = COT_FORMULA_SYSTEM if mode == MODE_FORMULA else COT_DP_SYSTEM
    user = (
        f"[Table Title] {title}\n"
        f"[Table]\n{_table_view(mode, table)}\n"
        f"[Question] {question}\n"
        "[The Formula You think to answer the question]"
    )
    return PromptSpec(mode, VARIANT_COT, system, user)
