"""Batch-oriented command line interface.

Every subcommand is pipeable: JSONL in, JSONL (or JSON) out, diagnostics on
stderr, no interactive prompts. Exit codes: 0 handled completion, 1 usage
error, 2 I/O or endpoint failure. Option precedence is flags > environment
> config file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from sheetqa.annotate import (
    AnnotationRecord,
    InferenceSettings,
    annotate_cot,
    annotate_direct,
    infer_question,
)
from sheetqa.answers import EmptyDataset, score_dataset
from sheetqa.client import (
    AuthError,
    ChatClient,
    EndpointConfig,
    EndpointUnavailable,
    ScriptedTransport,
)
from sheetqa.cells import canonical_text
from sheetqa.formula.evaluator import execute_all, first_error
from sheetqa.prompts import MODE_DP, MODE_FORMULA, VARIANT_COT, VARIANT_FAST
from sheetqa.sql2formula import (
    ColumnMap,
    SqlSyntaxError,
    UnmappedColumn,
    UnsupportedSql,
    UnsupportedTemplate,
    classify_template,
    convert,
    parse_sql,
    simplify_lookup,
)
from sheetqa.table import Table, load_table_file
from sheetqa.voting import NoValidCandidates, collect_candidates, vote

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2


def _read_jsonl(path: str) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: bad JSON: {exc}") from exc
    return records


def _write_lines(lines, output: str | None):
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            for line in lines:
                fh.write(line + "\n")
    else:
        for line in lines:
            print(line)


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _endpoint_from_args(args, config: dict) -> EndpointConfig:
    # flags > env > config file
    def pick(flag, env_name, key, default=None):
        if flag is not None:
            return flag
        env_value = os.environ.get(env_name)
        if env_value:
            return env_value
        return config.get(key, default)

    return EndpointConfig(
        base_url=pick(args.endpoint, "OPENAI_BASE_URL", "base_url", "") or "",
        api_key=pick(args.api_key, "OPENAI_API_KEY", "api_key", "") or "",
        model=pick(args.model, "OPENAI_MODEL", "model", "") or "",
        max_concurrency=int(config.get("max_concurrency", 4)),
        seed=args.seed,
    )


def _client_from_args(args, config: dict) -> ChatClient:
    transport = None
    if args.mock_replies:
        with open(args.mock_replies, encoding="utf-8") as fh:
            transport = ScriptedTransport(json.load(fh))
        return ChatClient(EndpointConfig(base_url="mock"), transport=transport)
    return ChatClient(_endpoint_from_args(args, config))


def _load_record_table(record: dict, base_dir: Path) -> Table:
    path = Path(record["table_path"])
    if not path.is_absolute():
        path = base_dir / path
    return load_table_file(
        str(path),
        title=record.get("title", ""),
        header_rows=record.get("header_rows", 0),
    )


def cmd_exec(args) -> int:
    table = load_table_file(args.table, format=args.format, header_rows=args.header_rows)
    results = execute_all(args.formula, table)
    error = first_error(results)
    if error is not None:
        print(json.dumps({"status": "error", "values": [], "error_code": error}))
        return EXIT_OK
    values: list[str] = []
    for result in results:
        if result.kind == "scalar":
            values.append(canonical_text(result.value))
        else:
            values.extend(canonical_text(v) for v in result.values)
    print(json.dumps({"status": "ok", "values": values, "error_code": None}))
    return EXIT_OK


def _convert_one(sql: str, cmap: ColumnMap, table: Table | None) -> dict:
    try:
        ast = parse_sql(sql)
        template = classify_template(ast)
        if template == "UNSUPPORTED":
            return {"formula": None, "template_id": template, "simplified": False}
        formula = convert(ast, cmap)
    except (UnsupportedSql, UnsupportedTemplate):
        return {"formula": None, "template_id": "UNSUPPORTED", "simplified": False}
    simplified = False
    if table is not None:
        reduced = simplify_lookup(formula, table)
        simplified = reduced != formula
        formula = reduced
    return {"formula": formula, "template_id": template, "simplified": simplified}


def cmd_convert(args) -> int:
    if args.input:
        base_dir = Path(args.input).parent
        lines = []
        for record in _read_jsonl(args.input):
            cmap = ColumnMap.from_dict(record["column_map"])
            table = (
                _load_record_table(record, base_dir) if record.get("table_path") else None
            )
            lines.append(json.dumps(_convert_one(record["sql"], cmap, table)))
        _write_lines(lines, args.output)
        return EXIT_OK
    if not args.sql or not args.map:
        print("convert needs --sql and --map (or --input for batch mode)", file=sys.stderr)
        return EXIT_USAGE
    with open(args.map, encoding="utf-8") as fh:
        cmap = ColumnMap.from_dict(json.load(fh))
    table = load_table_file(args.table) if args.table else None
    try:
        ast = parse_sql(args.sql)
        formula = convert(ast, cmap)
    except (UnsupportedSql, UnsupportedTemplate) as exc:
        print(f"unsupported query shape: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SqlSyntaxError, UnmappedColumn) as exc:
        print(f"bad query or column map: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if table is not None:
        formula = simplify_lookup(formula, table)
    print(formula)
    return EXIT_OK


def cmd_eval(args) -> int:
    preds = _read_jsonl(args.pred)
    golds = _read_jsonl(args.gold)
    if len(preds) != len(golds):
        print(
            f"prediction/gold length mismatch: {len(preds)} vs {len(golds)}",
            file=sys.stderr,
        )
        return EXIT_USAGE
    task = "fact_verification" if args.task == "fact" else "qa"
    records = [
        {
            "pred": str(p.get("answer", p.get("pred", ""))),
            "gold": str(g.get("answer", g.get("gold", ""))),
        }
        for p, g in zip(preds, golds)
    ]
    try:
        report = score_dataset(records, task=task, ordered=args.ordered)
    except EmptyDataset:
        print("no records to score", file=sys.stderr)
        return EXIT_USAGE
    print(json.dumps({"accuracy": round(report.accuracy, 6), "n": report.n}))
    return EXIT_OK


def cmd_vote(args) -> int:
    table = load_table_file(args.table) if args.table else None
    records = _read_jsonl(args.candidates)
    formula_outputs = [r["output"] for r in records if r.get("mode") == MODE_FORMULA]
    dp_outputs = [r["output"] for r in records if r.get("mode") != MODE_FORMULA]
    if formula_outputs and table is None:
        print("formula candidates need --table to execute against", file=sys.stderr)
        return EXIT_USAGE
    candidates = collect_candidates(formula_outputs, dp_outputs, table)
    try:
        outcome = vote(candidates, tie_break=args.tie_break)
    except NoValidCandidates:
        print("no valid candidates", file=sys.stderr)
        return EXIT_USAGE
    print(outcome.winner.text)
    return EXIT_OK


def cmd_annotate(args, config: dict) -> int:
    if args.variant == "direct" and args.mode == MODE_DP:
        print("direct annotation produces formulas; use --mode formula", file=sys.stderr)
        return EXIT_USAGE
    client = _client_from_args(args, config)
    base_dir = Path(args.input).parent
    records = _read_jsonl(args.input)

    def run(record: dict) -> AnnotationRecord:
        table = _load_record_table(record, base_dir)
        if args.variant == "direct":
            return annotate_direct(
                record["question"],
                table,
                str(record["gold"]),
                client,
                title=record.get("title", ""),
                table_id=str(record.get("id", "")),
                n=args.n,
                max_rounds=args.max_rounds,
            )
        return annotate_cot(
            record["question"],
            table,
            str(record["gold"]),
            args.mode,
            client,
            title=record.get("title", ""),
            table_id=str(record.get("id", "")),
            max_attempts=args.max_rounds,
        )

    outputs = _run_jobs(run, records, args.jobs)
    _write_lines([json.dumps(r.to_dict()) for r in outputs], args.output)
    return EXIT_OK


def cmd_infer(args, config: dict) -> int:
    if args.n_formula + args.n_dp < 1:
        print("need at least one candidate: raise --n-formula or --n-dp", file=sys.stderr)
        return EXIT_USAGE
    client = _client_from_args(args, config)
    base_dir = Path(args.input).parent
    records = _read_jsonl(args.input)
    settings = InferenceSettings(
        n_formula=args.n_formula,
        n_dp=args.n_dp,
        variant=args.variant,
        tie_break=args.tie_break,
    )

    def run(record: dict) -> dict:
        table = _load_record_table(record, base_dir)
        result = infer_question(
            client, table, record.get("title", ""), record["question"], settings
        )
        result["id"] = record.get("id")
        return result

    outputs = _run_jobs(run, records, args.jobs)
    _write_lines([json.dumps(r) for r in outputs], args.output)
    return EXIT_OK


def _run_jobs(fn, records, jobs: int):
    """Apply fn to records, preserving input order in the output."""
    if jobs <= 1:
        return [fn(r) for r in records]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, records))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sheetqa",
        description="Table QA toolkit: formula execution, SQL conversion, scoring, voting, annotation.",
    )
    parser.add_argument("--config", help="JSON config file (lowest precedence)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exec", help="execute a formula against a table file")
    p.add_argument("--table", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--format", choices=["markdown", "csv", "json-grid"], default=None)
    p.add_argument("--header-rows", type=int, default=0)

    p = sub.add_parser("convert", help="convert restricted SQL to a formula")
    p.add_argument("--sql")
    p.add_argument("--map", help="JSON column map: {columns: {...}, data_rows: [s, e]}")
    p.add_argument("--table", help="table file for coordinate simplification")
    p.add_argument("--input", help="batch JSONL: {sql, column_map, table_path}")
    p.add_argument("--output")

    p = sub.add_parser("eval", help="score predictions against gold answers")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--task", choices=["qa", "fact"], default="qa")
    p.add_argument("--ordered", action="store_true", help="order-sensitive matching")

    p = sub.add_parser("vote", help="majority-vote candidate outputs")
    p.add_argument("--candidates", required=True, help="JSONL: {mode, output}")
    p.add_argument("--table", help="table file for executing formula candidates")
    p.add_argument("--tie-break", choices=["formula-first", "order"], default="formula-first")

    for name in ("annotate", "infer"):
        p = sub.add_parser(name, help=f"{name} questions via a chat endpoint")
        p.add_argument("--input", required=True)
        p.add_argument("--output")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--endpoint", help="chat-completions base URL")
        p.add_argument("--api-key")
        p.add_argument("--model")
        p.add_argument("--mock-replies", help="JSON list of scripted reply batches")
        if name == "annotate":
            p.add_argument("--mode", choices=[MODE_FORMULA, MODE_DP], required=True)
            p.add_argument("--variant", choices=["direct", "cot"], required=True)
            p.add_argument("--n", type=int, default=10, help="samples per round (direct)")
            p.add_argument("--max-rounds", type=int, default=3)
        else:
            p.add_argument("--n-formula", type=int, default=5)
            p.add_argument("--n-dp", type=int, default=5)
            p.add_argument("--variant", choices=[VARIANT_FAST, VARIANT_COT], default=VARIANT_FAST)
            p.add_argument("--tie-break", choices=["formula-first", "order"], default="formula-first")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        config = _load_config_file(args.config)
        if args.command == "exec":
            return cmd_exec(args)
        if args.command == "convert":
            return cmd_convert(args)
        if args.command == "eval":
            return cmd_eval(args)
        if args.command == "vote":
            return cmd_vote(args)
        if args.command == "annotate":
            return cmd_annotate(args, config)
        if args.command == "infer":
            return cmd_infer(args, config)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (EndpointUnavailable, AuthError) as exc:
        print(f"endpoint failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
