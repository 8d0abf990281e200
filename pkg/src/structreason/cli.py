"""Command-line interface.

Subcommands: ``run`` (batch evaluation with report + figures), ``replay``
(re-run recorded traces against a scripted backend and check determinism),
``sql-exec`` (execute one query against a database file, print TSV), and
``inspect`` (pretty-print a trace). Exit codes: 0 success, 1 failure,
2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import sql
from .backends import RemoteChatBackend, ScriptedBackend
from .database import load_database, load_database_dir
from .errors import ConfigError, DataError, SqlError, StructReasonError
from .evaluation import (
    load_dataset,
    oracle_backend_factory,
    replay_trace,
    run_eval,
)
from .orchestrator import KgqaConfig, SqlGenConfig, TableQaConfig
from .prompts import Task, TemplateRegistry, load_template_overrides
from .traces import load_trace, trace_to_json, validate_trace


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="structreason")
    sub = p.add_subparsers(dest="cmd", required=True)

    run = sub.add_parser("run", help="Evaluate a JSONL dataset and write a report")
    run.add_argument("--task", required=True, choices=[t.value for t in Task])
    run.add_argument("--data", required=True, help="JSONL dataset file")
    run.add_argument("--artifacts", required=True, help="Directory holding the data artifacts")
    run.add_argument("--backend", required=True, choices=["remote", "scripted", "oracle"])
    run.add_argument("--script", help="Script file for the scripted backend")
    run.add_argument("--backend-config", help="JSON config for the remote backend")
    run.add_argument("--templates", help="JSON template override file")
    run.add_argument("--out", required=True, help="Output directory for traces and report")
    run.add_argument("--max-hops", type=int, default=3)
    run.add_argument("--workers", type=int, default=1)

    replay = sub.add_parser("replay", help="Re-run recorded traces with a scripted backend")
    replay.add_argument("--trace-dir", required=True)
    replay.add_argument("--artifacts", help="Override the artifacts directory recorded in traces")
    replay.add_argument("--templates", help="JSON template override file")

    sql_exec = sub.add_parser("sql-exec", help="Execute a query against a database file")
    sql_exec.add_argument("database", help="Database JSON file or CSV directory")
    sql_exec.add_argument("query")

    inspect = sub.add_parser("inspect", help="Pretty-print a recorded trace")
    inspect.add_argument("--trace", required=True)
    inspect.add_argument("--full", action="store_true", help="Do not truncate long fields")
    return p


def _load_templates(path: str | None) -> TemplateRegistry:
    registry = TemplateRegistry.builtin()
    if path:
        registry = registry.with_overrides(load_template_overrides(path))
    return registry


def _build_backend(args):
    if args.backend == "oracle":
        return oracle_backend_factory
    if args.backend == "scripted":
        if not args.script:
            raise ConfigError("--backend scripted requires --script")
        return ScriptedBackend.from_file(args.script)
    if not args.backend_config:
        raise ConfigError("--backend remote requires --backend-config")
    try:
        config = json.loads(Path(args.backend_config).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read backend config {args.backend_config}: {exc}") from exc
    if not isinstance(config, dict) or "endpoint" not in config or "model" not in config:
        raise ConfigError('backend config needs "endpoint" and "model"')
    return RemoteChatBackend(
        config["endpoint"],
        config["model"],
        timeout=float(config.get("timeout", 60.0)),
        max_retries=int(config.get("max_retries", 3)),
        backoff=float(config.get("backoff", 0.5)),
        max_in_flight=int(config.get("max_in_flight", 4)),
    )


def _cmd_run(args) -> int:
    templates = _load_templates(args.templates)
    dataset = load_dataset(args.data)
    task = Task(args.task)
    mismatched = [e.id for e in dataset if e.task is not task]
    if mismatched:
        raise DataError(f"examples {mismatched} do not match --task {task.value}")
    backend = _build_backend(args)
    report = run_eval(
        dataset,
        backend,
        artifacts_dir=args.artifacts,
        out_dir=args.out,
        kgqa_cfg=KgqaConfig(max_hops=args.max_hops, templates=templates),
        tableqa_cfg=TableQaConfig(templates=templates),
        sql_cfg=SqlGenConfig(templates=templates),
        workers=args.workers,
    )
    print(
        f"aggregate={report.aggregate:.4f} scored={report.scored} "
        f"excluded={report.excluded} llm_calls={report.total_llm_calls}"
    )
    for category, count in report.category_counts.items():
        print(f"  {category}: {count}")
    print(f"report written to {args.out}")
    return 0


def _cmd_replay(args) -> int:
    trace_dir = Path(args.trace_dir)
    paths = sorted(trace_dir.glob("*.json"))
    if not paths:
        raise DataError(f"no trace files in {trace_dir}")
    templates = _load_templates(args.templates)
    mismatches = 0
    for path in paths:
        original = load_trace(path)
        validate_trace(original, templates)
        rerun = replay_trace(original, artifacts_dir=args.artifacts, templates=templates)
        if trace_to_json(rerun) == trace_to_json(original):
            print(f"{path.name}: identical")
        else:
            mismatches += 1
            print(f"{path.name}: MISMATCH")
    if mismatches:
        print(f"{mismatches} of {len(paths)} traces diverged")
        return 1
    print(f"all {len(paths)} traces replayed identically")
    return 0


def _cmd_sql_exec(args) -> int:
    db_path = Path(args.database)
    if db_path.is_dir():
        db = load_database_dir(db_path)
    else:
        with open(db_path, "rb") as fh:
            db = load_database(fh)
    try:
        result = sql.execute(db, sql.parse_sql(args.query))
    except SqlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print("\t".join(result.columns))
    for row in result.rows:
        print("\t".join(str(v) for v in row))
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return 0


def _clip(text: str, full: bool, limit: int = 300) -> str:
    if full or len(text) <= limit:
        return text
    return text[:limit] + f"... [{len(text)} chars]"


def _cmd_inspect(args) -> int:
    trace = load_trace(args.trace)
    print(f"question: {trace.question}")
    print(f"task:     {trace.task.value}")
    print(f"outcome:  {trace.outcome_kind} -> {trace.outcome}")
    print(f"steps:    {len(trace.steps)} ({trace.llm_call_count} model calls)")
    for step in trace.steps:
        print(f"\n--- step {step.step_index} [{step.stage_tag}]"
              f"{' (truncated evidence)' if step.truncated else ''}")
        if step.interface_invoked:
            print(f"interface: {step.interface_invoked}({step.interface_input})")
        if step.linearized_evidence:
            print(f"evidence:  {_clip(step.linearized_evidence, args.full)}")
        if step.prompt:
            print(f"prompt:    {_clip(step.prompt, args.full)}")
            print(f"response:  {_clip(step.raw_response, args.full)}")
        if step.parsed_decision:
            print(f"decision:  {_clip(step.parsed_decision, args.full)}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "replay": _cmd_replay,
        "sql-exec": _cmd_sql_exec,
        "inspect": _cmd_inspect,
    }
    try:
        return handlers[args.cmd](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except StructReasonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
