"""Dataset loading, metrics, and batch evaluation runs.

Metrics: hits@1 (first predicted answer matches any gold answer),
denotation accuracy (set equality of predictions and gold), and execution
accuracy (predicted and gold SQL produce equal result sets). Answers are
normalized before comparison: trimmed, case-folded, internal whitespace
collapsed, articles removed, numeric forms canonicalized.

Scoring uses the first predicted answer; responses with multiple answers
are flagged in the report so a human can audit them. Gold SQL outside the
engine's subset excludes the example from the denominator and is counted
under "unsupported-gold-sql" rather than being silently dropped or guessed.
"""

from __future__ import annotations

import io
import json
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from . import sql
from .backends import Backend, GoldOracleBackend
from .database import Database, load_database, load_database_dir
from .errors import DataError, SqlError
from .kg import KnowledgeGraph, load_kg
from .orchestrator import (
    KgqaConfig,
    SqlGenConfig,
    TableQaConfig,
    answer_kgqa,
    answer_tableqa,
    generate_sql,
)
from .prompts import Task
from .tables import Table, canonical_numeric, load_table, load_table_csv, parse_numeric
from .traces import OUTCOME_FAILURE, ReasoningTrace, save_trace

_ARTICLE_RE = re.compile(r"\b(a|an|the)\b")
_WS_RE = re.compile(r"\s+")


def normalize_answer(text: str) -> str:
    """Canonical comparison form of an answer string. Idempotent."""
    s = text.strip().strip("\"'“”‘’")
    s = s.rstrip(".").strip()
    s = s.casefold()
    s = _ARTICLE_RE.sub(" ", s)
    s = _WS_RE.sub(" ", s).strip()
    numeric = parse_numeric(s)
    if numeric is not None:
        return canonical_numeric(numeric)
    return s


def hits_at_1(predicted: list[str], gold: Iterable[str]) -> int:
    """1 iff the first predicted answer matches any gold answer."""
    if not predicted:
        return 0
    gold_set = {normalize_answer(g) for g in gold}
    return 1 if normalize_answer(predicted[0]) in gold_set else 0


def denotation_accuracy(predicted: list[str], gold: Iterable[str]) -> int:
    """1 iff the predicted and gold answer sets are equal after normalization."""
    predicted_set = {normalize_answer(p) for p in predicted}
    gold_set = {normalize_answer(g) for g in gold}
    return 1 if predicted_set == gold_set else 0


def execution_accuracy(db: Database, predicted_sql: str, gold_sql: str) -> int | None:
    """1 iff both queries execute to equal results; 0 on any predicted-side
    failure. Returns None when the gold SQL itself is outside the supported
    subset (the example must then be excluded from the denominator)."""
    try:
        gold_result = sql.execute(db, sql.parse_sql(gold_sql))
    except SqlError:
        return None
    try:
        predicted_result = sql.execute(db, sql.parse_sql(predicted_sql))
    except SqlError:
        return 0
    return 1 if sql.results_equal(predicted_result, gold_result) else 0


@dataclass
class QaExample:
    id: str
    question: str
    task: Task
    data_ref: str
    topic_entity: str | None = None
    gold_answers: list[str] | None = None
    gold_sql: str | None = None
    gold_intermediates: dict | None = None
    statement: bool = False

    def __post_init__(self):
        if self.task is Task.TEXT2SQL:
            if self.gold_sql is None or self.gold_answers is not None:
                raise DataError(f"example {self.id}: text2sql needs gold_sql only")
        else:
            if self.gold_answers is None or self.gold_sql is not None:
                raise DataError(f"example {self.id}: {self.task.value} needs gold_answers only")


def load_dataset(source: str | Path | io.TextIOBase) -> list[QaExample]:
    """Read a JSONL dataset, one example per line."""
    if isinstance(source, (str, Path)):
        try:
            raw = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot read dataset {source}: {exc}") from exc
    else:
        raw = source.read()
    examples = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
            examples.append(
                QaExample(
                    id=str(doc["id"]),
                    question=doc["question"],
                    task=Task(doc["task"]),
                    data_ref=doc["data_ref"],
                    topic_entity=doc.get("topic_entity"),
                    gold_answers=doc.get("gold_answers"),
                    gold_sql=doc.get("gold_sql"),
                    gold_intermediates=doc.get("gold_intermediates"),
                    statement=bool(doc.get("statement", False)),
                )
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise DataError(f"dataset line {lineno}: {exc}") from exc
    return examples


@dataclass
class ExampleResult:
    id: str
    task: str
    score: int | None
    category: str | None
    multi_answer: bool
    llm_calls: int
    wall_time_ms: float


@dataclass
class EvalReport:
    results: list[ExampleResult]
    aggregate: float
    category_counts: dict[str, int]
    multi_answer_count: int
    total_llm_calls: int
    wall_time_ms: float
    scored: int
    excluded: int

    @classmethod
    def build(cls, results: list[ExampleResult], wall_time_ms: float) -> "EvalReport":
        scored = [r for r in results if r.score is not None]
        aggregate = sum(r.score for r in scored) / len(scored) if scored else 0.0
        counts: dict[str, int] = {}
        for r in results:
            if r.category:
                counts[r.category] = counts.get(r.category, 0) + 1
        return cls(
            results=results,
            aggregate=aggregate,
            category_counts=dict(sorted(counts.items())),
            multi_answer_count=sum(1 for r in results if r.multi_answer),
            total_llm_calls=sum(r.llm_calls for r in results),
            wall_time_ms=wall_time_ms,
            scored=len(scored),
            excluded=len(results) - len(scored),
        )

    def to_dict(self) -> dict:
        return {
            "aggregate": self.aggregate,
            "scored": self.scored,
            "excluded": self.excluded,
            "category_counts": self.category_counts,
            "multi_answer_count": self.multi_answer_count,
            "total_llm_calls": self.total_llm_calls,
            "wall_time_ms": self.wall_time_ms,
            "results": [
                {
                    "id": r.id,
                    "task": r.task,
                    "score": r.score,
                    "category": r.category,
                    "multi_answer": r.multi_answer,
                    "llm_calls": r.llm_calls,
                    "wall_time_ms": r.wall_time_ms,
                }
                for r in self.results
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        """Parse a persisted report, recomputing and checking its summary
        fields against the per-example scores."""
        try:
            doc = json.loads(text)
            results = [ExampleResult(**entry) for entry in doc["results"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed report: {exc}") from exc
        report = cls.build(results, wall_time_ms=doc["wall_time_ms"])
        checks = [
            ("aggregate", report.aggregate),
            ("category_counts", report.category_counts),
            ("multi_answer_count", report.multi_answer_count),
            ("total_llm_calls", report.total_llm_calls),
            ("scored", report.scored),
            ("excluded", report.excluded),
        ]
        for key, recomputed in checks:
            persisted = doc.get(key)
            if key == "aggregate":
                consistent = abs(recomputed - persisted) <= 1e-9
            else:
                consistent = persisted == recomputed
            if not consistent:
                raise DataError(
                    f"report field {key!r} ({persisted!r}) does not match the "
                    f"value recomputed from per-example scores ({recomputed!r})"
                )
        return report


BackendFactory = Callable[[QaExample], Backend]


def oracle_backend_factory(example: QaExample) -> GoldOracleBackend:
    """Per-example gold oracle built from the dataset annotations."""
    return GoldOracleBackend.from_gold(
        example.gold_intermediates,
        gold_answers=example.gold_answers,
        gold_sql=example.gold_sql,
    )


class ArtifactStore:
    """Loads and caches the structured-data artifacts a dataset references."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._cache: dict[tuple[str, str], object] = {}

    def _load(self, task: Task, data_ref: str):
        path = self.root / data_ref
        if not path.exists():
            raise DataError(f"missing artifact {path}")
        if task is Task.KGQA:
            with open(path, "rb") as fh:
                return load_kg(fh)
        if task is Task.TABLEQA:
            if path.suffix == ".csv":
                with open(path, "r", encoding="utf-8", newline="") as fh:
                    return load_table_csv(fh, name=path.stem)
            with open(path, "rb") as fh:
                return load_table(fh)
        if path.is_dir():
            return load_database_dir(path)
        with open(path, "rb") as fh:
            return load_database(fh)

    def get(self, task: Task, data_ref: str):
        key = (task.value, data_ref)
        if key not in self._cache:
            self._cache[key] = self._load(task, data_ref)
        return self._cache[key]

    def kg(self, data_ref: str) -> KnowledgeGraph:
        return self.get(Task.KGQA, data_ref)

    def table(self, data_ref: str) -> Table:
        return self.get(Task.TABLEQA, data_ref)

    def database(self, data_ref: str) -> Database:
        return self.get(Task.TEXT2SQL, data_ref)


def _failure_category(trace: ReasoningTrace) -> str | None:
    if trace.outcome_kind != OUTCOME_FAILURE:
        return None
    reason = str(trace.outcome)
    for prefix in ("topic-not-found", "transport-failure", "extraction-error",
                   "no-answers-generated"):
        if reason.startswith(prefix):
            return prefix
    return "failure"


def run_example(
    example: QaExample,
    backend: Backend,
    store: ArtifactStore,
    kgqa_cfg: KgqaConfig,
    tableqa_cfg: TableQaConfig,
    sql_cfg: SqlGenConfig,
) -> tuple[ExampleResult, ReasoningTrace]:
    """Run one example end to end and score it."""
    context = {
        "example_id": example.id,
        "data_ref": example.data_ref,
        "artifacts_dir": str(store.root),
    }
    multi_answer = False
    if example.task is Task.KGQA:
        kg = store.kg(example.data_ref)
        answers, trace = answer_kgqa(
            kg, example.question, example.topic_entity or "", backend, kgqa_cfg, context
        )
        score = hits_at_1(answers, example.gold_answers)
        multi_answer = len(answers) > 1
        category = _failure_category(trace)
    elif example.task is Task.TABLEQA:
        table = store.table(example.data_ref)
        answers, trace = answer_tableqa(
            table, example.question, backend, tableqa_cfg,
            statement=example.statement, context=context,
        )
        score = denotation_accuracy(answers, example.gold_answers)
        multi_answer = len(answers) > 1
        category = _failure_category(trace)
    else:
        db = store.database(example.data_ref)
        predicted, trace = generate_sql(db, example.question, backend, sql_cfg, context)
        category = _failure_category(trace)
        if trace.failed:
            score = 0
        else:
            score = execution_accuracy(db, predicted, example.gold_sql)
            if score is None:
                category = "unsupported-gold-sql"
            elif score == 0 and category is None:
                try:
                    sql.execute(db, sql.parse_sql(predicted))
                except SqlError:
                    category = "predicted-sql-error"

    wall = sum(s.wall_time_ms for s in trace.steps)
    result = ExampleResult(
        id=example.id,
        task=example.task.value,
        score=score,
        category=category,
        multi_answer=multi_answer,
        llm_calls=trace.llm_call_count,
        wall_time_ms=wall,
    )
    return result, trace


def run_eval(
    dataset: list[QaExample],
    backend: Backend | BackendFactory,
    *,
    artifacts_dir: str | Path,
    out_dir: str | Path | None = None,
    kgqa_cfg: KgqaConfig | None = None,
    tableqa_cfg: TableQaConfig | None = None,
    sql_cfg: SqlGenConfig | None = None,
    workers: int = 1,
) -> EvalReport:
    """Evaluate a dataset: orchestrate, score, and persist traces + report.

    ``backend`` is either a shared Backend or a callable building one per
    example (the gold oracle needs per-example state). All referenced
    artifacts are loaded before the first model call, so a missing file
    fails fast.
    """
    if not dataset:
        raise DataError("dataset is empty")
    store = ArtifactStore(artifacts_dir)
    for example in dataset:
        store.get(example.task, example.data_ref)

    kgqa_cfg = kgqa_cfg or KgqaConfig()
    tableqa_cfg = tableqa_cfg or TableQaConfig()
    sql_cfg = sql_cfg or SqlGenConfig()

    def backend_for(example: QaExample) -> Backend:
        if callable(backend) and not hasattr(backend, "complete"):
            return backend(example)
        return backend

    started = time.perf_counter()
    deterministic = True

    def run_one(example: QaExample):
        nonlocal deterministic
        b = backend_for(example)
        if not getattr(b, "deterministic", False):
            deterministic = False
        return run_example(example, b, store, kgqa_cfg, tableqa_cfg, sql_cfg)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_one, dataset))
    else:
        outcomes = [run_one(example) for example in dataset]

    wall_ms = 0.0 if deterministic else (time.perf_counter() - started) * 1000
    results = [r for r, _ in outcomes]
    report = EvalReport.build(results, wall_time_ms=wall_ms)

    if out_dir is not None:
        out = Path(out_dir)
        trace_dir = out / "traces"
        trace_dir.mkdir(parents=True, exist_ok=True)
        for example, (_, trace) in zip(dataset, outcomes):
            save_trace(trace, trace_dir / f"{example.id}.json")
        from .report import write_report_files

        write_report_files(report, out)

    return report


def replay_trace(
    trace: ReasoningTrace,
    artifacts_dir: str | Path | None = None,
    templates=None,
) -> ReasoningTrace:
    """Re-run a recorded trace with a scripted backend built from it.

    The new trace should serialize byte-identically to the original; the
    caller compares them. Artifacts resolve against the directory recorded
    in the trace unless one is passed explicitly.
    """
    from .backends import ScriptedBackend
    from .traces import script_from_traces

    context = trace.context
    root = artifacts_dir or context.get("artifacts_dir")
    if root is None:
        raise DataError("trace records no artifacts_dir; pass one explicitly")
    data_ref = context.get("data_ref")
    if data_ref is None:
        raise DataError("trace records no data_ref; cannot replay")

    backend = ScriptedBackend.from_steps(script_from_traces([trace]))
    store = ArtifactStore(root)
    passthrough = {
        k: context[k]
        for k in ("example_id", "data_ref", "artifacts_dir")
        if k in context
    }

    if trace.task is Task.KGQA:
        cfg = KgqaConfig(
            max_hops=int(context.get("max_hops", 3)),
            answers_from_tails=bool(context.get("answers_from_tails", False)),
        )
        if templates is not None:
            cfg.templates = templates
        _, rerun = answer_kgqa(
            store.kg(data_ref),
            trace.question,
            str(context.get("topic_entity", "")),
            backend,
            cfg,
            context=passthrough,
        )
    elif trace.task is Task.TABLEQA:
        cfg = TableQaConfig()
        if templates is not None:
            cfg.templates = templates
        _, rerun = answer_tableqa(
            store.table(data_ref),
            trace.question,
            backend,
            cfg,
            statement=bool(context.get("statement", False)),
            context=passthrough,
        )
    else:
        cfg = SqlGenConfig()
        if templates is not None:
            cfg.templates = templates
        _, rerun = generate_sql(
            store.database(data_ref), trace.question, backend, cfg, context=passthrough
        )
    return rerun
