"""The three iterative invoking-linearization-generation pipelines.

Each pipeline alternates structured-data reads with model calls: invoke a
read interface, linearize the result into evidence text, prompt the backend
to select useful evidence or generate the target, and record everything in
a trace. KGQA iterates up to a hop limit with a sufficiency check between
hops; TableQA runs a fixed four-phase pass (three model calls); Text-to-SQL
runs table selection then SQL generation (two model calls).

An empty selection falls back to all candidates of that stage once and then
terminates with best-effort generation, so terse model replies degrade
instead of dead-ending. Oversized candidate lists are split into chunks,
each selected separately, with one final merge call over the chunk winners.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable

from .backends import Backend, GenerationRequest
from .database import (
    Database,
    SchemaSummary,
    extract_table_and_column_names,
    extract_tables_information,
)
from .errors import SqlExtractionError, TransportError
from .kg import KnowledgeGraph, Triple, extract_neighbor_relations, extract_triples
from .linearize import (
    linearize_name_list,
    linearize_relations,
    linearize_rows,
    linearize_schema,
    linearize_triples,
    truncate_for_budget,
)
from .prompts import (
    STAGE_X_WORDS,
    STAGE_Z_WORDS,
    Task,
    TemplateRegistry,
    render_generation,
    render_selection,
)
from .responses import Sufficiency, parse_answer, parse_selection, parse_sql, parse_sufficiency
from .tables import Table, extract_column_names, extract_subtable, resolve_column_indices
from .traces import (
    OUTCOME_ANSWERS,
    OUTCOME_FAILURE,
    OUTCOME_SQL,
    ReasoningTrace,
    TraceStep,
)


@dataclass
class KgqaConfig:
    max_hops: int = 3
    max_candidates_per_prompt: int = 50
    frontier_width: int = 10
    max_evidence_chars: int = 8000
    max_output_chars: int = 2000
    temperature: float = 0.0
    answers_from_tails: bool = False
    templates: TemplateRegistry = field(default_factory=TemplateRegistry.builtin)

    def __post_init__(self):
        if self.max_hops < 1:
            raise ValueError("max_hops must be at least 1")


@dataclass
class TableQaConfig:
    max_candidates_per_prompt: int = 50
    max_evidence_chars: int = 8000
    max_output_chars: int = 2000
    temperature: float = 0.0
    templates: TemplateRegistry = field(default_factory=TemplateRegistry.builtin)


@dataclass
class SqlGenConfig:
    max_candidates_per_prompt: int = 50
    max_evidence_chars: int = 8000
    max_output_chars: int = 2000
    temperature: float = 0.0
    templates: TemplateRegistry = field(default_factory=TemplateRegistry.builtin)


def _render_list(items: list[str]) -> str:
    return json.dumps(items, ensure_ascii=False)


class _Recorder:
    """Shared step bookkeeping for one pipeline run."""

    def __init__(self, trace: ReasoningTrace, backend: Backend, cfg):
        self.trace = trace
        self.backend = backend
        self.cfg = cfg
        self.deterministic = getattr(backend, "deterministic", False)
        self._stage_counts: dict[str, int] = {}

    def next_tag(self, stage: str) -> str:
        # the ordinal keeps replay keys unique even when two calls of the
        # same stage render identical prompts
        n = self._stage_counts.get(stage, 0) + 1
        self._stage_counts[stage] = n
        return f"{stage}#{n}"

    def call(self, stage_tag: str, prompt: str) -> tuple[str, float]:
        request = GenerationRequest(
            prompt=prompt,
            stage_tag=stage_tag,
            max_output_chars=self.cfg.max_output_chars,
            temperature=self.cfg.temperature,
        )
        start = time.perf_counter()
        response = self.backend.complete(request)
        elapsed_ms = 0.0 if self.deterministic else (time.perf_counter() - start) * 1000
        return response, elapsed_ms

    def record(
        self,
        *,
        stage: str,
        interface: str,
        interface_input: str,
        evidence: str,
        prompt: str = "",
        response: str = "",
        decision: str = "",
        truncated: bool = False,
        wall_time_ms: float = 0.0,
    ) -> TraceStep:
        step = TraceStep(
            step_index=len(self.trace.steps),
            stage_tag=stage,
            interface_invoked=interface,
            interface_input=interface_input,
            linearized_evidence=evidence,
            prompt=prompt,
            raw_response=response,
            parsed_decision=decision,
            truncated=truncated,
            wall_time_ms=wall_time_ms,
        )
        self.trace.steps.append(step)
        return step

    def select(
        self,
        stage: str,
        interface: str,
        interface_input: str,
        candidates: list[str],
        evidence_for: Callable[[list[str]], str],
    ) -> list[str]:
        template = self.cfg.templates.get(self.trace.task, stage)
        x_word = STAGE_X_WORDS[stage]

        def one_call(chunk: list[str]) -> list[str]:
            evidence, truncated = truncate_for_budget(
                evidence_for(chunk), self.cfg.max_evidence_chars
            )
            prompt = render_selection(template, evidence, x_word, self.trace.question)
            tag = self.next_tag(stage)
            response, elapsed = self.call(tag, prompt)
            selected = parse_selection(response, chunk) if chunk else []
            self.record(
                stage=tag,
                interface=interface,
                interface_input=interface_input,
                evidence=evidence,
                prompt=prompt,
                response=response,
                decision=_render_list(selected),
                truncated=truncated,
                wall_time_ms=elapsed,
            )
            return selected

        limit = self.cfg.max_candidates_per_prompt
        if len(candidates) <= limit:
            return one_call(candidates)
        winners: list[str] = []
        for start in range(0, len(candidates), limit):
            for item in one_call(candidates[start : start + limit]):
                if item not in winners:
                    winners.append(item)
        if not winners:
            return []
        return one_call(winners)

    def generate(
        self, stage: str, interface: str, interface_input: str, evidence_text: str
    ) -> tuple[str, TraceStep]:
        template = self.cfg.templates.get(self.trace.task, stage)
        evidence, truncated = truncate_for_budget(evidence_text, self.cfg.max_evidence_chars)
        prompt = render_generation(template, evidence, STAGE_Z_WORDS[stage], self.trace.question)
        tag = self.next_tag(stage)
        response, elapsed = self.call(tag, prompt)
        step = self.record(
            stage=tag,
            interface=interface,
            interface_input=interface_input,
            evidence=evidence,
            prompt=prompt,
            response=response,
            truncated=truncated,
            wall_time_ms=elapsed,
        )
        return response, step

    def mark_fallback(self, count: int) -> None:
        if self.trace.steps:
            last = self.trace.steps[-1]
            last.parsed_decision += f" | fallback: all {count} candidates"


def answer_kgqa(
    kg: KnowledgeGraph,
    question: str,
    topic: str,
    backend: Backend,
    cfg: KgqaConfig | None = None,
    context: dict | None = None,
) -> tuple[list[str], ReasoningTrace]:
    """Multi-hop KG question answering starting from a linked topic entity."""
    cfg = cfg or KgqaConfig()
    trace = ReasoningTrace(question=question, task=Task.KGQA, context=dict(context or {}))
    trace.context.update(
        {"topic_entity": topic, "max_hops": cfg.max_hops, "answers_from_tails": cfg.answers_from_tails}
    )
    rec = _Recorder(trace, backend, cfg)

    if topic not in kg.entities:
        trace.outcome_kind = OUTCOME_FAILURE
        trace.outcome = "topic-not-found"
        return [], trace

    try:
        return _kgqa_loop(kg, question, topic, cfg, rec, trace)
    except TransportError as exc:
        trace.outcome_kind = OUTCOME_FAILURE
        trace.outcome = f"transport-failure: {exc}"
        return [], trace


def _kgqa_loop(kg, question, topic, cfg, rec, trace):
    frontier = [topic]
    selected_triples: list[Triple] = []

    for hop in range(1, cfg.max_hops + 1):
        relations = sorted({r for e in frontier for r in extract_neighbor_relations(kg, e)})
        selected_relations = rec.select(
            "relation-select",
            "extract_neighbor_relations",
            f"entities={frontier}",
            relations,
            lambda chunk: linearize_relations(chunk),
        )
        fell_back = False
        if not selected_relations and relations:
            selected_relations = relations
            fell_back = True
            rec.mark_fallback(len(relations))

        triples: list[Triple] = []
        for e in sorted(frontier):
            triples.extend(extract_triples(kg, e, set(selected_relations)))
        candidate_strings = [linearize_triples([t]) for t in triples]
        selected_strings = rec.select(
            "triple-select",
            "extract_triples",
            f"entities={sorted(frontier)} relations={selected_relations}",
            candidate_strings,
            lambda chunk: "; ".join(chunk),
        )
        if not selected_strings and candidate_strings:
            selected_strings = candidate_strings
            fell_back = True
            rec.mark_fallback(len(candidate_strings))
        hop_triples = [triples[candidate_strings.index(s)] for s in selected_strings]
        for t in hop_triples:
            if t not in selected_triples:
                selected_triples.append(t)

        # sufficiency: skipped (forced sufficient) at the hop limit and on
        # the terminate-after-fallback path
        if hop == cfg.max_hops or fell_back or not hop_triples:
            sufficient = True
        else:
            response, step = rec.generate(
                "sufficiency", "", "", linearize_triples(selected_triples)
            )
            verdict = parse_sufficiency(response)
            step.parsed_decision = verdict.value
            sufficient = verdict is Sufficiency.SUFFICIENT

        if sufficient:
            if cfg.answers_from_tails and hop_triples:
                answers = sorted({t.tail for t in hop_triples})
                rec.record(
                    stage="tail-extraction",
                    interface="",
                    interface_input="",
                    evidence=linearize_triples(hop_triples),
                    decision=_render_list(answers),
                )
            else:
                response, step = rec.generate(
                    "answer-generate", "", "", linearize_triples(selected_triples)
                )
                answers = parse_answer(response)
                step.parsed_decision = _render_list(answers)
            if answers:
                trace.outcome_kind = OUTCOME_ANSWERS
                trace.outcome = answers
            else:
                trace.outcome_kind = OUTCOME_FAILURE
                trace.outcome = "no-answers-generated"
            return answers, trace

        frontier = sorted({t.tail for t in hop_triples})[: cfg.frontier_width]

    raise AssertionError("unreachable: the final hop forces generation")


def answer_tableqa(
    t: Table,
    question: str,
    backend: Backend,
    cfg: TableQaConfig | None = None,
    statement: bool = False,
    context: dict | None = None,
) -> tuple[list[str], ReasoningTrace]:
    """Table question answering; with statement=True the final stage verifies
    the question as a statement (entailed/refuted) instead of answering it."""
    cfg = cfg or TableQaConfig()
    trace = ReasoningTrace(question=question, task=Task.TABLEQA, context=dict(context or {}))
    trace.context.update({"statement": statement})
    rec = _Recorder(trace, backend, cfg)
    try:
        return _tableqa_pipeline(t, question, statement, cfg, rec, trace)
    except TransportError as exc:
        trace.outcome_kind = OUTCOME_FAILURE
        trace.outcome = f"transport-failure: {exc}"
        return [], trace


def _tableqa_pipeline(t, question, statement, cfg, rec, trace):
    table_label = t.name or "table"

    columns = extract_column_names(t)
    selected_columns = rec.select(
        "column-select",
        "extract_column_names",
        f"table={table_label}",
        columns,
        lambda chunk: linearize_name_list(chunk),
    )
    if not selected_columns:
        selected_columns = columns
        rec.mark_fallback(len(columns))
    column_indices = resolve_column_indices(t, selected_columns)
    if not column_indices:
        column_indices = list(range(t.column_count))

    items = [f"item {j + 1}" for j in range(t.row_count)]

    def rows_evidence(chunk: list[str]) -> str:
        indices = [int(label.split()[1]) - 1 for label in chunk]
        return linearize_rows(extract_subtable(t, column_indices, indices))

    selected_items = rec.select(
        "row-select",
        "extract_columns",
        f"table={table_label} columns={[t.columns[i] for i in column_indices]}",
        items,
        rows_evidence,
    )
    if not selected_items and items:
        selected_items = items
        rec.mark_fallback(len(items))
    row_indices = sorted({int(label.split()[1]) - 1 for label in selected_items})

    subtable = extract_subtable(t, column_indices, row_indices)
    evidence = linearize_rows(subtable)
    rec.record(
        stage="extract-subtable",
        interface="extract_subtable",
        interface_input=f"columns={column_indices} rows={row_indices}",
        evidence=evidence,
        decision=f"{len(subtable.columns)}x{len(subtable.rows)} sub-table",
    )

    stage = "fact-verify" if statement else "answer-generate"
    response, step = rec.generate(stage, "", "", evidence)
    answers = parse_answer(response)
    step.parsed_decision = _render_list(answers)

    if answers:
        trace.outcome_kind = OUTCOME_ANSWERS
        trace.outcome = answers
    else:
        trace.outcome_kind = OUTCOME_FAILURE
        trace.outcome = "no-answers-generated"
    return answers, trace


def generate_sql(
    db: Database,
    question: str,
    backend: Backend,
    cfg: SqlGenConfig | None = None,
    context: dict | None = None,
) -> tuple[str, ReasoningTrace]:
    """Two-phase SQL generation: pick tables, then write the query."""
    cfg = cfg or SqlGenConfig()
    trace = ReasoningTrace(question=question, task=Task.TEXT2SQL, context=dict(context or {}))
    rec = _Recorder(trace, backend, cfg)
    try:
        return _text2sql_pipeline(db, question, cfg, rec, trace)
    except TransportError as exc:
        trace.outcome_kind = OUTCOME_FAILURE
        trace.outcome = f"transport-failure: {exc}"
        return "", trace


def _text2sql_pipeline(db, question, cfg, rec, trace):
    summary = extract_table_and_column_names(db)
    table_names = [ts.name for ts in summary.tables]

    selected_tables = rec.select(
        "table-select",
        "extract_table_and_column_names",
        f"database={db.name}",
        table_names,
        lambda chunk: linearize_schema(_names_only_summary(summary, chunk)),
    )
    if not selected_tables:
        selected_tables = table_names
        rec.mark_fallback(len(table_names))

    info = extract_tables_information(db, selected_tables)
    response, step = rec.generate(
        "sql-generate",
        "extract_tables_information",
        f"tables={selected_tables}",
        linearize_schema(info),
    )
    try:
        sql = parse_sql(response)
    except SqlExtractionError as exc:
        step.parsed_decision = "<no SQL extracted>"
        trace.outcome_kind = OUTCOME_FAILURE
        trace.outcome = f"extraction-error: {exc}"
        return "", trace
    step.parsed_decision = sql
    trace.outcome_kind = OUTCOME_SQL
    trace.outcome = sql
    return sql, trace


def _names_only_summary(summary: SchemaSummary, names: list[str]) -> SchemaSummary:
    wanted = {n.strip().casefold() for n in names}
    return SchemaSummary(
        tables=tuple(ts for ts in summary.tables if ts.name.strip().casefold() in wanted)
    )
