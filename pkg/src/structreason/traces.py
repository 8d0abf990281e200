"""Reasoning traces: a verbatim record of every step of a pipeline run.

Each step stores the interface invoked, its input rendering, the linearized
evidence, the exact prompt, the raw response, and the parsed decision. A
trace is self-validating: every recorded prompt can be re-rendered from the
recorded evidence plus the template registry. Traces from deterministic
backends serialize byte-identically across runs (their timings are recorded
as zero; wall-clock noise would break replay comparison).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError
from .prompts import (
    PromptKind,
    STAGE_X_WORDS,
    STAGE_Z_WORDS,
    Task,
    TemplateRegistry,
    render_generation,
    render_selection,
)

OUTCOME_ANSWERS = "answers"
OUTCOME_SQL = "sql"
OUTCOME_FAILURE = "failure"


def base_stage(stage_tag: str) -> str:
    """Stage name without the per-call ordinal: 'relation-select#2' -> 'relation-select'.

    The ordinal keeps replay keys unique when different calls of the same
    stage happen to render byte-identical prompts (e.g. two hops seeing the
    same candidate relations).
    """
    return stage_tag.split("#", 1)[0]


@dataclass
class TraceStep:
    step_index: int
    stage_tag: str
    interface_invoked: str
    interface_input: str
    linearized_evidence: str
    prompt: str
    raw_response: str
    parsed_decision: str
    truncated: bool = False
    wall_time_ms: float = 0.0

    @property
    def is_llm_call(self) -> bool:
        return bool(self.prompt)

    @property
    def stage(self) -> str:
        return base_stage(self.stage_tag)


@dataclass
class ReasoningTrace:
    question: str
    task: Task
    steps: list[TraceStep] = field(default_factory=list)
    outcome_kind: str = OUTCOME_FAILURE
    outcome: list[str] | str = "not-run"
    context: dict = field(default_factory=dict)

    @property
    def llm_call_count(self) -> int:
        return sum(1 for s in self.steps if s.is_llm_call)

    @property
    def failed(self) -> bool:
        return self.outcome_kind == OUTCOME_FAILURE

    def to_dict(self) -> dict:
        return {
            "question": self.question,
            "task": self.task.value,
            "outcome_kind": self.outcome_kind,
            "outcome": self.outcome,
            "context": self.context,
            "steps": [
                {
                    "step_index": s.step_index,
                    "stage_tag": s.stage_tag,
                    "interface_invoked": s.interface_invoked,
                    "interface_input": s.interface_input,
                    "linearized_evidence": s.linearized_evidence,
                    "prompt": s.prompt,
                    "raw_response": s.raw_response,
                    "parsed_decision": s.parsed_decision,
                    "truncated": s.truncated,
                    "wall_time_ms": s.wall_time_ms,
                }
                for s in self.steps
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ReasoningTrace":
        try:
            steps = [TraceStep(**entry) for entry in doc.get("steps", [])]
            return cls(
                question=doc["question"],
                task=Task(doc["task"]),
                steps=steps,
                outcome_kind=doc["outcome_kind"],
                outcome=doc["outcome"],
                context=doc.get("context", {}),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed trace document: {exc}") from exc


def trace_to_json(trace: ReasoningTrace) -> str:
    return json.dumps(trace.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def save_trace(trace: ReasoningTrace, path: str | Path) -> None:
    Path(path).write_text(trace_to_json(trace), encoding="utf-8")


def load_trace(path: str | Path) -> ReasoningTrace:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read trace {path}: {exc}") from exc
    return ReasoningTrace.from_dict(doc)


def validate_trace(trace: ReasoningTrace, templates: TemplateRegistry | None = None) -> None:
    """Check trace invariants; raise DataError on the first violation.

    Step indexes must increase from zero, and every recorded prompt must be
    byte-reproducible from the recorded evidence and the stage template.
    """
    templates = templates or TemplateRegistry.builtin()
    for position, step in enumerate(trace.steps):
        if step.step_index != position:
            raise DataError(
                f"step_index {step.step_index} at position {position} is not contiguous"
            )
        if not step.is_llm_call:
            continue
        template = templates.get(trace.task, step.stage)
        if template.kind is PromptKind.SELECTION:
            expected = render_selection(
                template, step.linearized_evidence, STAGE_X_WORDS[step.stage], trace.question
            )
        else:
            expected = render_generation(
                template, step.linearized_evidence, STAGE_Z_WORDS[step.stage], trace.question
            )
        if expected != step.prompt:
            raise DataError(
                f"step {step.step_index} ({step.stage_tag}): recorded prompt is not "
                "reproducible from the recorded evidence and template"
            )


def script_from_traces(traces: list[ReasoningTrace]) -> list[tuple[str, str, str]]:
    """(stage_tag, prompt, response) triples for building a scripted backend."""
    return [
        (s.stage_tag, s.prompt, s.raw_response)
        for trace in traces
        for s in trace.steps
        if s.is_llm_call
    ]
