"""Prompt templates: a selection family and a generation family.

Selection prompts ask the model to pick useful evidence; generation prompts
ask it to produce the target (an answer, a judgment, or SQL). Templates are
keyed by (task, stage) and can be overridden from a JSON file because the
built-in wording rarely survives contact with a new dataset unchanged.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Mapping

from .errors import TemplateError


class Task(str, enum.Enum):
    KGQA = "kgqa"
    TABLEQA = "tableqa"
    TEXT2SQL = "text2sql"


class PromptKind(str, enum.Enum):
    SELECTION = "selection"
    GENERATION = "generation"


_PLACEHOLDER_RE = re.compile(r"\{([A-Z])\}")
_REQUIRED = {
    PromptKind.SELECTION: {"Y", "X", "Q"},
    PromptKind.GENERATION: {"Y", "Z", "Q"},
}

DEFAULT_SELECTION_BODY = "Here are {Y}. Which {X} are most relevant to answer the question {Q}"
DEFAULT_GENERATION_BODY = "Based on {Y}, please generate {Z} for the question {Q}"


@dataclass(frozen=True)
class PromptTemplate:
    kind: PromptKind
    task: Task
    stage: str
    body: str

    def validate(self) -> None:
        found = set(_PLACEHOLDER_RE.findall(self.body))
        required = _REQUIRED[self.kind]
        unknown = found - required
        if unknown:
            raise TemplateError(
                f"template {self.task.value}/{self.stage}: unknown placeholder(s) "
                f"{sorted(unknown)} for kind {self.kind.value}"
            )
        missing = required - found
        if missing:
            raise TemplateError(
                f"template {self.task.value}/{self.stage}: missing placeholder(s) "
                f"{sorted(missing)}"
            )


def _render(template: PromptTemplate, values: Mapping[str, str]) -> str:
    def substitute(match: re.Match) -> str:
        key = match.group(1)
        if key not in values:
            raise TemplateError(
                f"template {template.task.value}/{template.stage}: placeholder "
                f"{{{key}}} left unresolved"
            )
        return values[key]

    return _PLACEHOLDER_RE.sub(substitute, template.body)


def render_selection(t: PromptTemplate, y: str, x_kind: str, q: str) -> str:
    """Fill a selection template with evidence Y, a target kind X, and question Q."""
    if t.kind is not PromptKind.SELECTION:
        raise TemplateError(f"template {t.task.value}/{t.stage} is not a selection template")
    return _render(t, {"Y": y, "X": x_kind, "Q": q})


def render_generation(t: PromptTemplate, y: str, z_kind: str, q: str) -> str:
    """Fill a generation template with evidence Y, a target kind Z, and question Q."""
    if t.kind is not PromptKind.GENERATION:
        raise TemplateError(f"template {t.task.value}/{t.stage} is not a generation template")
    return _render(t, {"Y": y, "Z": z_kind, "Q": q})


# What goes in the {X} slot of each selection stage and the {Z} slot of each
# generation stage. Shared with trace validation, which re-renders prompts.
STAGE_X_WORDS = {
    "relation-select": "relations",
    "triple-select": "triples",
    "column-select": "columns",
    "row-select": "items",
    "table-select": "tables",
}
STAGE_Z_WORDS = {
    "sufficiency": "a judgment",
    "answer-generate": "the answer",
    "fact-verify": "a judgment",
    "sql-generate": "an executable SQL query",
}

_BUILTIN_BODIES: dict[tuple[Task, str], tuple[PromptKind, str]] = {
    (Task.KGQA, "relation-select"): (
        PromptKind.SELECTION,
        DEFAULT_SELECTION_BODY
        + " Note that you should provide only one relevant relation that's present in the candidate.",
    ),
    (Task.KGQA, "triple-select"): (
        PromptKind.SELECTION,
        DEFAULT_SELECTION_BODY + " Please select the most relevant triples from the candidate.",
    ),
    (Task.KGQA, "sufficiency"): (
        PromptKind.GENERATION,
        DEFAULT_GENERATION_BODY
        + " Answer Yes if the information is sufficient to answer the question, otherwise answer No.",
    ),
    (Task.KGQA, "answer-generate"): (
        PromptKind.GENERATION,
        DEFAULT_GENERATION_BODY + " Note that you just need to provide only one answer entity.",
    ),
    (Task.TABLEQA, "column-select"): (PromptKind.SELECTION, DEFAULT_SELECTION_BODY),
    (Task.TABLEQA, "row-select"): (
        PromptKind.SELECTION,
        DEFAULT_SELECTION_BODY + " Please answer with item numbers such as item 1.",
    ),
    (Task.TABLEQA, "answer-generate"): (PromptKind.GENERATION, DEFAULT_GENERATION_BODY),
    (Task.TABLEQA, "fact-verify"): (
        PromptKind.GENERATION,
        DEFAULT_GENERATION_BODY + " Answer with entailed or refuted only.",
    ),
    (Task.TEXT2SQL, "table-select"): (
        PromptKind.SELECTION,
        "Here are {Y}. Which {X} do you need to complete the SQLite SQL query for the question {Q}",
    ),
    (Task.TEXT2SQL, "sql-generate"): (
        PromptKind.GENERATION,
        DEFAULT_GENERATION_BODY
        + " Please write the complete sqlite SQL query only with no explanation.",
    ),
}


class TemplateRegistry:
    """Read-only lookup of prompt templates by (task, stage)."""

    def __init__(self, templates: dict[tuple[Task, str], PromptTemplate]):
        for t in templates.values():
            t.validate()
        self._templates = dict(templates)

    @classmethod
    def builtin(cls) -> "TemplateRegistry":
        return cls(
            {
                (task, stage): PromptTemplate(kind=kind, task=task, stage=stage, body=body)
                for (task, stage), (kind, body) in _BUILTIN_BODIES.items()
            }
        )

    def get(self, task: Task, stage: str) -> PromptTemplate:
        try:
            return self._templates[(task, stage)]
        except KeyError:
            raise TemplateError(f"no template registered for {task.value}/{stage}") from None

    def stages(self) -> list[tuple[Task, str]]:
        return sorted(self._templates, key=lambda k: (k[0].value, k[1]))

    def with_overrides(self, overrides: Mapping[str, Mapping[str, str]]) -> "TemplateRegistry":
        """New registry with templates replaced from a stage-key map.

        Keys look like "kgqa/relation-select"; values carry "kind" and "body".
        """
        merged = dict(self._templates)
        for key, entry in overrides.items():
            try:
                task_name, stage = key.split("/", 1)
                task = Task(task_name)
            except ValueError:
                raise TemplateError(f"bad template key {key!r}; expected '<task>/<stage>'") from None
            if "body" not in entry:
                raise TemplateError(f"template {key!r} is missing a body")
            kind_name = entry.get("kind", "selection")
            try:
                kind = PromptKind(kind_name)
            except ValueError:
                raise TemplateError(f"template {key!r}: unknown kind {kind_name!r}") from None
            merged[(task, stage)] = PromptTemplate(
                kind=kind, task=task, stage=stage, body=entry["body"]
            )
        return TemplateRegistry(merged)


def load_template_overrides(source: IO[str] | IO[bytes] | str | Path) -> dict:
    """Read a template override file (JSON map of stage-key -> {kind, body})."""
    if isinstance(source, (str, Path)):
        raw = Path(source).read_text(encoding="utf-8")
    else:
        raw = source.read()
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise TemplateError(f"invalid template JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise TemplateError("template file must be a JSON object")
    return doc
