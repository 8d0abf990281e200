"""Deterministic conversion of extracted evidence into prompt text.

Formats are fixed byte-for-byte so prompts are reproducible across runs and
platforms:

- relation/name lists:  ``[birthplace, education]``
- triples:              ``(head, relation, tail); (head, relation, tail)``
- table rows:           ``row 1: (year, 1896), (city, Athens); row 2: ...``
- schemas:              ``table Dogs: columns [dog_id, name]; foreign keys: [...]``

Separator characters occurring inside values (backslash, comma, parens,
semicolon) are escaped with a backslash; the escaping is part of the format
so outputs re-parse unambiguously.
"""

from __future__ import annotations

from .database import SchemaSummary
from .kg import RelationId, Triple

_ESCAPED = "\\,();"


def escape_value(text: str) -> str:
    """Backslash-escape the separator characters of the linearized formats."""
    out = []
    for ch in text:
        if ch in _ESCAPED:
            out.append("\\")
        out.append(ch)
    return "".join(out)


def linearize_relations(rels: list[RelationId]) -> str:
    """Bracketed, comma-separated list: ``[birthplace, education]``."""
    return "[" + ", ".join(escape_value(r) for r in rels) + "]"


def linearize_name_list(names: list[str]) -> str:
    """Same bracketed list format, for column or table names."""
    return linearize_relations(names)


def linearize_triples(triples: list[Triple]) -> str:
    """``(head, relation, tail)`` groups joined by ``; ``."""
    return "; ".join(
        f"({escape_value(t.head)}, {escape_value(t.relation)}, {escape_value(t.tail)})"
        for t in triples
    )


def linearize_rows(t) -> str:
    """Row-wise rendering: ``row 1: (col, value), (col, value); row 2: ...``.

    Accepts a Table or SubTable. Row numbers are 1-based; a SubTable keeps
    the row numbers of its source table (via origin_rows) so selections stay
    aligned with what a model saw earlier.
    """
    origin = getattr(t, "origin_rows", None)
    parts = []
    for pos, row in enumerate(t.rows):
        number = (origin[pos] if origin is not None else pos) + 1
        cells = ", ".join(
            f"({escape_value(col)}, {escape_value(cell.raw)})"
            for col, cell in zip(t.columns, row)
        )
        parts.append(f"row {number}: {cells}")
    return "; ".join(parts)


def linearize_schema(s: SchemaSummary) -> str:
    """Per-table column lists plus a trailing foreign-key segment if any."""
    parts = [
        f"table {escape_value(ts.name)}: columns "
        + linearize_name_list(list(ts.columns))
        for ts in s.tables
    ]
    if s.foreign_keys:
        rendered = ", ".join(escape_value(fk.render()) for fk in s.foreign_keys)
        parts.append(f"foreign keys: [{rendered}]")
    return "; ".join(parts)


def truncate_for_budget(text: str, max_chars: int) -> tuple[str, bool]:
    """Clip text to a character budget; the flag reports whether it was cut."""
    if max_chars <= 0 or len(text) <= max_chars:
        return text, False
    return text[:max_chars], True
