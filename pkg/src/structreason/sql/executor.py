"""Evaluator for parsed queries against an in-memory database.

Semantics, pinned for determinism (the reference evaluator used in tests
implements the same rules independently):

- Joins are inner equi-joins, evaluated left-deep in declaration order;
  row order follows the stored row order of each table.
- There is no NULL: blank cells (empty after trimming) act as missing for
  COUNT(column), SUM, AVG, MIN, and MAX.
- Comparisons are numeric when both sides parse as numbers (comma/$/%
  stripped), otherwise exact/lexicographic text. LIKE is case-insensitive
  with % and _ wildcards.
- Grouping keys are raw cell texts; groups keep first-occurrence order.
- ORDER BY is a stable sort; keys order numerics (ascending) before text.
- DISTINCT drops duplicate projected rows (first occurrence wins) and any
  ORDER BY must then reference selected items.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from decimal import Decimal

from ..database import Database
from ..errors import SqlAnalysisError
from ..tables import canonical_numeric, parse_numeric
from .ast import (
    Aggregate,
    And,
    BoolExpr,
    ColumnRef,
    Comparison,
    Literal,
    Not,
    Or,
    SqlQuery,
    Star,
)

Value = str | int | Decimal


@dataclass
class ResultSet:
    columns: list[str]
    rows: list[tuple[Value, ...]]
    ordered: bool = False
    warnings: list[str] = field(default_factory=list)


def canonical_value(v: Value) -> str:
    """Comparison text for a value: numeric forms collapse ('3.0' == '3')."""
    if isinstance(v, str):
        numeric = parse_numeric(v)
        return canonical_numeric(numeric) if numeric is not None else v
    return canonical_numeric(Decimal(v))


def _sort_key(v: Value) -> tuple:
    if isinstance(v, (int, Decimal)):
        return (0, Decimal(v))
    numeric = parse_numeric(v)
    if numeric is not None:
        return (0, numeric)
    return (1, v)


def _values_equal(a: str, b: str) -> bool:
    na, nb = parse_numeric(a), parse_numeric(b)
    if na is not None and nb is not None:
        return na == nb
    return a == b


def _like_match(value: str, pattern: str) -> bool:
    parts = []
    for ch in pattern:
        if ch == "%":
            parts.append(".*")
        elif ch == "_":
            parts.append(".")
        else:
            parts.append(re.escape(ch))
    return re.fullmatch("".join(parts), value, re.IGNORECASE | re.DOTALL) is not None


def _compare(op: str, a: str, b: str) -> bool:
    if op == "=":
        return _values_equal(a, b)
    if op == "!=":
        return not _values_equal(a, b)
    if op == "LIKE":
        return _like_match(a, b)
    na, nb = parse_numeric(a), parse_numeric(b)
    if na is not None and nb is not None:
        left, right = na, nb
    else:
        left, right = a, b
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    if op == ">=":
        return left >= right
    raise SqlAnalysisError(f"unknown comparison operator {op!r}")


class _Scope:
    """Flat view of the tables in FROM/JOIN order."""

    def __init__(self):
        self.entries: list[tuple[str, list[str], int]] = []  # label, columns, offset
        self.width = 0

    def add(self, table_name: str, alias: str | None, columns: list[str]) -> None:
        label = (alias or table_name).strip().casefold()
        self.entries.append((label, columns, self.width))
        self.width += len(columns)

    def resolve(self, ref: ColumnRef) -> int:
        name = ref.name.strip().casefold()
        if ref.qualifier is not None:
            qualifier = ref.qualifier.strip().casefold()
            matches = [e for e in self.entries if e[0] == qualifier]
            if not matches:
                raise SqlAnalysisError(f"unknown table or alias {ref.qualifier!r}")
            if len(matches) > 1:
                raise SqlAnalysisError(f"ambiguous table or alias {ref.qualifier!r}")
            _, columns, offset = matches[0]
            for i, col in enumerate(columns):
                if col.strip().casefold() == name:
                    return offset + i
            raise SqlAnalysisError(f"unknown column {ref.render()!r}")
        hits = []
        for _, columns, offset in self.entries:
            for i, col in enumerate(columns):
                if col.strip().casefold() == name:
                    hits.append(offset + i)
        if not hits:
            raise SqlAnalysisError(f"unknown column {ref.name!r}")
        if len(hits) > 1:
            raise SqlAnalysisError(f"ambiguous column {ref.name!r}")
        return hits[0]

    def all_columns(self) -> list[str]:
        return [col for _, columns, _ in self.entries for col in columns]


def _eval_operand(operand, scope: _Scope, row: tuple[str, ...]) -> str:
    if isinstance(operand, Literal):
        return operand.text
    return row[scope.resolve(operand)]


def _eval_bool(expr: BoolExpr, scope: _Scope, row: tuple[str, ...]) -> bool:
    if isinstance(expr, Comparison):
        return _compare(
            expr.op,
            _eval_operand(expr.left, scope, row),
            _eval_operand(expr.right, scope, row),
        )
    if isinstance(expr, Not):
        return not _eval_bool(expr.operand, scope, row)
    if isinstance(expr, And):
        return _eval_bool(expr.left, scope, row) and _eval_bool(expr.right, scope, row)
    if isinstance(expr, Or):
        return _eval_bool(expr.left, scope, row) or _eval_bool(expr.right, scope, row)
    raise SqlAnalysisError(f"not a boolean expression: {expr!r}")


def _is_blank(value: str) -> bool:
    return not value.strip()


def _aggregate_value(
    agg: Aggregate, idx: int | None, rows: list[tuple[str, ...]], warnings: list[str]
) -> Value:
    if agg.fn == "COUNT":
        if idx is None:
            return len(rows)
        return sum(1 for r in rows if not _is_blank(r[idx]))
    if idx is None:
        raise SqlAnalysisError(f"{agg.fn}(*) is not allowed; {agg.fn} needs a column")
    values = [r[idx] for r in rows if not _is_blank(r[idx])]
    if agg.fn in ("SUM", "AVG"):
        numerics = []
        skipped = 0
        for v in values:
            n = parse_numeric(v)
            if n is None:
                skipped += 1
            else:
                numerics.append(n)
        if skipped:
            warnings.append(f"{agg.render()}: skipped {skipped} non-numeric value(s)")
        if not numerics:
            return ""
        total = sum(numerics, Decimal(0))
        return total if agg.fn == "SUM" else total / Decimal(len(numerics))
    if not values:
        return ""
    if agg.fn == "MIN":
        return min(values, key=_sort_key)
    if agg.fn == "MAX":
        return max(values, key=_sort_key)
    raise SqlAnalysisError(f"unknown aggregate {agg.fn!r}")


def execute(db: Database, q: SqlQuery) -> ResultSet:
    """Run a parsed query. Raises SqlAnalysisError when it does not resolve."""
    warnings: list[str] = []
    scope = _Scope()

    def bind(table_name: str, alias: str | None) -> list[tuple[str, ...]]:
        table = db.find_table(table_name)
        if table is None:
            raise SqlAnalysisError(f"unknown table {table_name!r}")
        scope.add(table_name, alias, list(table.columns))
        return [tuple(cell.raw for cell in row) for row in table.rows]

    rows = bind(q.from_table, q.from_alias)
    for join in q.joins:
        join_rows = bind(join.table, join.alias)
        li = scope.resolve(join.left)
        ri = scope.resolve(join.right)
        rows = [
            full
            for r in rows
            for s in join_rows
            if _values_equal((full := r + s)[li], full[ri])
        ]

    if q.where is not None:
        rows = [r for r in rows if _eval_bool(q.where, scope, r)]

    has_aggregates = any(isinstance(i.expr, Aggregate) for i in q.select_items)
    grouped = bool(q.group_by) or has_aggregates
    group_idx = [scope.resolve(c) for c in q.group_by]

    # resolve the select list
    columns: list[str] = []
    item_specs: list[tuple[str, object]] = []  # ("star"|"column"|"aggregate", payload)
    for item in q.select_items:
        if isinstance(item.expr, Star):
            if grouped:
                raise SqlAnalysisError("'*' cannot be combined with aggregation")
            columns.extend(scope.all_columns())
            item_specs.append(("star", None))
        elif isinstance(item.expr, ColumnRef):
            idx = scope.resolve(item.expr)
            if grouped and idx not in group_idx:
                raise SqlAnalysisError(
                    f"column {item.expr.render()!r} must appear in GROUP BY"
                )
            columns.append(item.alias or item.expr.name)
            item_specs.append(("column", idx))
        else:
            idx = scope.resolve(item.expr.arg) if item.expr.arg is not None else None
            if item.expr.fn != "COUNT" and idx is None:
                raise SqlAnalysisError(f"{item.expr.fn}(*) is not allowed")
            columns.append(item.alias or item.expr.render())
            item_specs.append(("aggregate", (item.expr, idx)))

    # units are either base rows or (key, member-rows) groups
    if grouped:
        groups: dict[tuple[str, ...], list[tuple[str, ...]]] = {}
        for r in rows:
            groups.setdefault(tuple(r[i] for i in group_idx), []).append(r)
        if not q.group_by and not groups:
            groups[()] = []
        units = list(groups.items())

        def project(unit) -> tuple[Value, ...]:
            key, members = unit
            out: list[Value] = []
            for kind, payload in item_specs:
                if kind == "column":
                    out.append(key[group_idx.index(payload)])
                else:
                    agg, idx = payload
                    out.append(_aggregate_value(agg, idx, members, warnings))
            return tuple(out)

    else:
        units = rows

        def project(unit) -> tuple[Value, ...]:
            out: list[Value] = []
            for kind, payload in item_specs:
                if kind == "star":
                    out.extend(unit)
                else:
                    out.append(unit[payload])
            return tuple(out)

    # resolve ORDER BY keys against aliases, group keys, or the row scope
    alias_positions = {
        item.alias.strip().casefold(): pos
        for pos, item in enumerate(q.select_items)
        if item.alias
    }
    selected_column_positions = {
        payload: pos
        for pos, (kind, payload) in enumerate(item_specs)
        if kind == "column"
    }

    def order_getter(key: ColumnRef):
        if key.qualifier is None and key.name.strip().casefold() in alias_positions:
            pos = alias_positions[key.name.strip().casefold()]
            return lambda unit, projected: projected[pos]
        idx = scope.resolve(key)
        if q.distinct:
            if idx not in selected_column_positions:
                raise SqlAnalysisError(
                    f"ORDER BY {key.render()!r} with DISTINCT must reference a selected item"
                )
            pos = selected_column_positions[idx]
            return lambda unit, projected: projected[pos]
        if grouped:
            if idx not in group_idx:
                raise SqlAnalysisError(
                    f"ORDER BY {key.render()!r} must appear in GROUP BY"
                )
            pos = group_idx.index(idx)
            return lambda unit, projected: unit[0][pos]
        return lambda unit, projected: unit[idx]

    getters = [(order_getter(o.key), o.descending) for o in q.order_by]

    records = [(unit, project(unit)) for unit in units]

    if q.distinct:
        seen: set[tuple[str, ...]] = set()
        unique = []
        for unit, projected in records:
            fingerprint = tuple(canonical_value(v) for v in projected)
            if fingerprint not in seen:
                seen.add(fingerprint)
                unique.append((unit, projected))
        records = unique

    for getter, descending in reversed(getters):
        records.sort(
            key=lambda rec: _sort_key(getter(rec[0], rec[1])), reverse=descending
        )

    if q.limit is not None:
        records = records[: q.limit]

    return ResultSet(
        columns=columns,
        rows=[projected for _, projected in records],
        ordered=bool(q.order_by),
        warnings=warnings,
    )


def results_equal(a: ResultSet, b: ResultSet) -> bool:
    """Compare result sets: sequences if either is ordered, multisets otherwise.

    Column names are ignored; values compare after numeric normalization.
    """
    rows_a = [tuple(canonical_value(v) for v in row) for row in a.rows]
    rows_b = [tuple(canonical_value(v) for v in row) for row in b.rows]
    if a.ordered or b.ordered:
        return rows_a == rows_b
    return Counter(rows_a) == Counter(rows_b)
