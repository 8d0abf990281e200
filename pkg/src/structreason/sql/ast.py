"""AST node types for the SQL subset, plus a canonical renderer.

render_sql emits a normalized form (uppercase keywords, explicit AS,
fully parenthesized boolean operators) that parses back to an equal AST.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

AGGREGATE_FNS = ("COUNT", "SUM", "AVG", "MIN", "MAX")
COMPARISON_OPS = ("=", "!=", "<", "<=", ">", ">=", "LIKE")


@dataclass(frozen=True)
class ColumnRef:
    name: str
    qualifier: str | None = None

    def render(self) -> str:
        return f"{self.qualifier}.{self.name}" if self.qualifier else self.name


@dataclass(frozen=True)
class Literal:
    text: str
    is_string: bool

    def render(self) -> str:
        if self.is_string:
            return "'" + self.text.replace("'", "''") + "'"
        return self.text


Operand = Union[ColumnRef, Literal]


@dataclass(frozen=True)
class Comparison:
    left: Operand
    op: str
    right: Operand


@dataclass(frozen=True)
class Not:
    operand: "BoolExpr"


@dataclass(frozen=True)
class And:
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class Or:
    left: "BoolExpr"
    right: "BoolExpr"


BoolExpr = Union[Comparison, Not, And, Or]


@dataclass(frozen=True)
class Star:
    """The bare '*' select list."""


@dataclass(frozen=True)
class Aggregate:
    fn: str
    arg: ColumnRef | None = None  # None means '*'

    def render(self) -> str:
        return f"{self.fn}({self.arg.render() if self.arg else '*'})"


@dataclass(frozen=True)
class SelectItem:
    expr: Union[ColumnRef, Aggregate, Star]
    alias: str | None = None


@dataclass(frozen=True)
class Join:
    table: str
    alias: str | None
    left: ColumnRef
    right: ColumnRef


@dataclass(frozen=True)
class OrderItem:
    key: ColumnRef  # an unqualified key may also name a select alias
    descending: bool = False


@dataclass(frozen=True)
class SqlQuery:
    select_items: tuple[SelectItem, ...]
    from_table: str
    from_alias: str | None = None
    joins: tuple[Join, ...] = ()
    where: BoolExpr | None = None
    group_by: tuple[ColumnRef, ...] = ()
    order_by: tuple[OrderItem, ...] = ()
    limit: int | None = None
    distinct: bool = False


def _render_bool(expr: BoolExpr) -> str:
    if isinstance(expr, Comparison):
        return f"{expr.left.render()} {expr.op} {expr.right.render()}"
    if isinstance(expr, Not):
        return f"NOT ({_render_bool(expr.operand)})"
    if isinstance(expr, And):
        return f"({_render_bool(expr.left)}) AND ({_render_bool(expr.right)})"
    if isinstance(expr, Or):
        return f"({_render_bool(expr.left)}) OR ({_render_bool(expr.right)})"
    raise TypeError(f"not a boolean expression: {expr!r}")


def _render_item(item: SelectItem) -> str:
    if isinstance(item.expr, Star):
        return "*"
    text = item.expr.render()
    return f"{text} AS {item.alias}" if item.alias else text


def render_sql(q: SqlQuery) -> str:
    """Canonical single-line text of a query."""
    parts = ["SELECT"]
    if q.distinct:
        parts.append("DISTINCT")
    parts.append(", ".join(_render_item(i) for i in q.select_items))
    parts.append("FROM")
    parts.append(f"{q.from_table} AS {q.from_alias}" if q.from_alias else q.from_table)
    for j in q.joins:
        target = f"{j.table} AS {j.alias}" if j.alias else j.table
        parts.append(f"JOIN {target} ON {j.left.render()} = {j.right.render()}")
    if q.where is not None:
        parts.append(f"WHERE {_render_bool(q.where)}")
    if q.group_by:
        parts.append("GROUP BY " + ", ".join(c.render() for c in q.group_by))
    if q.order_by:
        rendered = ", ".join(
            f"{o.key.render()} DESC" if o.descending else f"{o.key.render()} ASC"
            for o in q.order_by
        )
        parts.append("ORDER BY " + rendered)
    if q.limit is not None:
        parts.append(f"LIMIT {q.limit}")
    return " ".join(parts)
