"""Restricted SQL subset: parser, renderer, and in-process evaluator.

Supported grammar: single SELECT statements with column references and the
COUNT/SUM/AVG/MIN/MAX aggregates, optional DISTINCT, inner equi-joins,
WHERE trees over =, !=, <, <=, >, >=, LIKE with AND/OR/NOT, GROUP BY,
ORDER BY (column or select alias), and LIMIT. Everything else (subqueries,
UNION, HAVING, outer joins, arithmetic, window functions) raises
UnsupportedSqlError so callers can count unsupported items honestly.
"""

from .ast import (
    Aggregate,
    And,
    ColumnRef,
    Comparison,
    Join,
    Literal,
    Not,
    Or,
    OrderItem,
    SelectItem,
    SqlQuery,
    Star,
    render_sql,
)
from .executor import ResultSet, execute, results_equal
from .parser import parse_sql

__all__ = [
    "Aggregate",
    "And",
    "ColumnRef",
    "Comparison",
    "Join",
    "Literal",
    "Not",
    "Or",
    "OrderItem",
    "ResultSet",
    "SelectItem",
    "SqlQuery",
    "Star",
    "execute",
    "parse_sql",
    "render_sql",
    "results_equal",
]
