"""Tokenizer and recursive-descent parser for the SQL subset.

Syntax errors carry the character position and what was expected.
Recognizable constructs outside the subset raise UnsupportedSqlError so the
evaluation harness can report them separately from plain junk.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import SqlSyntaxError, UnsupportedSqlError
from .ast import (
    AGGREGATE_FNS,
    Aggregate,
    And,
    BoolExpr,
    ColumnRef,
    Comparison,
    Join,
    Literal,
    Not,
    Operand,
    Or,
    OrderItem,
    SelectItem,
    SqlQuery,
    Star,
)

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<number>\d+(?:\.\d+)?)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<string>'(?:[^']|'')*')
    | (?P<op><=|>=|!=|<>|=|<|>|\(|\)|,|\.|\*|;|\+|-|/|\|\|)
    """,
    re.VERBOSE,
)

_CORE_KEYWORDS = {
    "SELECT", "DISTINCT", "FROM", "JOIN", "INNER", "ON", "WHERE", "AND", "OR",
    "NOT", "LIKE", "GROUP", "BY", "ORDER", "ASC", "DESC", "LIMIT", "AS",
}
_UNSUPPORTED_KEYWORDS = {
    "UNION", "INTERSECT", "EXCEPT", "HAVING", "EXISTS", "BETWEEN", "IN", "IS",
    "NULL", "CASE", "OVER", "LEFT", "RIGHT", "FULL", "OUTER", "CROSS",
    "NATURAL", "OFFSET", "WITH",
}
_KEYWORDS = _CORE_KEYWORDS | _UNSUPPORTED_KEYWORDS | set(AGGREGATE_FNS)


@dataclass(frozen=True)
class _Token:
    kind: str  # number | ident | string | op | eof
    text: str
    pos: int

    @property
    def upper(self) -> str:
        return self.text.upper()


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise SqlSyntaxError(f"unexpected character {text[pos]!r}", position=pos)
        pos = m.end()
        kind = m.lastgroup
        if kind == "ws":
            continue
        tokens.append(_Token(kind, m.group(), m.start()))
    tokens.append(_Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    # --- token helpers -------------------------------------------------
    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at_keyword(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and tok.upper in words

    def accept_keyword(self, *words: str) -> bool:
        if self.at_keyword(*words):
            self.advance()
            return True
        return False

    def expect_keyword(self, word: str) -> None:
        if not self.accept_keyword(word):
            self._fail(f"expected {word}")

    def accept_op(self, op: str) -> bool:
        tok = self.peek()
        if tok.kind == "op" and tok.text == op:
            self.advance()
            return True
        return False

    def expect_op(self, op: str, what: str | None = None) -> None:
        if not self.accept_op(op):
            self._fail(what or f"expected {op!r}")

    def _fail(self, expected: str) -> None:
        tok = self.peek()
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise SqlSyntaxError(f"{expected}, found {found}", position=tok.pos)

    def _unsupported(self, construct: str) -> None:
        raise UnsupportedSqlError(construct, position=self.peek().pos)

    def _check_unsupported_keyword(self) -> None:
        tok = self.peek()
        if tok.kind == "ident" and tok.upper in _UNSUPPORTED_KEYWORDS:
            self._unsupported(tok.upper)

    # --- grammar -------------------------------------------------------
    def parse_query(self) -> SqlQuery:
        self._check_unsupported_keyword()
        self.expect_keyword("SELECT")
        distinct = self.accept_keyword("DISTINCT")
        select_items = self._select_items()
        self.expect_keyword("FROM")
        from_table, from_alias = self._table_target()
        joins = self._joins()
        where = None
        if self.accept_keyword("WHERE"):
            where = self._or_expr()
        group_by: tuple[ColumnRef, ...] = ()
        if self.accept_keyword("GROUP"):
            self.expect_keyword("BY")
            group_by = tuple(self._column_ref_list())
            if self.at_keyword("HAVING"):
                self._unsupported("HAVING")
        order_by: tuple[OrderItem, ...] = ()
        if self.accept_keyword("ORDER"):
            self.expect_keyword("BY")
            order_by = tuple(self._order_items())
        limit = None
        if self.accept_keyword("LIMIT"):
            limit = self._limit_value()
        self.accept_op(";")
        tok = self.peek()
        if tok.kind != "eof":
            self._check_unsupported_keyword()
            self._fail("expected end of statement")
        return SqlQuery(
            select_items=tuple(select_items),
            from_table=from_table,
            from_alias=from_alias,
            joins=tuple(joins),
            where=where,
            group_by=group_by,
            order_by=order_by,
            limit=limit,
            distinct=distinct,
        )

    def _select_items(self) -> list[SelectItem]:
        if self.accept_op("*"):
            if self.peek().kind == "op" and self.peek().text == ",":
                self._fail("'*' must be the only select item")
            return [SelectItem(Star())]
        items = [self._select_item()]
        self._check_arithmetic()
        while self.accept_op(","):
            items.append(self._select_item())
            self._check_arithmetic()
        return items

    def _check_arithmetic(self) -> None:
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("+", "-", "/", "*", "||"):
            self._unsupported("arithmetic expression")

    def _select_item(self) -> SelectItem:
        self._check_unsupported_keyword()
        tok = self.peek()
        if tok.kind != "ident":
            self._fail("expected column or aggregate")
        if self.peek(1).kind == "op" and self.peek(1).text == "(":
            expr: ColumnRef | Aggregate = self._aggregate()
        else:
            expr = self._column_ref()
        alias = self._alias()
        return SelectItem(expr, alias)

    def _aggregate(self) -> Aggregate:
        tok = self.advance()
        fn = tok.upper
        if fn not in AGGREGATE_FNS:
            raise UnsupportedSqlError(f"function {tok.text}", position=tok.pos)
        self.expect_op("(")
        if self.at_keyword("DISTINCT"):
            self._unsupported("DISTINCT inside aggregate")
        if self.accept_op("*"):
            arg = None
        else:
            arg = self._column_ref()
        self.expect_op(")")
        if self.at_keyword("OVER"):
            self._unsupported("window function")
        return Aggregate(fn, arg)

    def _column_ref(self) -> ColumnRef:
        self._check_unsupported_keyword()
        tok = self.peek()
        if tok.kind != "ident" or tok.upper in _CORE_KEYWORDS:
            self._fail("expected column name")
        first = self.advance().text
        if self.accept_op("."):
            if self.accept_op("*"):
                self._unsupported("qualified star")
            tok = self.peek()
            if tok.kind != "ident":
                self._fail("expected column name after '.'")
            return ColumnRef(self.advance().text, qualifier=first)
        return ColumnRef(first)

    def _alias(self) -> str | None:
        if self.accept_keyword("AS"):
            tok = self.peek()
            if tok.kind != "ident":
                self._fail("expected alias name")
            return self.advance().text
        tok = self.peek()
        if tok.kind == "ident" and tok.upper not in _KEYWORDS:
            return self.advance().text
        return None

    def _table_target(self) -> tuple[str, str | None]:
        self._check_unsupported_keyword()
        tok = self.peek()
        if tok.kind != "ident":
            self._fail("expected table name")
        if self.peek(1).kind == "op" and self.peek(1).text == "(":
            self._unsupported("table function")
        name = self.advance().text
        return name, self._alias()

    def _joins(self) -> list[Join]:
        joins: list[Join] = []
        while True:
            if self.at_keyword("LEFT", "RIGHT", "FULL", "CROSS", "NATURAL", "OUTER"):
                self._unsupported(f"{self.peek().upper} join")
            if self.accept_keyword("INNER"):
                self.expect_keyword("JOIN")
            elif not self.accept_keyword("JOIN"):
                break
            table, alias = self._table_target()
            self.expect_keyword("ON")
            left = self._column_ref()
            tok = self.peek()
            if tok.kind == "op" and tok.text in ("!=", "<>", "<", "<=", ">", ">="):
                self._unsupported("non-equality join condition")
            self.expect_op("=", "expected '=' in join condition")
            right = self._column_ref()
            joins.append(Join(table, alias, left, right))
        return joins

    def _or_expr(self) -> BoolExpr:
        expr = self._and_expr()
        while self.accept_keyword("OR"):
            expr = Or(expr, self._and_expr())
        return expr

    def _and_expr(self) -> BoolExpr:
        expr = self._not_term()
        while self.accept_keyword("AND"):
            expr = And(expr, self._not_term())
        return expr

    def _not_term(self) -> BoolExpr:
        if self.accept_keyword("NOT"):
            return Not(self._not_term())
        return self._primary()

    def _primary(self) -> BoolExpr:
        if self.peek().kind == "op" and self.peek().text == "(":
            if self.peek(1).kind == "ident" and self.peek(1).upper == "SELECT":
                self._unsupported("subquery")
            self.advance()
            expr = self._or_expr()
            self.expect_op(")")
            return expr
        return self._comparison()

    def _comparison(self) -> BoolExpr:
        left = self._operand()
        if self.at_keyword("NOT"):
            self.advance()
            if not self.accept_keyword("LIKE"):
                self._fail("expected LIKE after NOT")
            return Not(Comparison(left, "LIKE", self._operand()))
        if self.accept_keyword("LIKE"):
            return Comparison(left, "LIKE", self._operand())
        if self.at_keyword("IN", "BETWEEN", "IS"):
            self._unsupported(self.peek().upper)
        tok = self.peek()
        if tok.kind != "op" or tok.text not in ("=", "!=", "<>", "<=", ">=", "<", ">"):
            if tok.kind == "op" and tok.text in ("+", "-", "/", "*", "||"):
                self._unsupported("arithmetic expression")
            self._fail("expected comparison operator")
        op = self.advance().text
        if op == "<>":
            op = "!="
        return Comparison(left, op, self._operand())

    def _operand(self) -> Operand:
        tok = self.peek()
        if tok.kind == "number":
            return Literal(self.advance().text, is_string=False)
        if tok.kind == "op" and tok.text == "-" and self.peek(1).kind == "number":
            self.advance()
            return Literal("-" + self.advance().text, is_string=False)
        if tok.kind == "string":
            raw = self.advance().text
            return Literal(raw[1:-1].replace("''", "'"), is_string=True)
        if tok.kind == "op" and tok.text == "(":
            if self.peek(1).kind == "ident" and self.peek(1).upper == "SELECT":
                self._unsupported("subquery")
            self._unsupported("parenthesized expression")
        if tok.kind == "ident":
            if tok.upper in _UNSUPPORTED_KEYWORDS:
                self._unsupported(tok.upper)
            if tok.upper in AGGREGATE_FNS and self.peek(1).kind == "op" and self.peek(1).text == "(":
                self._unsupported("aggregate in WHERE")
            return self._column_ref()
        self._fail("expected value or column")
        raise AssertionError("unreachable")

    def _column_ref_list(self) -> list[ColumnRef]:
        refs = [self._column_ref()]
        while self.accept_op(","):
            refs.append(self._column_ref())
        return refs

    def _order_items(self) -> list[OrderItem]:
        items = []
        while True:
            tok = self.peek()
            if tok.kind == "ident" and self.peek(1).kind == "op" and self.peek(1).text == "(":
                self._unsupported("expression in ORDER BY")
            key = self._column_ref()
            descending = False
            if self.accept_keyword("DESC"):
                descending = True
            else:
                self.accept_keyword("ASC")
            items.append(OrderItem(key, descending))
            if not self.accept_op(","):
                break
        return items

    def _limit_value(self) -> int:
        tok = self.peek()
        if tok.kind != "number" or "." in tok.text:
            self._fail("expected non-negative integer after LIMIT")
        self.advance()
        return int(tok.text)


def parse_sql(text: str) -> SqlQuery:
    """Parse a single SELECT statement from the supported subset."""
    return _Parser(text).parse_query()
