"""Single-table data model with column/row read interfaces.

Cells keep their raw text; a numeric interpretation (comma/$/% stripped,
parsed as a decimal) is attached when available but never replaces the raw
text in prompts. Tables are immutable after load by convention.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import IO, Iterable

from .errors import LoadError

_STRIP_CHARS = str.maketrans("", "", ",$%")


def parse_numeric(raw: str) -> Decimal | None:
    """Decimal value of a cell-like string, or None when it is not numeric.

    Commas, dollar signs, and percent signs are stripped before parsing.
    """
    s = raw.strip().translate(_STRIP_CHARS)
    if not s:
        return None
    try:
        value = Decimal(s)
    except (InvalidOperation, ValueError):
        return None
    if not value.is_finite():
        return None
    return value


def canonical_numeric(value: Decimal) -> str:
    """Canonical text form of a decimal: '3.0' -> '3', '1,896' -> '1896'."""
    if value == 0:
        return "0"
    return format(value.normalize(), "f")


@dataclass(frozen=True)
class CellValue:
    raw: str
    numeric: Decimal | None = field(init=False, default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "numeric", parse_numeric(self.raw))


@dataclass
class Table:
    columns: list[str]
    rows: list[list[CellValue]]
    name: str | None = None

    def __post_init__(self):
        if not self.columns:
            raise ValueError("a table needs at least one column")
        trimmed = [c.strip() for c in self.columns]
        if len(set(trimmed)) != len(trimmed):
            raise ValueError(f"duplicate column name in {trimmed}")
        for j, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ValueError(
                    f"row {j} has {len(row)} cells, expected {len(self.columns)}"
                )

    @property
    def column_count(self) -> int:
        return len(self.columns)

    @property
    def row_count(self) -> int:
        return len(self.rows)


@dataclass
class SubTable:
    """A column/row selection of a source table.

    origin_columns/origin_rows record where each cell came from; both are
    strictly increasing source indices.
    """

    columns: list[str]
    rows: list[list[CellValue]]
    origin_columns: list[int]
    origin_rows: list[int]
    name: str | None = None

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.origin_columns, self.origin_columns[1:])):
            raise ValueError("origin_columns must be strictly increasing")
        if any(b <= a for a, b in zip(self.origin_rows, self.origin_rows[1:])):
            raise ValueError("origin_rows must be strictly increasing")
        if len(self.origin_columns) != len(self.columns):
            raise ValueError("origin_columns does not match column count")
        if len(self.origin_rows) != len(self.rows):
            raise ValueError("origin_rows does not match row count")


def _cell_text(value) -> str:
    if isinstance(value, str):
        return value
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return json.dumps(value)


def load_table(source: IO[bytes] | IO[str]) -> Table:
    """Load a table from a JSON document with "columns" and "rows".

    Non-string cells (numbers, booleans, null) are coerced to text.
    """
    raw = source.read()
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise LoadError(f"invalid JSON: {exc}") from exc
    return table_from_document(doc)


def table_from_document(doc: dict) -> Table:
    """Build a Table from an already-parsed JSON document."""
    if not isinstance(doc, dict) or "columns" not in doc or "rows" not in doc:
        raise LoadError('table document needs "columns" and "rows"')
    columns = doc["columns"]
    if not isinstance(columns, list) or not all(isinstance(c, str) for c in columns):
        raise LoadError('"columns" must be a list of strings')
    if not columns:
        raise LoadError("a table needs at least one column")
    trimmed = [c.strip() for c in columns]
    if len(set(trimmed)) != len(trimmed):
        raise LoadError(f"duplicate column name in {trimmed}")
    rows: list[list[CellValue]] = []
    for j, row in enumerate(doc["rows"], start=1):
        if not isinstance(row, list) or len(row) != len(columns):
            raise LoadError(
                f"ragged row {j}: expected {len(columns)} cells, "
                f"got {len(row) if isinstance(row, list) else type(row).__name__}"
            )
        rows.append([CellValue(_cell_text(v)) for v in row])
    name = doc.get("name")
    return Table(columns=list(columns), rows=rows, name=name)


def load_table_csv(source: IO[bytes] | IO[str], name: str | None = None) -> Table:
    """Load a table from CSV: first line is the header, RFC-4180 quoting."""
    raw = source.read()
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    reader = csv.reader(io.StringIO(raw))
    records = list(reader)
    if not records or not records[0]:
        raise LoadError("CSV is missing a header line")
    columns = records[0]
    trimmed = [c.strip() for c in columns]
    if len(set(trimmed)) != len(trimmed):
        raise LoadError(f"duplicate column name in {trimmed}")
    rows: list[list[CellValue]] = []
    for j, record in enumerate(records[1:], start=1):
        if len(record) != len(columns):
            raise LoadError(f"ragged row {j}: expected {len(columns)} cells, got {len(record)}")
        rows.append([CellValue(v) for v in record])
    return Table(columns=columns, rows=rows, name=name)


def dump_table(t: Table | SubTable) -> dict:
    """JSON-ready document mirroring the load format."""
    doc = {"columns": list(t.columns), "rows": [[c.raw for c in row] for row in t.rows]}
    if t.name is not None:
        doc["name"] = t.name
    return doc


def extract_column_names(t: Table) -> list[str]:
    """Column names in table order."""
    return list(t.columns)


def _check_indices(indices: Iterable[int], limit: int, kind: str) -> list[int]:
    ordered = sorted(set(indices))
    for i in ordered:
        if not 0 <= i < limit:
            raise ValueError(f"{kind} index {i} out of range [0, {limit})")
    return ordered


def extract_columns(t: Table, cols: Iterable[int]) -> SubTable:
    """Selected columns (in table order) with all rows."""
    return extract_subtable(t, cols, range(t.row_count))


def extract_subtable(t: Table, cols: Iterable[int], rows: Iterable[int]) -> SubTable:
    """The sub-table at the given column and row indices, in source order."""
    col_idx = _check_indices(cols, t.column_count, "column")
    row_idx = _check_indices(rows, t.row_count, "row")
    return SubTable(
        columns=[t.columns[i] for i in col_idx],
        rows=[[t.rows[j][i] for i in col_idx] for j in row_idx],
        origin_columns=col_idx,
        origin_rows=row_idx,
        name=t.name,
    )


def resolve_column_indices(t: Table, names: Iterable[str]) -> list[int]:
    """Map column names (as echoed by a model) to indices.

    Matching is trimmed and case-insensitive; an ambiguous name resolves to
    the first match in table order. Unknown names are dropped. The result is
    deduplicated and in table order.
    """
    folded = [c.strip().casefold() for c in t.columns]
    found: set[int] = set()
    for name in names:
        key = name.strip().casefold()
        for i, col in enumerate(folded):
            if col == key:
                found.add(i)
                break
    return sorted(found)
