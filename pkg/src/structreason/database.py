"""Multi-table database model with schema read interfaces.

A database is an ordered collection of named tables plus declared foreign
keys. Schema summaries carry names only, never row data; row access happens
through the SQL engine.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

from .errors import LoadError
from .tables import Table, table_from_document, load_table_csv


@dataclass(frozen=True)
class ForeignKey:
    from_table: str
    from_column: str
    to_table: str
    to_column: str

    def render(self) -> str:
        return f"{self.from_table}.{self.from_column} = {self.to_table}.{self.to_column}"


@dataclass
class Database:
    name: str
    tables: list[Table]
    foreign_keys: list[ForeignKey]

    def __post_init__(self):
        if not self.tables:
            raise ValueError("a database needs at least one table")
        names = [t.name or "" for t in self.tables]
        if any(not n.strip() for n in names):
            raise ValueError("every database table needs a name")
        folded = [n.strip().casefold() for n in names]
        if len(set(folded)) != len(folded):
            raise ValueError(f"duplicate table name in {names}")
        for fk in self.foreign_keys:
            for table_name, column in (
                (fk.from_table, fk.from_column),
                (fk.to_table, fk.to_column),
            ):
                table = self.find_table(table_name)
                if table is None:
                    raise ValueError(f"foreign key {fk.render()} names unknown table {table_name!r}")
                if column.strip().casefold() not in (c.strip().casefold() for c in table.columns):
                    raise ValueError(
                        f"foreign key {fk.render()} names unknown column {table_name}.{column}"
                    )

    def find_table(self, name: str) -> Table | None:
        """Look a table up by trimmed, case-insensitive name."""
        key = name.strip().casefold()
        for t in self.tables:
            if (t.name or "").strip().casefold() == key:
                return t
        return None


@dataclass(frozen=True)
class TableSchema:
    name: str
    columns: tuple[str, ...]


@dataclass(frozen=True)
class SchemaSummary:
    """Names-only view of (part of) a database. Carries no row data."""

    tables: tuple[TableSchema, ...]
    foreign_keys: tuple[ForeignKey, ...] = ()


def load_database(source: IO[bytes] | IO[str]) -> Database:
    """Load a database from JSON with "tables" and "foreign_keys".

    Each table entry is a table document with a "name"; each foreign key is
    an object with from_table/from_column/to_table/to_column.
    """
    raw = source.read()
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise LoadError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "tables" not in doc:
        raise LoadError('database document needs a "tables" list')

    tables = []
    for entry in doc["tables"]:
        table = table_from_document(entry)
        if not (table.name or "").strip():
            raise LoadError("every database table needs a name")
        tables.append(table)

    fks = [_foreign_key_from_doc(e) for e in doc.get("foreign_keys", [])]
    try:
        return Database(name=doc.get("name", ""), tables=tables, foreign_keys=fks)
    except ValueError as exc:
        raise LoadError(str(exc)) from exc


def _foreign_key_from_doc(entry) -> ForeignKey:
    keys = ("from_table", "from_column", "to_table", "to_column")
    if not isinstance(entry, dict) or not all(k in entry for k in keys):
        raise LoadError(f"foreign key entry needs {', '.join(keys)}: got {entry!r}")
    return ForeignKey(*(str(entry[k]) for k in keys))


def load_database_dir(path: str | Path) -> Database:
    """Load a database from a directory of CSV files plus a schema.json.

    Table names are the CSV file stems; schema.json declares the database
    name and foreign keys.
    """
    root = Path(path)
    schema_path = root / "schema.json"
    if not schema_path.exists():
        raise LoadError(f"missing {schema_path}")
    try:
        schema = json.loads(schema_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise LoadError(f"invalid JSON in {schema_path}: {exc}") from exc

    tables = []
    for csv_path in sorted(root.glob("*.csv")):
        with open(csv_path, "r", encoding="utf-8", newline="") as fh:
            tables.append(load_table_csv(fh, name=csv_path.stem))
    if not tables:
        raise LoadError(f"no CSV tables found in {root}")

    fks = [_foreign_key_from_doc(e) for e in schema.get("foreign_keys", [])]
    try:
        return Database(name=schema.get("name", root.name), tables=tables, foreign_keys=fks)
    except ValueError as exc:
        raise LoadError(str(exc)) from exc


def extract_table_and_column_names(db: Database) -> SchemaSummary:
    """Every table name with its full column list, in storage order."""
    return SchemaSummary(
        tables=tuple(TableSchema(t.name or "", tuple(t.columns)) for t in db.tables)
    )


def extract_tables_information(db: Database, names: Iterable[str]) -> SchemaSummary:
    """Schema summary restricted to the named tables.

    Includes exactly the foreign keys whose both endpoints lie in the
    selection. Unknown names raise a ValueError listing the valid ones.
    """
    wanted = {n.strip().casefold() for n in names}
    valid = {(t.name or "").strip().casefold(): t for t in db.tables}
    unknown = wanted - set(valid)
    if unknown:
        raise ValueError(
            f"unknown table name(s) {sorted(unknown)}; valid names: "
            f"{[t.name for t in db.tables]}"
        )
    selected = [t for t in db.tables if (t.name or "").strip().casefold() in wanted]
    selected_names = {(t.name or "").strip().casefold() for t in selected}
    fks = tuple(
        fk
        for fk in db.foreign_keys
        if fk.from_table.strip().casefold() in selected_names
        and fk.to_table.strip().casefold() in selected_names
    )
    return SchemaSummary(
        tables=tuple(TableSchema(t.name or "", tuple(t.columns)) for t in selected),
        foreign_keys=fks,
    )
