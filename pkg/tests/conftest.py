from __future__ import annotations

import io
import os
from pathlib import Path

import pytest

from structreason import load_database, load_kg, load_table

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"

UPDATE_GOLDENS = os.environ.get("STRUCTREASON_UPDATE_GOLDENS", "") == "1"


def check_golden(path: Path, actual: str) -> None:
    """Compare text against a committed golden file, byte-exactly.

    Set STRUCTREASON_UPDATE_GOLDENS=1 to rewrite the files instead.
    """
    if UPDATE_GOLDENS:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(actual, encoding="utf-8")
        return
    assert path.exists(), f"missing golden file {path}; run with STRUCTREASON_UPDATE_GOLDENS=1"
    expected = path.read_text(encoding="utf-8")
    assert actual == expected, f"output does not match golden file {path}"


@pytest.fixture(scope="session")
def harper_kg():
    with open(FIXTURES / "kgqa" / "harper_lee.kg.tsv", "rb") as fh:
        return load_kg(fh)


@pytest.fixture(scope="session")
def movies_kg():
    with open(FIXTURES / "kgqa" / "movies.kg.tsv", "rb") as fh:
        return load_kg(fh)


@pytest.fixture()
def athens_table():
    doc = b'{"columns": ["year", "city"], "rows": [["1896", "Athens"]], "name": "olympics"}'
    return load_table(io.BytesIO(doc))


@pytest.fixture(scope="session")
def districts_table():
    with open(FIXTURES / "tableqa" / "districts.table.json", "rb") as fh:
        return load_table(fh)


@pytest.fixture(scope="session")
def dogs_breeds_db():
    with open(FIXTURES / "text2sql" / "dogs_breeds.db.json", "rb") as fh:
        return load_database(fh)
