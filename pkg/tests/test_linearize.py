from __future__ import annotations

from hypothesis import given, settings, strategies as st

from structreason import (
    Triple,
    extract_table_and_column_names,
    extract_tables_information,
    linearize_relations,
    linearize_rows,
    linearize_schema,
    linearize_triples,
    truncate_for_budget,
)
from structreason.tables import CellValue, Table, extract_subtable

from .conftest import GOLDEN, check_golden
from .linearize_reverse import (
    unlinearize_relations,
    unlinearize_rows,
    unlinearize_schema,
    unlinearize_triples,
)


def test_relations_list_format():
    out = linearize_relations(["birthplace", "education"])
    assert out == "[birthplace, education]"
    check_golden(GOLDEN / "relations_list.txt", out + "\n")


def test_relations_empty_and_single():
    assert linearize_relations([]) == "[]"
    assert linearize_relations(["education"]) == "[education]"


def test_triples_format():
    out = linearize_triples(
        [Triple("HarperLee", "education", "MonroeCountyHS")]
    )
    assert out == "(HarperLee, education, MonroeCountyHS)"


def test_triples_empty_and_pair():
    assert linearize_triples([]) == ""
    out = linearize_triples([Triple("a", "r", "b"), Triple("a", "r", "c")])
    assert out == "(a, r, b); (a, r, c)"
    check_golden(GOLDEN / "triples_pair.txt", out + "\n")


def test_rows_athens_golden(athens_table):
    assert linearize_rows(athens_table) == "row 1: (year, 1896), (city, Athens)"


def test_rows_empty_table():
    t = Table(columns=["a"], rows=[])
    assert linearize_rows(t) == ""


def test_rows_two_by_two():
    t = Table(columns=["a", "b"], rows=[[CellValue("1"), CellValue("x")],
                                        [CellValue("2"), CellValue("y")]])
    out = linearize_rows(t)
    assert out == "row 1: (a, 1), (b, x); row 2: (a, 2), (b, y)"
    check_golden(GOLDEN / "rows_2x2.txt", out + "\n")


def test_rows_keep_source_numbers_for_subtables(districts_table):
    sub = extract_subtable(districts_table, {0, 1}, {7})
    out = linearize_rows(sub)
    assert out.startswith("row 8: ")
    assert "(District, 19th)" in out


def test_schema_with_foreign_keys(dogs_breeds_db):
    out = linearize_schema(extract_tables_information(dogs_breeds_db, {"Dogs", "Breeds"}))
    assert out == (
        "table Dogs: columns [dog_id, name, age, breed_code]; "
        "table Breeds: columns [breed_code, breed_name]; "
        "foreign keys: [Dogs.breed_code = Breeds.breed_code]"
    )
    check_golden(GOLDEN / "schema_dogs_breeds.txt", out + "\n")


def test_schema_without_foreign_keys(dogs_breeds_db):
    out = linearize_schema(extract_table_and_column_names(dogs_breeds_db))
    assert "foreign keys" not in out


def test_truncation_guard():
    text, truncated = truncate_for_budget("abcdef", 4)
    assert (text, truncated) == ("abcd", True)
    text, truncated = truncate_for_budget("abc", 4)
    assert (text, truncated) == ("abc", False)


def test_separator_characters_escaped():
    out = linearize_relations(["a,b", "c(d)", "e;f", "g\\h"])
    assert out == "[a\\,b, c\\(d\\), e\\;f, g\\\\h]"
    assert unlinearize_relations(out) == ["a,b", "c(d)", "e;f", "g\\h"]


# property tests: every format re-parses to exactly its input

plain_text = st.text(
    st.characters(blacklist_categories=("Cs",), blacklist_characters="\\,();[]"),
    min_size=1,
    max_size=12,
)
any_text = st.text(
    st.characters(blacklist_categories=("Cs",)), min_size=0, max_size=12
)


@given(st.lists(plain_text, max_size=8))
@settings(max_examples=80, deadline=None)
def test_relations_round_trip_plain(items):
    assert unlinearize_relations(linearize_relations(items)) == items


@given(st.lists(any_text.filter(lambda s: s != ""), max_size=6))
@settings(max_examples=80, deadline=None)
def test_relations_round_trip_with_escaping(items):
    assert unlinearize_relations(linearize_relations(items)) == items


@given(st.lists(st.tuples(plain_text, plain_text, plain_text), max_size=6))
@settings(max_examples=80, deadline=None)
def test_triples_round_trip(raw):
    triples = [Triple(*t) for t in raw]
    assert unlinearize_triples(linearize_triples(triples)) == raw


@given(
    st.integers(min_value=1, max_value=4).flatmap(
        lambda width: st.tuples(
            st.lists(plain_text, min_size=width, max_size=width, unique=True),
            st.lists(
                st.lists(any_text, min_size=width, max_size=width),
                max_size=5,
            ),
        )
    )
)
@settings(max_examples=80, deadline=None)
def test_rows_round_trip(table_spec):
    columns, raw_rows = table_spec
    t = Table(columns=columns, rows=[[CellValue(v) for v in row] for row in raw_rows])
    parsed = unlinearize_rows(linearize_rows(t))
    assert [n for n, _ in parsed] == list(range(1, len(raw_rows) + 1))
    for (_, cells), row in zip(parsed, raw_rows):
        assert cells == list(zip(columns, row))


def test_schema_round_trip(dogs_breeds_db):
    summary = extract_tables_information(dogs_breeds_db, {"Dogs", "Breeds"})
    tables, fks = unlinearize_schema(linearize_schema(summary))
    assert tables == [
        ("Dogs", ["dog_id", "name", "age", "breed_code"]),
        ("Breeds", ["breed_code", "breed_name"]),
    ]
    assert fks == ["Dogs.breed_code = Breeds.breed_code"]


@given(st.lists(plain_text, max_size=8), st.lists(plain_text, max_size=8))
@settings(max_examples=40, deadline=None)
def test_linearization_is_pure(a, b):
    assert linearize_relations(a) == linearize_relations(a)
    assert linearize_relations(b) == linearize_relations(b)
