#!/usr/bin/env python3
"""Regenerate the bundled fixture datasets under fixtures/.

Gold intermediate selections are derived here by scanning the raw data
directly (no package imports), so the fixtures stay an independent source
of truth for what the pipelines should do.
"""

from __future__ import annotations

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

MAX_HOPS = 3
FRONTIER_WIDTH = 10

# --------------------------------------------------------------------------
# KGQA: a small movie-domain graph. Inverse relations are materialized
# explicitly because traversal is head-to-tail only.
# --------------------------------------------------------------------------

DIRECTORS = {
    "Lena Hart": ["Silver Harbor", "Night Cartographer"],
    "Omar Reyes": ["Glass Orchard", "Paper Lanterns", "Silent Meridian"],
    "Ingrid Voss": ["Winter Apiary", "The Last Ferry"],
    "Felix Duarte": ["Copper Valley", "Orchid Thief"],
}
WRITERS = {
    "Clara Whitfield": ["Silver Harbor", "Glass Orchard"],
    "Hassan Idris": ["Night Cartographer", "Paper Lanterns", "Copper Valley"],
    "Beatrix Kohl": ["Winter Apiary", "Silent Meridian"],
    "Marcus Lindgren": ["The Last Ferry", "Orchid Thief"],
}
CAST = {
    "Silver Harbor": ["Nora Quinn", "Daniel Okafor"],
    "Night Cartographer": ["Nora Quinn", "Theo Brandt"],
    "Glass Orchard": ["Mira Castellanos", "Daniel Okafor"],
    "Paper Lanterns": ["Yuki Tanaka", "Priya Raman"],
    "Silent Meridian": ["Mira Castellanos", "Jonah Fleet"],
    "Winter Apiary": ["Theo Brandt", "Sofia Marek"],
    "The Last Ferry": ["Sofia Marek", "Yuki Tanaka"],
    "Copper Valley": ["Jonah Fleet", "Priya Raman"],
    "Orchid Thief": ["Daniel Okafor", "Sofia Marek"],
}
GENRES = {
    "Silver Harbor": "thriller",
    "Night Cartographer": "drama",
    "Glass Orchard": "thriller",
    "Paper Lanterns": "romance",
    "Silent Meridian": "documentary",
    "Winter Apiary": "drama",
    "The Last Ferry": "drama",
    "Copper Valley": "documentary",
    "Orchid Thief": "thriller",
}
YEARS = {
    "Silver Harbor": "2004",
    "Night Cartographer": "2011",
    "Glass Orchard": "1999",
    "Paper Lanterns": "2004",
    "Silent Meridian": "2015",
    "Winter Apiary": "2011",
    "The Last Ferry": "2011",
    "Copper Valley": "2018",
    "Orchid Thief": "2015",
}
BIRTHPLACES = {
    "Lena Hart": "Lisbon",
    "Omar Reyes": "Nairobi",
    "Ingrid Voss": "Gdansk",
    "Felix Duarte": "Osaka",
    "Nora Quinn": "Lisbon",
    "Daniel Okafor": "Nairobi",
    "Mira Castellanos": "Lisbon",
    "Theo Brandt": "Gdansk",
    "Yuki Tanaka": "Osaka",
    "Priya Raman": "Nairobi",
    "Jonah Fleet": "Gdansk",
    "Sofia Marek": "Osaka",
}


def movie_triples() -> list[tuple[str, str, str]]:
    triples = []
    for director, movies in DIRECTORS.items():
        for movie in movies:
            triples.append((movie, "directed_by", director))
            triples.append((director, "directed", movie))
    for writer, movies in WRITERS.items():
        for movie in movies:
            triples.append((movie, "written_by", writer))
            triples.append((writer, "wrote", movie))
    for movie, actors in CAST.items():
        for actor in actors:
            triples.append((movie, "starred_actors", actor))
            triples.append((actor, "starred_in", movie))
    for movie, genre in GENRES.items():
        triples.append((movie, "has_genre", genre))
    for movie, year in YEARS.items():
        triples.append((movie, "release_year", year))
    for person, city in BIRTHPLACES.items():
        triples.append((person, "born_in", city))
    return triples


HARPER_TRIPLES = [
    ("Harper Lee", "birthplace", "Monroeville"),
    ("Harper Lee", "residence", "Monroeville"),
    ("Harper Lee", "education", "Monroe County High School"),
]

KGQA_QUESTIONS = [
    # (id, question, topic, relation path)
    ("k00-harper-lee", "where did Harper Lee study?", "Harper Lee", ["education"]),
    ("k01", "who directed Silver Harbor?", "Silver Harbor", ["directed_by"]),
    ("k02", "what is the genre of Glass Orchard?", "Glass Orchard", ["has_genre"]),
    ("k03", "when was The Last Ferry released?", "The Last Ferry", ["release_year"]),
    ("k04", "who starred in Paper Lanterns?", "Paper Lanterns", ["starred_actors"]),
    ("k05", "who wrote Winter Apiary?", "Winter Apiary", ["written_by"]),
    ("k06", "where was Nora Quinn born?", "Nora Quinn", ["born_in"]),
    ("k07", "what movies did Felix Duarte direct?", "Felix Duarte", ["directed"]),
    ("k08", "what movies star Daniel Okafor?", "Daniel Okafor", ["starred_in"]),
    ("k09", "what movies did the director of Silver Harbor direct?",
     "Silver Harbor", ["directed_by", "directed"]),
    ("k10", "who are the actors in the movies directed by Omar Reyes?",
     "Omar Reyes", ["directed", "starred_actors"]),
    ("k11", "what are the genres of the movies starring Yuki Tanaka?",
     "Yuki Tanaka", ["starred_in", "has_genre"]),
    ("k12", "when were the movies directed by Ingrid Voss released?",
     "Ingrid Voss", ["directed", "release_year"]),
    ("k13", "who wrote the movies starring Theo Brandt?",
     "Theo Brandt", ["starred_in", "written_by"]),
    ("k14", "where was the director of Glass Orchard born?",
     "Glass Orchard", ["directed_by", "born_in"]),
    ("k15", "who directed the movies starring Sofia Marek?",
     "Sofia Marek", ["starred_in", "directed_by"]),
    ("k16", "who starred in the movies directed by the director of Glass Orchard?",
     "Glass Orchard", ["directed_by", "directed", "starred_actors"]),
    ("k17", "what are the genres of the movies directed by the director of Night Cartographer?",
     "Night Cartographer", ["directed_by", "directed", "has_genre"]),
    ("k18", "when were the movies starring the actors of Winter Apiary released?",
     "Winter Apiary", ["starred_actors", "starred_in", "release_year"]),
    ("k19", "where were the directors of the movies starring Priya Raman born?",
     "Priya Raman", ["starred_in", "directed_by", "born_in"]),
    ("k20", "who wrote the movies directed by the director of The Last Ferry?",
     "The Last Ferry", ["directed_by", "directed", "written_by"]),
]


def walk_gold_path(triples, topic, path):
    """Mirror one oracle-guided traversal: per hop, all triples from the
    sorted frontier with the gold relation are selected; the next frontier
    is the sorted, width-capped tail set."""
    frontier = [topic]
    relation_gold, triple_gold, answers = [], [], []
    for hop, relation in enumerate(path):
        hop_triples = []
        for e in sorted(frontier):
            tails = sorted(t for h, r, t in triples if h == e and r == relation)
            hop_triples.extend((e, relation, t) for t in tails)
        assert hop_triples, f"dead hop {hop} for topic {topic!r} relation {relation!r}"
        relation_gold.append([relation])
        triple_gold.append([f"({h}, {r}, {t})" for h, r, t in hop_triples])
        answers = sorted({t for _, _, t in hop_triples})
        frontier = answers[:FRONTIER_WIDTH]
    n = len(path)
    sufficiency = ["No"] * (n - 1) + (["Yes"] if n < MAX_HOPS else [])
    return relation_gold, triple_gold, sufficiency, answers


def build_kgqa():
    out = FIXTURES / "kgqa"
    out.mkdir(parents=True, exist_ok=True)
    movies = movie_triples()
    (out / "movies.kg.tsv").write_text(
        "# movie-domain graph with materialized inverse relations\n"
        + "".join(f"{h}\t{r}\t{t}\n" for h, r, t in movies),
        encoding="utf-8",
    )
    (out / "harper_lee.kg.tsv").write_text(
        "".join(f"{h}\t{r}\t{t}\n" for h, r, t in HARPER_TRIPLES), encoding="utf-8"
    )

    lines = []
    for qid, question, topic, path in KGQA_QUESTIONS:
        graph = HARPER_TRIPLES if qid.startswith("k00") else movies
        data_ref = "harper_lee.kg.tsv" if qid.startswith("k00") else "movies.kg.tsv"
        relation_gold, triple_gold, sufficiency, answers = walk_gold_path(
            graph, topic, path
        )
        lines.append(
            {
                "id": qid,
                "question": question,
                "task": "kgqa",
                "data_ref": data_ref,
                "topic_entity": topic,
                "gold_answers": answers,
                "gold_intermediates": {
                    "relation-select": relation_gold,
                    "triple-select": triple_gold,
                    "sufficiency": sufficiency,
                },
            }
        )
    write_jsonl(out / "questions.jsonl", lines)
    print(f"kgqa: {len(movies)} movie triples, {len(lines)} questions")


# --------------------------------------------------------------------------
# TableQA
# --------------------------------------------------------------------------

OLYMPICS = {
    "name": "olympics",
    "columns": ["year", "city", "country", "athletes"],
    "rows": [
        ["1896", "Athens", "Greece", "241"],
        ["1900", "Paris", "France", "997"],
        ["1904", "St. Louis", "United States", "651"],
        ["1908", "London", "United Kingdom", "2008"],
        ["1912", "Stockholm", "Sweden", "2408"],
        ["1920", "Antwerp", "Belgium", "2626"],
        ["1924", "Paris", "France", "3089"],
        ["1928", "Amsterdam", "Netherlands", "2883"],
    ],
}
DISTRICTS = {
    "name": "districts",
    "columns": ["District", "Incumbent", "Party", "First elected", "Result"],
    "rows": [
        ["2nd", "Miles Caraway", "Federalist", "1988", "Re-elected"],
        ["3rd", "Imogen Hale", "Unionist", "1994", "Re-elected"],
        ["5th", "Bram Holloway", "Federalist", "1990", "Retired"],
        ["7th", "Odette Marchand", "Unionist", "2002", "Re-elected"],
        ["9th", "Silas Ferry", "Federalist", "1998", "Re-elected"],
        ["12th", "June Albright", "Unionist", "2006", "Re-elected"],
        ["16th", "Caspian Wolfe", "Federalist", "2000", "Retired"],
        ["19th", "Rosa Delgado", "Unionist", "1996", "Re-elected"],
        ["21st", "Heath Bonner", "Federalist", "2004", "Re-elected"],
        ["23rd", "Vera Lindqvist", "Unionist", "2008", "Re-elected"],
    ],
}
PLANETS = {
    "name": "planets",
    "columns": ["planet", "moons", "diameter km", "discovered"],
    "rows": [
        ["Mercury", "0", "4879", "antiquity"],
        ["Venus", "0", "12104", "antiquity"],
        ["Earth", "1", "12742", "antiquity"],
        ["Mars", "2", "6779", "antiquity"],
        ["Jupiter", "79", "139820", "antiquity"],
        ["Saturn", "82", "116460", "antiquity"],
        ["Uranus", "27", "50724", "1781"],
        ["Neptune", "14", "49244", "1846"],
    ],
}

TABLEQA_QUESTIONS = [
    # (id, table ref, question, columns, items, answers)
    ("t01", "olympics", "which city hosted the 1896 olympics?",
     ["year", "city"], [1], ["Athens"]),
    ("t02", "districts", "what district does Rosa Delgado represent?",
     ["District", "Incumbent"], [8], ["19th"]),
    ("t03", "planets", "how many moons does Neptune have?",
     ["planet", "moons"], [8], ["14"]),
    ("t04", "olympics", "which country hosted the 1912 olympics?",
     ["year", "country"], [5], ["Sweden"]),
    ("t05", "planets", "what is the diameter km of Mars?",
     ["planet", "diameter km"], [4], ["6779"]),
    ("t06", "planets", "which planet has 82 moons?",
     ["planet", "moons"], [6], ["Saturn"]),
    ("t07", "districts", "who represents the 7th district?",
     ["District", "Incumbent"], [4], ["Odette Marchand"]),
    ("t08", "olympics", "in which years did Paris host the olympics?",
     ["year", "city"], [2, 7], ["1900", "1924"]),
    ("t09", "districts", "which party does the incumbent of the 2nd district belong to?",
     ["District", "Incumbent", "Party"], [1], ["Federalist"]),
    ("t10", "planets", "when was Uranus discovered?",
     ["planet", "discovered"], [7], ["1781"]),
]

TABLEQA_STATEMENTS = [
    ("s01", "olympics", "the 1896 olympics were hosted in Athens",
     ["year", "city"], [1], "entailed"),
    ("s02", "olympics", "Paris hosted the 1904 olympics",
     ["year", "city"], [3], "refuted"),
    ("s03", "planets", "Saturn has 82 moons",
     ["planet", "moons"], [6], "entailed"),
    ("s04", "planets", "Mars has more moons than Earth",
     ["planet", "moons"], [3, 4], "entailed"),
    ("s05", "olympics", "Amsterdam hosted the 1920 olympics",
     ["year", "city"], [6], "refuted"),
]

TABLES = {"olympics": OLYMPICS, "districts": DISTRICTS, "planets": PLANETS}


def check_tableqa_entry(table_ref, columns, items):
    table = TABLES[table_ref]
    for c in columns:
        assert c in table["columns"], f"{table_ref}: unknown column {c!r}"
    for i in items:
        assert 1 <= i <= len(table["rows"]), f"{table_ref}: item {i} out of range"


def build_tableqa():
    out = FIXTURES / "tableqa"
    out.mkdir(parents=True, exist_ok=True)
    for ref, doc in TABLES.items():
        (out / f"{ref}.table.json").write_text(
            json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )

    questions = []
    for qid, ref, question, columns, items, answers in TABLEQA_QUESTIONS:
        check_tableqa_entry(ref, columns, items)
        questions.append(
            {
                "id": qid,
                "question": question,
                "task": "tableqa",
                "data_ref": f"{ref}.table.json",
                "gold_answers": answers,
                "gold_intermediates": {
                    "column-select": columns,
                    "row-select": [f"item {i}" for i in items],
                },
            }
        )
    write_jsonl(out / "questions.jsonl", questions)

    statements = []
    for qid, ref, statement, columns, items, label in TABLEQA_STATEMENTS:
        check_tableqa_entry(ref, columns, items)
        statements.append(
            {
                "id": qid,
                "question": statement,
                "task": "tableqa",
                "statement": True,
                "data_ref": f"{ref}.table.json",
                "gold_answers": [label],
                "gold_intermediates": {
                    "column-select": columns,
                    "row-select": [f"item {i}" for i in items],
                },
            }
        )
    write_jsonl(out / "statements.jsonl", statements)
    print(f"tableqa: {len(questions)} questions, {len(statements)} statements")


# --------------------------------------------------------------------------
# Text-to-SQL
# --------------------------------------------------------------------------

DOGS_BREEDS = {
    "name": "dogs_breeds",
    "tables": [
        {
            "name": "Dogs",
            "columns": ["dog_id", "name", "age", "breed_code"],
            "rows": [
                ["1", "Rex", "3", "LAB"],
                ["2", "Bella", "5", "PUG"],
                ["3", "Max", "2", "LAB"],
                ["4", "Luna", "4", "LAB"],
            ],
        },
        {
            "name": "Breeds",
            "columns": ["breed_code", "breed_name"],
            "rows": [["LAB", "Labrador"], ["PUG", "Pug"]],
        },
    ],
    "foreign_keys": [
        {"from_table": "Dogs", "from_column": "breed_code",
         "to_table": "Breeds", "to_column": "breed_code"}
    ],
}
SCHOOL = {
    "name": "school",
    "tables": [
        {
            "name": "Students",
            "columns": ["student_id", "name", "grade", "class_id"],
            "rows": [
                ["1", "Ana", "10", "C1"],
                ["2", "Bram", "11", "C2"],
                ["3", "Cleo", "10", "C1"],
                ["4", "Dev", "12", "C3"],
                ["5", "Edda", "11", "C2"],
                ["6", "Finn", "10", "C2"],
                ["7", "Gus", "12", "C1"],
                ["8", "Hana", "10", "C3"],
            ],
        },
        {
            "name": "Classes",
            "columns": ["class_id", "teacher", "room"],
            "rows": [
                ["C1", "Ms. Rivera", "101"],
                ["C2", "Mr. Stein", "204"],
                ["C3", "Ms. Okoye", "305"],
            ],
        },
    ],
    "foreign_keys": [
        {"from_table": "Students", "from_column": "class_id",
         "to_table": "Classes", "to_column": "class_id"}
    ],
}
CONCERTS = {
    "name": "concerts",
    "tables": [
        {
            "name": "Stadiums",
            "columns": ["stadium_id", "name", "capacity", "city"],
            "rows": [
                ["S1", "Harbor Arena", "52000", "Lisbon"],
                ["S2", "Northfield Park", "31000", "Gdansk"],
                ["S3", "Sunset Bowl", "68000", "Osaka"],
                ["S4", "Riverside Grounds", "24000", "Lisbon"],
            ],
        },
        {
            "name": "Concerts",
            "columns": ["concert_id", "title", "stadium_id", "year"],
            "rows": [
                ["1", "Echo Nights", "S1", "2019"],
                ["2", "Golden Hour", "S3", "2019"],
                ["3", "Stone Circuit", "S2", "2020"],
                ["4", "Velvet Skies", "S1", "2021"],
                ["5", "Aurora Chase", "S3", "2020"],
                ["6", "Paper Crowns", "S4", "2019"],
            ],
        },
    ],
    "foreign_keys": [
        {"from_table": "Concerts", "from_column": "stadium_id",
         "to_table": "Stadiums", "to_column": "stadium_id"}
    ],
}

TEXT2SQL_QUESTIONS = [
    ("d01", "dogs_breeds", "How many dogs are there?",
     ["Dogs"], "SELECT COUNT(*) FROM Dogs"),
    ("d02", "dogs_breeds", "What are the names of dogs older than 3?",
     ["Dogs"], "SELECT name FROM Dogs WHERE age > 3"),
    ("d03", "dogs_breeds", "How many dogs are there of each breed?",
     ["Dogs", "Breeds"],
     "SELECT B.breed_name, COUNT(*) AS n FROM Dogs AS D "
     "JOIN Breeds AS B ON D.breed_code = B.breed_code GROUP BY B.breed_name"),
    ("d04", "dogs_breeds", "What are the names of the dogs of the Labrador breed?",
     ["Dogs", "Breeds"],
     "SELECT D.name FROM Dogs AS D JOIN Breeds AS B ON D.breed_code = B.breed_code "
     "WHERE B.breed_name = 'Labrador'"),
    ("d05", "dogs_breeds", "What is the average age of the dogs?",
     ["Dogs"], "SELECT AVG(age) FROM Dogs"),
    ("e01", "school", "How many students are in each grade?",
     ["Students"], "SELECT grade, COUNT(*) AS n FROM Students GROUP BY grade"),
    ("e02", "school", "Who teaches class C1?",
     ["Classes"], "SELECT teacher FROM Classes WHERE class_id = 'C1'"),
    ("e03", "school", "What are the names of students taught by Ms. Rivera?",
     ["Students", "Classes"],
     "SELECT S.name FROM Students AS S JOIN Classes AS C ON S.class_id = C.class_id "
     "WHERE C.teacher = 'Ms. Rivera'"),
    ("e04", "school", "What are the names of students in grade 10, ordered by name?",
     ["Students"], "SELECT name FROM Students WHERE grade = 10 ORDER BY name ASC"),
    ("e05", "school", "What are the distinct grades of the students?",
     ["Students"], "SELECT DISTINCT grade FROM Students"),
    ("c01", "concerts", "What are the titles of concerts held in 2019?",
     ["Concerts"], "SELECT title FROM Concerts WHERE year = 2019"),
    ("c02", "concerts", "What are the names of stadiums with capacity over 50000?",
     ["Stadiums"], "SELECT name FROM Stadiums WHERE capacity > 50000"),
    ("c03", "concerts", "How many concerts were held at each stadium?",
     ["Stadiums", "Concerts"],
     "SELECT S.name, COUNT(*) AS n FROM Concerts AS C "
     "JOIN Stadiums AS S ON C.stadium_id = S.stadium_id GROUP BY S.name"),
    ("c04", "concerts", "Which stadiums are in Lisbon?",
     ["Stadiums"], "SELECT name FROM Stadiums WHERE city = 'Lisbon'"),
    ("c05", "concerts",
     "What are the titles of concerts held at stadiums with capacity over 50000, ordered by title?",
     ["Stadiums", "Concerts"],
     "SELECT C.title FROM Concerts AS C JOIN Stadiums AS S ON C.stadium_id = S.stadium_id "
     "WHERE S.capacity > 50000 ORDER BY C.title ASC"),
]

DATABASES = {"dogs_breeds": DOGS_BREEDS, "school": SCHOOL, "concerts": CONCERTS}


def build_text2sql():
    out = FIXTURES / "text2sql"
    out.mkdir(parents=True, exist_ok=True)
    for ref, doc in DATABASES.items():
        (out / f"{ref}.db.json").write_text(
            json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
    questions = []
    for qid, ref, question, tables, gold_sql in TEXT2SQL_QUESTIONS:
        known = {t["name"] for t in DATABASES[ref]["tables"]}
        assert set(tables) <= known, f"{qid}: unknown table in {tables}"
        questions.append(
            {
                "id": qid,
                "question": question,
                "task": "text2sql",
                "data_ref": f"{ref}.db.json",
                "gold_sql": gold_sql,
                "gold_intermediates": {"table-select": tables},
            }
        )
    write_jsonl(out / "questions.jsonl", questions)
    print(f"text2sql: {len(DATABASES)} databases, {len(questions)} questions")


def write_jsonl(path: Path, records: list[dict]) -> None:
    path.write_text(
        "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records),
        encoding="utf-8",
    )


if __name__ == "__main__":
    build_kgqa()
    build_tableqa()
    build_text2sql()
