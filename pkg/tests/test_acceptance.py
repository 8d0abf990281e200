"""Acceptance gate: one test per shipping criterion, each printing a
PASS line. Run with `pytest tests/test_acceptance.py -v -s`."""

from __future__ import annotations

import random
import statistics
import time

from structreason import (
    KnowledgeGraph,
    Triple,
    extract_neighbor_relations,
    extract_triples,
    linearize_rows,
    load_dataset,
    replay_trace,
    run_eval,
)
from structreason.evaluation import oracle_backend_factory
from structreason.sql import execute
from structreason.sql.executor import ResultSet
from structreason.tables import CellValue, Table, extract_subtable
from structreason.traces import load_trace, trace_to_json, validate_trace
from structreason.sql import results_equal

from . import test_case_studies
from .conftest import FIXTURES
from .sql_reference import random_database, random_query, reference_execute


def _ok(name: str) -> None:
    print(f"[ACCEPTANCE] {name}: PASS")


def test_oracle_completeness_all_fixtures(tmp_path):
    started = time.perf_counter()
    suites = [
        ("kgqa", FIXTURES / "kgqa" / "questions.jsonl", FIXTURES / "kgqa"),
        ("tableqa", FIXTURES / "tableqa" / "questions.jsonl", FIXTURES / "tableqa"),
        ("statements", FIXTURES / "tableqa" / "statements.jsonl", FIXTURES / "tableqa"),
        ("text2sql", FIXTURES / "text2sql" / "questions.jsonl", FIXTURES / "text2sql"),
    ]
    sizes = {}
    for name, data, artifacts in suites:
        dataset = load_dataset(data)
        sizes[name] = len(dataset)
        report = run_eval(
            dataset, oracle_backend_factory,
            artifacts_dir=artifacts, out_dir=tmp_path / name,
        )
        assert report.aggregate == 1.0, f"{name} aggregate {report.aggregate}"
        assert report.excluded == 0

    assert sizes["kgqa"] >= 20
    assert sizes["tableqa"] + sizes["statements"] >= 15
    assert sizes["statements"] >= 5
    assert sizes["text2sql"] >= 15
    kgqa = load_dataset(FIXTURES / "kgqa" / "questions.jsonl")
    hop_counts = {len(e.gold_intermediates["relation-select"]) for e in kgqa}
    assert {1, 2, 3} <= hop_counts
    dbs = {e.data_ref for e in load_dataset(FIXTURES / "text2sql" / "questions.jsonl")}
    assert len(dbs) == 3

    elapsed = time.perf_counter() - started
    assert elapsed < 10, f"oracle-completeness took {elapsed:.1f}s"
    _ok(f"oracle-completeness (aggregate 1.0 on all fixtures, {elapsed:.1f}s)")


def test_case_study_goldens(harper_kg, districts_table, dogs_breeds_db):
    test_case_studies.test_kg_case_study(harper_kg)
    test_case_studies.test_table_case_study(districts_table)
    test_case_studies.test_db_case_study(dogs_breeds_db)
    _ok("case-study goldens (three scripted flows, prompts byte-exact)")


def test_linearization_golden():
    table = Table(
        columns=["year", "city"],
        rows=[[CellValue("1896"), CellValue("Athens")]],
    )
    assert linearize_rows(table) == "row 1: (year, 1896), (city, Athens)"
    _ok("linearization golden (Athens row)")


def test_sql_engine_oracle_equivalence():
    rng = random.Random(424242)
    started = time.perf_counter()
    checked = 0
    while checked < 200:
        db = random_database(rng)
        for _ in range(4):
            q = random_query(rng, db)
            mine = execute(db, q)
            ref = reference_execute(db, q)
            assert results_equal(
                mine, ResultSet(columns=[], rows=ref.rows, ordered=ref.ordered)
            ), f"divergence: {q}"
            checked += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 30, f"equivalence run took {elapsed:.1f}s"
    _ok(f"sql oracle equivalence ({checked} random queries, {elapsed:.1f}s)")


def test_interface_brute_force_equivalence():
    rng = random.Random(99)
    for _ in range(50):
        n = rng.randint(1, 500)
        entities = [f"e{i}" for i in range(max(3, n // 8))]
        relations = [f"r{i}" for i in range(max(2, n // 30))]
        triples = [
            Triple(rng.choice(entities), rng.choice(relations), rng.choice(entities))
            for _ in range(n)
        ]
        kg = KnowledgeGraph.from_triples(triples)
        for e in rng.sample(sorted(kg.entities), min(10, len(kg.entities))):
            scan_rels = sorted({t.relation for t in kg.triples if t.head == e})
            assert extract_neighbor_relations(kg, e) == scan_rels
            picked = {r for r in scan_rels if rng.random() < 0.5}
            scan_triples = sorted(
                (t for t in kg.triples if t.head == e and t.relation in picked),
                key=lambda t: (t.relation, t.tail),
            )
            assert extract_triples(kg, e, picked) == scan_triples

    for _ in range(50):
        n_cols = rng.randint(1, 6)
        n_rows = rng.randint(0, 12)
        table = Table(
            columns=[f"c{i}" for i in range(n_cols)],
            rows=[
                [CellValue(f"v{i}_{j}") for i in range(n_cols)]
                for j in range(n_rows)
            ],
        )
        cols = sorted(rng.sample(range(n_cols), rng.randint(1, n_cols)))
        rows = sorted(rng.sample(range(n_rows), rng.randint(0, n_rows)))
        sub = extract_subtable(table, cols, rows)
        for out_j, src_j in enumerate(sub.origin_rows):
            for out_i, src_i in enumerate(sub.origin_columns):
                assert sub.rows[out_j][out_i].raw == table.rows[src_j][src_i].raw
    _ok("interface brute-force equivalence (50 random KGs + 50 random tables)")


def test_replay_determinism(tmp_path):
    from structreason.backends import ScriptedBackend
    from structreason.traces import script_from_traces

    dataset = load_dataset(FIXTURES / "kgqa" / "questions.jsonl")
    first = tmp_path / "first"
    run_eval(dataset, oracle_backend_factory, artifacts_dir=FIXTURES / "kgqa", out_dir=first)

    traces = [load_trace(p) for p in sorted((first / "traces").glob("*.json"))]
    scripted = ScriptedBackend.from_steps(script_from_traces(traces))

    outputs = []
    for run_dir in (tmp_path / "second", tmp_path / "third"):
        run_eval(dataset, scripted, artifacts_dir=FIXTURES / "kgqa", out_dir=run_dir)
        outputs.append(run_dir)

    a, b = outputs
    for path in sorted((a / "traces").glob("*.json")):
        assert path.read_bytes() == (b / "traces" / path.name).read_bytes()
        validate_trace(load_trace(path))
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    assert (a / "report.tsv").read_bytes() == (b / "report.tsv").read_bytes()

    # replaying each recorded trace reproduces it byte for byte
    for path in sorted((first / "traces").glob("*.json")):
        original = load_trace(path)
        assert trace_to_json(replay_trace(original)) == trace_to_json(original)
    _ok("replay determinism (byte-identical traces + report, self-validating)")


def test_call_count_bounds(tmp_path):
    max_hops = 3
    kgqa = load_dataset(FIXTURES / "kgqa" / "questions.jsonl")
    run_eval(kgqa, oracle_backend_factory, artifacts_dir=FIXTURES / "kgqa",
             out_dir=tmp_path / "kgqa")
    for path in (tmp_path / "kgqa" / "traces").glob("*.json"):
        assert load_trace(path).llm_call_count <= 3 * max_hops

    tableqa = load_dataset(FIXTURES / "tableqa" / "questions.jsonl")
    run_eval(tableqa, oracle_backend_factory, artifacts_dir=FIXTURES / "tableqa",
             out_dir=tmp_path / "tableqa")
    for path in (tmp_path / "tableqa" / "traces").glob("*.json"):
        assert load_trace(path).llm_call_count == 3

    text2sql = load_dataset(FIXTURES / "text2sql" / "questions.jsonl")
    run_eval(text2sql, oracle_backend_factory, artifacts_dir=FIXTURES / "text2sql",
             out_dir=tmp_path / "sql")
    for path in (tmp_path / "sql" / "traces").glob("*.json"):
        assert load_trace(path).llm_call_count == 2
    _ok("call-count bounds (kgqa <= 3*max_hops, tableqa == 3, text2sql == 2)")


def _timed_lookups(kg: KnowledgeGraph, heads: list[str], calls: int) -> float:
    samples = []
    rng = random.Random(5)
    picks = [rng.choice(heads) for _ in range(calls)]
    for e in picks:
        rels = kg.head_index[e]
        start = time.perf_counter()
        out = extract_triples(kg, e, rels)
        samples.append(time.perf_counter() - start)
        assert len(out) == 10
    return statistics.median(samples)


def _fixed_degree_kg(n_heads: int) -> tuple[KnowledgeGraph, list[str]]:
    # every head has exactly 10 outgoing triples: 2 relations x 5 tails
    triples = []
    heads = []
    for i in range(n_heads):
        head = f"h{i}"
        heads.append(head)
        for r in range(2):
            for t in range(5):
                triples.append(Triple(head, f"rel{r}", f"t{i}_{r}_{t}"))
    return KnowledgeGraph.from_triples(triples), heads


def test_scale_lookup_independent_of_graph_size():
    small_kg, small_heads = _fixed_degree_kg(25_000)   # 250k triples
    large_kg, large_heads = _fixed_degree_kg(100_000)  # 1M triples
    assert len(large_kg.triples) == 1_000_000

    median_small = _timed_lookups(small_kg, small_heads, 300)
    median_large = _timed_lookups(large_kg, large_heads, 300)

    assert median_large < 0.001, f"median {median_large * 1e6:.0f}us exceeds 1ms"
    assert median_small < 0.001
    # index path: latency must not track graph size (generous noise margin)
    assert median_large < 50 * max(median_small, 1e-6)
    _ok(
        "scale check (1M triples: median "
        f"{median_large * 1e6:.1f}us vs 250k: {median_small * 1e6:.1f}us)"
    )
