from __future__ import annotations

from structreason import (
    GoldOracleBackend,
    KgqaConfig,
    ScriptedBackend,
    SqlGenConfig,
    TableQaConfig,
    TransportError,
    answer_kgqa,
    answer_tableqa,
    generate_sql,
    validate_trace,
)
from structreason.evaluation import load_dataset, oracle_backend_factory
from structreason.sql import execute, parse_sql
from structreason.traces import (
    OUTCOME_ANSWERS,
    OUTCOME_FAILURE,
    OUTCOME_SQL,
    load_trace,
    save_trace,
    script_from_traces,
    trace_to_json,
)

from .conftest import FIXTURES


class SequenceBackend:
    """Test double that answers from a fixed queue."""

    deterministic = True
    name = "sequence"

    def __init__(self, responses):
        self._queue = list(responses)

    def complete(self, request):
        assert self._queue, f"unexpected call at stage {request.stage_tag}"
        return self._queue.pop(0)


class ConstantBackend:
    deterministic = True
    name = "constant"

    def __init__(self, text):
        self._text = text

    def complete(self, request):
        return self._text


class FailingBackend:
    deterministic = True
    name = "failing"

    def complete(self, request):
        raise TransportError("connection refused", attempts=4)


def kgqa_examples():
    return {e.id: e for e in load_dataset(FIXTURES / "kgqa" / "questions.jsonl")}


# KGQA


def test_harper_lee_flow_one_hop_three_prompts(harper_kg):
    example = kgqa_examples()["k00-harper-lee"]
    backend = oracle_backend_factory(example)
    answers, trace = answer_kgqa(
        harper_kg, example.question, "Harper Lee", backend, KgqaConfig(max_hops=1)
    )
    assert answers == ["Monroe County High School"]
    assert trace.llm_call_count == 3
    stages = [s.stage for s in trace.steps if s.is_llm_call]
    assert stages == ["relation-select", "triple-select", "answer-generate"]
    validate_trace(trace)


def test_two_hop_traversal_advances_frontier(movies_kg):
    example = kgqa_examples()["k09"]
    answers, trace = answer_kgqa(
        movies_kg, example.question, example.topic_entity,
        oracle_backend_factory(example), KgqaConfig(),
    )
    assert set(answers) == set(example.gold_answers)
    stages = [s.stage for s in trace.steps if s.is_llm_call]
    assert stages == [
        "relation-select", "triple-select", "sufficiency",
        "relation-select", "triple-select", "sufficiency", "answer-generate",
    ]
    sufficiency_decisions = [
        s.parsed_decision for s in trace.steps if s.stage == "sufficiency"
    ]
    assert sufficiency_decisions == ["insufficient", "sufficient"]
    # the hop-2 selection really came from the graph, not the fallback
    hop2_triples = trace.steps[4]
    assert "(Lena Hart, directed, Night Cartographer)" in hop2_triples.linearized_evidence
    assert "fallback" not in hop2_triples.parsed_decision


def test_three_hop_stops_at_hop_limit(movies_kg):
    example = kgqa_examples()["k16"]
    answers, trace = answer_kgqa(
        movies_kg, example.question, example.topic_entity,
        oracle_backend_factory(example), KgqaConfig(max_hops=3),
    )
    assert set(answers) == set(example.gold_answers)
    # hop 3 is the limit: no sufficiency call there, generation forced
    assert trace.llm_call_count == 9
    assert [s.stage for s in trace.steps if s.stage == "sufficiency"] == [
        "sufficiency", "sufficiency"
    ]


def test_tails_mode_answers_come_from_graph(movies_kg, harper_kg):
    # with answers_from_tails the answers are read off the selected triples,
    # so a broken frontier or selection cannot be papered over by the oracle
    for example in kgqa_examples().values():
        kg = harper_kg if example.id.startswith("k00") else movies_kg
        cfg = KgqaConfig(answers_from_tails=True)
        answers, trace = answer_kgqa(
            kg, example.question, example.topic_entity,
            oracle_backend_factory(example), cfg,
        )
        assert answers == sorted(example.gold_answers), example.id
        assert trace.outcome_kind == OUTCOME_ANSWERS


def test_topic_not_found(movies_kg):
    answers, trace = answer_kgqa(
        movies_kg, "who?", "No Such Entity", ConstantBackend("x"), KgqaConfig()
    )
    assert answers == []
    assert trace.outcome_kind == OUTCOME_FAILURE
    assert trace.outcome == "topic-not-found"
    assert trace.steps == []


def test_degenerate_backend_falls_back_once_then_generates(movies_kg):
    backend = ConstantBackend("none of these")
    answers, trace = answer_kgqa(
        movies_kg, "who directed Silver Harbor?", "Silver Harbor", backend, KgqaConfig()
    )
    # empty selections: relations fall back to all, then generation happens
    assert trace.llm_call_count == 3
    assert "fallback" in trace.steps[0].parsed_decision
    assert "fallback" in trace.steps[1].parsed_decision
    assert trace.outcome_kind == OUTCOME_ANSWERS  # "none of these" parses as text
    assert answers == ["none of these"]


def test_empty_generation_is_failure(movies_kg):
    backend = SequenceBackend(["directed_by", "(Silver Harbor, directed_by, Lena Hart)", "yes", "\n"])
    answers, trace = answer_kgqa(
        movies_kg, "who directed Silver Harbor?", "Silver Harbor", backend, KgqaConfig()
    )
    assert answers == []
    assert trace.outcome_kind == OUTCOME_FAILURE
    assert trace.outcome == "no-answers-generated"


def test_transport_failure_recorded(movies_kg):
    answers, trace = answer_kgqa(
        movies_kg, "q?", "Silver Harbor", FailingBackend(), KgqaConfig()
    )
    assert answers == []
    assert trace.outcome_kind == OUTCOME_FAILURE
    assert trace.outcome.startswith("transport-failure")


def test_kgqa_call_bound_holds_across_fixture(movies_kg, harper_kg):
    for example in kgqa_examples().values():
        kg = harper_kg if example.id.startswith("k00") else movies_kg
        cfg = KgqaConfig()
        _, trace = answer_kgqa(
            kg, example.question, example.topic_entity,
            oracle_backend_factory(example), cfg,
        )
        assert trace.llm_call_count <= 3 * cfg.max_hops
        validate_trace(trace)


def test_candidate_chunking_merges_with_final_call(movies_kg):
    # relation-select sees 5 relations; with a chunk size of 2 that is
    # 3 chunk calls plus 1 merge call over the chunk winners
    backend = SequenceBackend(
        ["directed_by", "none", "none", "directed_by",
         "(Silver Harbor, directed_by, Lena Hart)", "yes", "Lena Hart"]
    )
    cfg = KgqaConfig(max_candidates_per_prompt=2)
    answers, trace = answer_kgqa(
        movies_kg, "who directed Silver Harbor?", "Silver Harbor", backend, cfg
    )
    assert answers == ["Lena Hart"]
    relation_steps = [s for s in trace.steps if s.stage == "relation-select"]
    assert len(relation_steps) == 4
    assert relation_steps[-1].parsed_decision == '["directed_by"]'
    assert [s.stage_tag for s in relation_steps] == [
        "relation-select#1", "relation-select#2", "relation-select#3", "relation-select#4",
    ]


# TableQA


def test_district_flow(districts_table):
    examples = {e.id: e for e in load_dataset(FIXTURES / "tableqa" / "questions.jsonl")}
    example = examples["t02"]
    answers, trace = answer_tableqa(
        districts_table, example.question, oracle_backend_factory(example), TableQaConfig()
    )
    assert answers == ["19th"]
    assert trace.llm_call_count == 3
    assert len(trace.steps) == 4
    stages = [s.stage for s in trace.steps]
    assert stages == ["column-select", "row-select", "extract-subtable", "answer-generate"]
    assert "row 8: (District, 19th), (Incumbent, Rosa Delgado)" in trace.steps[3].linearized_evidence
    validate_trace(trace)


def test_tableqa_exactly_three_calls_even_with_fallbacks(districts_table):
    answers, trace = answer_tableqa(
        districts_table, "nothing matches?", ConstantBackend("hmm"), TableQaConfig()
    )
    assert trace.llm_call_count == 3
    assert "fallback" in trace.steps[0].parsed_decision
    assert "fallback" in trace.steps[1].parsed_decision


def test_one_by_one_table():
    from structreason.tables import CellValue, Table

    t = Table(columns=["only"], rows=[[CellValue("42")]])
    backend = SequenceBackend(["only", "item 1", "42"])
    answers, trace = answer_tableqa(t, "what is it?", backend, TableQaConfig())
    assert answers == ["42"]
    assert "row 1: (only, 42)" in trace.steps[3].linearized_evidence


def test_statement_verification_uses_fact_verify_stage():
    examples = {e.id: e for e in load_dataset(FIXTURES / "tableqa" / "statements.jsonl")}
    example = examples["s02"]
    from structreason import load_table

    with open(FIXTURES / "tableqa" / example.data_ref, "rb") as fh:
        table = load_table(fh)
    answers, trace = answer_tableqa(
        table, example.question, oracle_backend_factory(example), TableQaConfig(),
        statement=True,
    )
    assert answers == ["refuted"]
    assert trace.steps[-1].stage == "fact-verify"
    validate_trace(trace)


def test_row_selection_keeps_origin_numbering(districts_table):
    backend = SequenceBackend(["District", "item 8", "19th"])
    answers, trace = answer_tableqa(
        districts_table, "which district?", backend, TableQaConfig()
    )
    subtable_step = trace.steps[2]
    assert subtable_step.linearized_evidence.startswith("row 8: ")


def test_chunked_row_selection_keeps_global_numbers(districts_table):
    # 10 rows with a chunk size of 4: three chunk calls plus one merge call,
    # each chunk showing its rows under their original numbers; the 5-column
    # selection stage chunks as well (2 chunks + merge)
    backend = SequenceBackend(
        [
            "District, Incumbent", "none", "District, Incumbent",
            "none", "item 8", "none", "item 8",
            "19th",
        ]
    )
    cfg = TableQaConfig(max_candidates_per_prompt=4)
    answers, trace = answer_tableqa(districts_table, "which district?", backend, cfg)
    assert answers == ["19th"]
    row_steps = [s for s in trace.steps if s.stage == "row-select"]
    assert len(row_steps) == 4
    assert row_steps[0].linearized_evidence.startswith("row 1: ")
    assert row_steps[1].linearized_evidence.startswith("row 5: ")
    assert row_steps[2].linearized_evidence.startswith("row 9: ")
    assert row_steps[3].linearized_evidence.startswith("row 8: ")


# Text-to-SQL


def test_dogs_breeds_sql_flow(dogs_breeds_db):
    examples = {e.id: e for e in load_dataset(FIXTURES / "text2sql" / "questions.jsonl")}
    example = examples["d03"]
    predicted, trace = generate_sql(
        dogs_breeds_db, example.question, oracle_backend_factory(example), SqlGenConfig()
    )
    assert predicted == example.gold_sql
    assert trace.llm_call_count == 2
    assert trace.outcome_kind == OUTCOME_SQL
    result = execute(dogs_breeds_db, parse_sql(predicted))
    assert result.rows == [("Labrador", 3), ("Pug", 1)]
    # the generation stage saw the foreign key
    assert "foreign keys: [Dogs.breed_code = Breeds.breed_code]" in trace.steps[1].linearized_evidence
    validate_trace(trace)


def test_single_table_db_still_selects():
    import io
    import json
    from structreason import load_database

    doc = {"tables": [{"name": "only", "columns": ["a"], "rows": [["1"]]}]}
    db = load_database(io.BytesIO(json.dumps(doc).encode()))
    backend = SequenceBackend(["only", "SELECT a FROM only"])
    predicted, trace = generate_sql(db, "what?", backend, SqlGenConfig())
    assert predicted == "SELECT a FROM only"
    assert [s.stage for s in trace.steps] == ["table-select", "sql-generate"]


def test_fenced_sql_extracted_verbatim(dogs_breeds_db):
    backend = SequenceBackend(["Dogs", "```sql\nSELECT name FROM Dogs\n```"])
    predicted, trace = generate_sql(dogs_breeds_db, "names?", backend, SqlGenConfig())
    assert predicted == "SELECT name FROM Dogs"
    assert trace.steps[1].parsed_decision == "SELECT name FROM Dogs"


def test_sql_extraction_failure_outcome(dogs_breeds_db):
    backend = SequenceBackend(["Dogs", "I cannot answer that"])
    predicted, trace = generate_sql(dogs_breeds_db, "names?", backend, SqlGenConfig())
    assert predicted == ""
    assert trace.outcome_kind == OUTCOME_FAILURE
    assert trace.outcome.startswith("extraction-error")


def test_table_fallback_selects_all(dogs_breeds_db):
    backend = SequenceBackend(["no idea", "SELECT name FROM Dogs"])
    predicted, trace = generate_sql(dogs_breeds_db, "names?", backend, SqlGenConfig())
    assert "fallback: all 2 candidates" in trace.steps[0].parsed_decision
    assert predicted == "SELECT name FROM Dogs"


# trace persistence and replay


def test_trace_save_load_round_trip(tmp_path, movies_kg):
    example = kgqa_examples()["k09"]
    _, trace = answer_kgqa(
        movies_kg, example.question, example.topic_entity,
        oracle_backend_factory(example), KgqaConfig(),
    )
    path = tmp_path / "trace.json"
    save_trace(trace, path)
    loaded = load_trace(path)
    assert trace_to_json(loaded) == trace_to_json(trace)
    validate_trace(loaded)


def test_scripted_replay_is_byte_identical(movies_kg):
    example = kgqa_examples()["k16"]
    _, original = answer_kgqa(
        movies_kg, example.question, example.topic_entity,
        oracle_backend_factory(example), KgqaConfig(),
    )
    scripted = ScriptedBackend.from_steps(script_from_traces([original]))
    _, rerun = answer_kgqa(
        movies_kg, example.question, example.topic_entity, scripted, KgqaConfig()
    )
    assert trace_to_json(rerun) == trace_to_json(original)


def test_truncation_flagged_in_trace(movies_kg):
    cfg = KgqaConfig(max_evidence_chars=10)
    example = kgqa_examples()["k01"]
    _, trace = answer_kgqa(
        movies_kg, example.question, example.topic_entity,
        GoldOracleBackend.from_gold(example.gold_intermediates,
                                    gold_answers=example.gold_answers),
        cfg,
    )
    assert any(s.truncated for s in trace.steps)
    assert all(len(s.linearized_evidence) <= 10 for s in trace.steps if s.is_llm_call)
