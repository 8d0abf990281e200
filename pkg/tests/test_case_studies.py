"""End-to-end golden flows for the three demo scenarios, driven by scripted
responses. Every prompt is pinned byte-exactly to a committed golden file;
a second run keyed on the golden bytes proves the pipeline still renders
exactly those prompts."""

from __future__ import annotations

from structreason import (
    KgqaConfig,
    ScriptedBackend,
    SqlGenConfig,
    TableQaConfig,
    answer_kgqa,
    answer_tableqa,
    execution_accuracy,
    generate_sql,
    hits_at_1,
    denotation_accuracy,
)
from structreason.backends import script_key
from structreason.sql import execute, parse_sql
from structreason.traces import validate_trace

from .conftest import GOLDEN, check_golden


class SequenceBackend:
    deterministic = True
    name = "sequence"

    def __init__(self, responses):
        self._queue = list(responses)

    def complete(self, request):
        return self._queue.pop(0)


def pin_prompts(trace, golden_dir, responses):
    """Pin each prompt to a golden file and return a script keyed on the
    committed bytes (so drift from the goldens breaks the scripted rerun)."""
    llm_steps = [s for s in trace.steps if s.is_llm_call]
    assert len(llm_steps) == len(responses)
    script = {}
    for step, response in zip(llm_steps, responses):
        path = golden_dir / f"prompt_{step.step_index}_{step.stage}.txt"
        check_golden(path, step.prompt)
        script[script_key(step.stage_tag, path.read_text(encoding="utf-8"))] = response
    return ScriptedBackend(script)


KG_RESPONSES = [
    "education",
    "(Harper Lee, education, Monroe County High School)",
    "Monroe County High School",
]


def test_kg_case_study(harper_kg):
    question = "where did Harper Lee study?"
    cfg = KgqaConfig(max_hops=1)
    answers, trace = answer_kgqa(
        harper_kg, question, "Harper Lee", SequenceBackend(KG_RESPONSES), cfg
    )
    assert answers == ["Monroe County High School"]
    assert hits_at_1(answers, {"Monroe County High School"}) == 1
    assert trace.llm_call_count == 3
    validate_trace(trace)

    prompts = [s.prompt for s in trace.steps if s.is_llm_call]
    assert "[birthplace, education, residence]" in prompts[0]
    assert "provide only one relevant relation that's present in the candidate" in prompts[0]
    assert "you just need to provide only one answer entity" in prompts[2]

    scripted = pin_prompts(trace, GOLDEN / "case_kgqa", KG_RESPONSES)
    again, trace2 = answer_kgqa(harper_kg, question, "Harper Lee", scripted, cfg)
    assert again == answers
    assert [s.prompt for s in trace2.steps] == [s.prompt for s in trace.steps]


TABLE_RESPONSES = ["District, Incumbent", "item 8", "19th"]


def test_table_case_study(districts_table):
    question = "what district does Rosa Delgado represent?"
    answers, trace = answer_tableqa(
        districts_table, question, SequenceBackend(TABLE_RESPONSES), TableQaConfig()
    )
    assert answers == ["19th"]
    assert denotation_accuracy(answers, {"19th"}) == 1
    assert trace.llm_call_count == 3
    validate_trace(trace)

    generation = trace.steps[-1]
    assert generation.linearized_evidence == "row 8: (District, 19th), (Incumbent, Rosa Delgado)"

    scripted = pin_prompts(trace, GOLDEN / "case_tableqa", TABLE_RESPONSES)
    again, _ = answer_tableqa(districts_table, question, scripted, TableQaConfig())
    assert again == answers


SQL_RESPONSES = [
    "Dogs, Breeds",
    "```sql\nSELECT B.breed_name, COUNT(*) AS n FROM Dogs AS D "
    "JOIN Breeds AS B ON D.breed_code = B.breed_code GROUP BY B.breed_name\n```",
]
GOLD_JOIN_SQL = (
    "SELECT B.breed_name, COUNT(*) AS n FROM Dogs AS D "
    "JOIN Breeds AS B ON D.breed_code = B.breed_code GROUP BY B.breed_name"
)


def test_db_case_study(dogs_breeds_db):
    question = "How many dogs are there of each breed?"
    predicted, trace = generate_sql(
        dogs_breeds_db, question, SequenceBackend(SQL_RESPONSES), SqlGenConfig()
    )
    assert predicted == GOLD_JOIN_SQL
    assert trace.llm_call_count == 2
    validate_trace(trace)

    prompts = [s.prompt for s in trace.steps if s.is_llm_call]
    assert "do you need to complete the SQLite SQL query" in prompts[0]
    assert "complete sqlite SQL query only with no explanation" in prompts[1]

    result = execute(dogs_breeds_db, parse_sql(predicted))
    rendered = "\n".join("\t".join(str(v) for v in row) for row in result.rows) + "\n"
    check_golden(GOLDEN / "case_text2sql" / "expected_result.tsv", rendered)
    assert execution_accuracy(dogs_breeds_db, predicted, GOLD_JOIN_SQL) == 1

    scripted = pin_prompts(trace, GOLDEN / "case_text2sql", SQL_RESPONSES)
    again, _ = generate_sql(dogs_breeds_db, question, scripted, SqlGenConfig())
    assert again == predicted
