"""Structured-data question answering with pluggable model backends.

Read interfaces over knowledge graphs, tables, and relational databases;
deterministic linearization into prompt text; per-task iterative pipelines
that alternate data reads with model-driven selection and generation; and
an evaluation harness with trace recording and deterministic replay.
"""

from .backends import (
    Backend,
    GenerationRequest,
    GoldOracleBackend,
    RemoteChatBackend,
    ScriptedBackend,
)
from .database import (
    Database,
    ForeignKey,
    SchemaSummary,
    TableSchema,
    extract_table_and_column_names,
    extract_tables_information,
    load_database,
    load_database_dir,
)
from .errors import (
    ConfigError,
    DataError,
    LoadError,
    OracleMissError,
    ScriptMissError,
    SqlAnalysisError,
    SqlError,
    SqlExtractionError,
    SqlSyntaxError,
    StructReasonError,
    TemplateError,
    TransportError,
    UnsupportedSqlError,
)
from .evaluation import (
    ArtifactStore,
    EvalReport,
    ExampleResult,
    QaExample,
    denotation_accuracy,
    execution_accuracy,
    hits_at_1,
    load_dataset,
    normalize_answer,
    oracle_backend_factory,
    replay_trace,
    run_eval,
)
from .kg import (
    KnowledgeGraph,
    Triple,
    extract_neighbor_relations,
    extract_triples,
    load_kg,
)
from .linearize import (
    linearize_name_list,
    linearize_relations,
    linearize_rows,
    linearize_schema,
    linearize_triples,
    truncate_for_budget,
)
from .orchestrator import (
    KgqaConfig,
    SqlGenConfig,
    TableQaConfig,
    answer_kgqa,
    answer_tableqa,
    generate_sql,
)
from .prompts import (
    PromptKind,
    PromptTemplate,
    Task,
    TemplateRegistry,
    render_generation,
    render_selection,
)
from .responses import (
    Sufficiency,
    parse_answer,
    parse_selection,
    parse_sufficiency,
)
from .tables import (
    CellValue,
    SubTable,
    Table,
    extract_column_names,
    extract_columns,
    extract_subtable,
    load_table,
    load_table_csv,
    parse_numeric,
    resolve_column_indices,
)
from .traces import (
    ReasoningTrace,
    TraceStep,
    load_trace,
    save_trace,
    trace_to_json,
    validate_trace,
)

__version__ = "0.1.0"
