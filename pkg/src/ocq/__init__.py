"""In-memory query and constraint engine for object-centric event data."""

from .errors import (
    DanglingRef,
    EventWithoutObjects,
    InvalidQuery,
    OcqError,
    ParseError,
    ResultTooLarge,
    TooLargeForOracle,
    UnknownNode,
    UnknownRef,
)
from .oced import ABSENT, WILDCARD, Event, Object, Oced, Timestamp, attribute_at, objects_of, time_of, type_of
from .ocel_json import export_ocel2_json, import_ocel2_json, validate
from .synthetic import LoanConfig, SyntheticConfig, generate_loan_log, generate_synthetic
from .index import IndexedLog, Interner, Relation, build_index, related
from .model import (
    BindingBox,
    Binding,
    CBS,
    E2O,
    Edge,
    KIND_EVENT,
    KIND_OBJECT,
    LabelSpec,
    O2O,
    QueryTree,
    TBE,
    VarDecl,
    is_child,
    is_refinement,
    parse_duration,
    parse_query_json,
    satisfies_basic,
    serialize_query,
    validate_tree,
)
from .plan import BindFromRelation, BindFromType, Filter, plan
from .engine import EvaluationResult, NodeResult, evaluate_node, evaluate_tree, expand
from .oracle import brute_force_evaluate, results_match
from .export import export_csv, summarize

__version__ = "0.1.0"

__all__ = [
    "ABSENT",
    "WILDCARD",
    "BindFromRelation",
    "BindFromType",
    "Binding",
    "BindingBox",
    "CBS",
    "DanglingRef",
    "E2O",
    "Edge",
    "EvaluationResult",
    "Event",
    "EventWithoutObjects",
    "IndexedLog",
    "Interner",
    "InvalidQuery",
    "KIND_EVENT",
    "KIND_OBJECT",
    "LabelSpec",
    "LoanConfig",
    "NodeResult",
    "O2O",
    "Object",
    "Oced",
    "OcqError",
    "ParseError",
    "QueryTree",
    "Relation",
    "ResultTooLarge",
    "SyntheticConfig",
    "TBE",
    "Timestamp",
    "TooLargeForOracle",
    "UnknownNode",
    "UnknownRef",
    "VarDecl",
    "attribute_at",
    "brute_force_evaluate",
    "build_index",
    "evaluate_node",
    "evaluate_tree",
    "expand",
    "export_csv",
    "export_ocel2_json",
    "Filter",
    "generate_loan_log",
    "generate_synthetic",
    "import_ocel2_json",
    "is_child",
    "is_refinement",
    "objects_of",
    "parse_duration",
    "parse_query_json",
    "plan",
    "related",
    "results_match",
    "satisfies_basic",
    "serialize_query",
    "summarize",
    "time_of",
    "type_of",
    "validate",
    "validate_tree",
]
