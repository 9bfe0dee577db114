"""Parse, validate, simulate and render Thinging-Machine models."""

from .dsl import ModelDocument, ParseFailed, parse, parse_file, print_model, tokenize
from .dynamics import BehaviorGraph, EventDef, Region, build_behavior, compose, define_event, define_region
from .export import export_dot_behavior, export_dot_events, export_dot_static, export_trace
from .expr import Context, evaluate
from .legality import StageKind
from .model import Annotation, StaticModel, new_model
from .simulator import (
    GenericEventInstance,
    SimulationLimits,
    Trace,
    attribute,
    conformance,
    execute,
    execute_document,
    query_state,
)
from .things import Record, Symbol
from .translate import FsmSpec, fsm_to_tm, parse_fsm
from .validator import check_finiteness, validate_structure

__version__ = "0.1.0"

__all__ = [
    "Annotation", "BehaviorGraph", "Context", "EventDef", "FsmSpec", "GenericEventInstance",
    "ModelDocument", "ParseFailed", "Record", "Region", "SimulationLimits", "StageKind",
    "StaticModel", "Symbol", "Trace", "attribute", "build_behavior", "check_finiteness",
    "compose", "conformance", "define_event", "define_region", "evaluate", "execute",
    "execute_document", "export_dot_behavior", "export_dot_events", "export_dot_static",
    "export_trace", "fsm_to_tm", "new_model", "parse", "parse_file", "parse_fsm",
    "print_model", "query_state", "tokenize", "validate_structure",
]
