"""Compiler toolkit for ensemble quantum programs."""

__version__ = "0.1.0"

from .circuit import FlatCircuit, GateEvent, MeasureEvent, ResetEvent
from .emit import EmitConfig, EnsembleStats, compute_stats, emit_jsonl, emit_qasm2
from .expander import ExpansionError, ExpansionPlan, PlanError, expand_iteration, expand_stream, plan
from .ir import Operation, Program, Region, ValueId, build_gate_def, build_generic, walk
from .rng import RngStream, derive_stream
from .simulator import equivalent_up_to_global_phase, run_analytic, run_sampled
from .syntax import SourceError, parse_module, print_module
from .verifier import Diagnostic, verify

__all__ = [
    "__version__",
    "FlatCircuit",
    "GateEvent",
    "MeasureEvent",
    "ResetEvent",
    "EmitConfig",
    "EnsembleStats",
    "compute_stats",
    "emit_jsonl",
    "emit_qasm2",
    "ExpansionError",
    "ExpansionPlan",
    "PlanError",
    "expand_iteration",
    "expand_stream",
    "plan",
    "Operation",
    "Program",
    "Region",
    "ValueId",
    "build_gate_def",
    "build_generic",
    "walk",
    "RngStream",
    "derive_stream",
    "equivalent_up_to_global_phase",
    "run_analytic",
    "run_sampled",
    "SourceError",
    "parse_module",
    "print_module",
    "Diagnostic",
    "verify",
]
