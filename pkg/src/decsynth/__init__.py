"""Supervisor synthesis for product systems with state-event invariant requirements.

Structural checks decide when plant || requirements is already a valid
supervisor; otherwise the dependency graph narrows synthesis down to the
plants that take part in cycles.
"""

from .automata import (Automaton, Event, accessible, compose, compose_all, explore, is_controllable,
                       is_nonblocking, is_strongly_connected, is_trim, language_equal, run, step)
from .depgraph import DependencyGraph, analyze, build_graph, emit_dot, simplify_partial_problem
from .errors import (AutomatonError, DecSynthError, EmptySupervisor, ModelError, NotApplicable,
                     SizeBoundExceeded)
from .modelio import Diagnostic, ParseResult, load_model, parse_model, pretty_print
from .oracle import verify_closed_loop
from .problem import ControlProblem, PropertyReport, check_cnms, check_rcnms
from .report import emit_report
from .requirements import Condition, Literal, StateEventInvariant, compose_plant_with_requirements
from .synthesis import (ReductionPlan, SynthesisResult, Verdict, execute_plan, plan_reduction, sup_cn,
                        sup_cn_modular)

__all__ = [
    "Automaton", "Event", "accessible", "compose", "compose_all", "explore", "is_controllable",
    "is_nonblocking", "is_strongly_connected", "is_trim", "language_equal", "run", "step",
    "DependencyGraph", "analyze", "build_graph", "emit_dot", "simplify_partial_problem",
    "AutomatonError", "DecSynthError", "EmptySupervisor", "ModelError", "NotApplicable",
    "SizeBoundExceeded", "Diagnostic", "ParseResult", "load_model", "parse_model", "pretty_print",
    "verify_closed_loop", "ControlProblem", "PropertyReport", "check_cnms", "check_rcnms",
    "emit_report", "Condition", "Literal", "StateEventInvariant", "compose_plant_with_requirements",
    "ReductionPlan", "SynthesisResult", "Verdict", "execute_plan", "plan_reduction", "sup_cn",
    "sup_cn_modular",
]
