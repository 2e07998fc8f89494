"""Polyvariant specialisation of constrained Horn clauses over linear real arithmetic."""
from .analysis import dimension_bound_setup, dimension_instrument, emit_dot, minimize_versions, pred_dep_graph
from .constraints import canonicalize, entails, entails_negation, equivalent, is_sat, project
from .derivation import BRANCH_RECURSIVE, ONE_STEP, UnfoldingRule, collect, partial_eval, unfold_step
from .parser import ParseError, parse_clause, parse_constrained_facts, parse_program, render
from .properties import PropertySet, alpha, dimension_ladder, guard_properties, rho
from .specializer import Specialization, check_closedness, fixpoint_facts, specialize
from .syntax import Atom, Clause, ConstrainedFact, Constraint, Program

__version__ = "0.1.0"

__all__ = [
    "Atom", "BRANCH_RECURSIVE", "Clause", "ConstrainedFact", "Constraint", "ONE_STEP", "ParseError",
    "Program", "PropertySet", "Specialization", "UnfoldingRule", "alpha", "canonicalize",
    "check_closedness", "collect", "dimension_bound_setup", "dimension_instrument", "dimension_ladder",
    "emit_dot", "entails", "entails_negation", "equivalent", "fixpoint_facts", "guard_properties",
    "is_sat", "minimize_versions", "parse_clause", "parse_constrained_facts", "parse_program",
    "partial_eval", "pred_dep_graph", "project", "render", "rho", "specialize", "unfold_step",
]
