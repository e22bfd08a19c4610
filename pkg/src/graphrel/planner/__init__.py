from .physical import Plan, Planner, PlannerOptions, explain, plan
from .rules import (
    LengthInterval, PredicateClass, TraversalKind, classify_predicates, infer_path_length,
    select_traversal,
)

__all__ = [
    "LengthInterval", "Plan", "Planner", "PlannerOptions", "PredicateClass", "TraversalKind",
    "classify_predicates", "explain", "infer_path_length", "plan", "select_traversal",
]
