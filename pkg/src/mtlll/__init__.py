"""Moser-Tardos resampling certified by the cluster-expansion local lemma condition."""

from .conditions import (
    ConditionReport,
    check_classical_condition,
    check_cluster_condition,
    independence_polynomial_sum,
    mu_from_x,
    uniform_mu_search,
    x_from_mu,
)
from .engine import ExecutionLog, SelectionPolicy, find_violated, run
from .errors import CapExceededError, InputError, LLLError, ParseError
from .model import (
    DependencyGraph,
    Event,
    Instance,
    VarSpec,
    build_dependency_graph,
    event_probability,
    is_violated,
)
from .witness import WitnessTree, build_witness_tree, is_proper, is_strongly_proper

__version__ = "0.1.0"

__all__ = [
    "CapExceededError",
    "ConditionReport",
    "DependencyGraph",
    "Event",
    "ExecutionLog",
    "InputError",
    "Instance",
    "LLLError",
    "ParseError",
    "SelectionPolicy",
    "VarSpec",
    "WitnessTree",
    "build_dependency_graph",
    "build_witness_tree",
    "check_classical_condition",
    "check_cluster_condition",
    "event_probability",
    "find_violated",
    "independence_polynomial_sum",
    "is_proper",
    "is_strongly_proper",
    "is_violated",
    "mu_from_x",
    "run",
    "uniform_mu_search",
    "x_from_mu",
]
