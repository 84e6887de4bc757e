"""Small instances shipped with the package, each with a certified mu vector."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .encodings import cnf_to_instance, hypergraph_to_instance, parse_dimacs, parse_hypergraph
from .model import Event, Instance, Pattern, VarSpec


@dataclass(frozen=True)
class BundledInstance:
    name: str
    instance: Instance
    mu: tuple
    description: str


def _text(name: str) -> str:
    return resources.files("mtlll").joinpath("data").joinpath(name).read_text()


def random_3sat() -> BundledInstance:
    """50-variable random 3-CNF, each variable in at most two clauses.

    Every clause has at most 3 neighbors, and mu = 0.4 satisfies the cluster
    condition while no uniform x satisfies the classical one.
    """
    inst = cnf_to_instance(parse_dimacs(_text("random_3sat_50.cnf")))
    return BundledInstance("random-3sat-50", inst, (0.4,) * inst.n_events, "random 3-CNF, 50 vars, 30 clauses")


def hypergraph_coloring() -> BundledInstance:
    """2-coloring of a 60-vertex 3-uniform hypergraph with vertex degree at most 2."""
    inst = hypergraph_to_instance(parse_hypergraph(_text("hypergraph_60.txt")), 2)
    return BundledInstance("hypergraph-60", inst, (1.0,) * inst.n_events, "3-uniform hypergraph 2-coloring, 60 vertices")


def five_cycle() -> BundledInstance:
    """Five events on a cycle of biased bits: event i is ``x_i = x_{i+1} = 1`` with P(x = 1) = 0.4.

    Each p(A) = 0.16. With mu = 1 the cluster bound is 1/5, while the
    classical bound x(1 - x)^2 never exceeds 4/27 < 0.16.
    """
    variables = [VarSpec(i, (0.6, 0.4)) for i in range(5)]
    events = [Event(i, (i, (i + 1) % 5), Pattern((1, 1))) for i in range(5)]
    return BundledInstance("five-cycle", Instance(variables, events), (1.0,) * 5, "hand-built 5-event cycle")


def clause_chain() -> Instance:
    """(x1 or x2), (x2 or x3), (x3 or x4) over four fair bits."""
    variables = [VarSpec.uniform(i, 2) for i in range(4)]
    events = [Event(i, (i, i + 1), Pattern((0, 0))) for i in range(3)]
    return Instance(variables, events)


def fair_coin() -> BundledInstance:
    """One event ``x = 0`` on a fair coin; N_A is geometric with mean exactly 1."""
    inst = Instance([VarSpec.uniform(0, 2)], [Event(0, (0,), Pattern((0,)))])
    return BundledInstance("fair-coin", inst, (1.0,), "single fair-coin event")


def all_bundled() -> list:
    return [random_3sat(), hypergraph_coloring(), five_cycle()]
