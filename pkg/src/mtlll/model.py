"""Variables, events, instances and the variable-sharing dependency graph."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import CapExceededError, InputError

#: Largest joint support (product of domain sizes) enumerated by ``event_probability``.
PROBABILITY_CAP = 1 << 24

Assignment = list  # variable id -> domain index, dense over the instance's variables


@dataclass(frozen=True)
class VarSpec:
    """A finite discrete random variable with explicit value probabilities."""

    id: int
    weights: tuple

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        object.__setattr__(self, "weights", w)
        if not w:
            raise InputError(f"variable {self.id}: empty domain")
        if any(v < 0 or not math.isfinite(v) for v in w):
            raise InputError(f"variable {self.id}: weights must be finite and nonnegative")
        total = math.fsum(w)
        if abs(total - 1.0) > 1e-12:
            raise InputError(f"variable {self.id}: weights sum to {total!r}, not 1")

    @property
    def domain_size(self) -> int:
        return len(self.weights)

    @classmethod
    def uniform(cls, id: int, domain_size: int = 2) -> "VarSpec":
        return cls(id, (1.0 / domain_size,) * domain_size)


# Structured predicates. They are plain callables on the tuple of values of
# ``vbl`` (in ``vbl`` order) and additionally know how to describe themselves,
# which is what lets the encodings serialize instances exactly.

@dataclass(frozen=True)
class Pattern:
    """Violated iff the values equal ``target`` position by position.

    A CNF clause is the pattern of its unique falsifying assignment.
    """

    target: tuple

    def __post_init__(self):
        object.__setattr__(self, "target", tuple(int(v) for v in self.target))

    def __call__(self, values) -> bool:
        return tuple(values) == self.target


@dataclass(frozen=True)
class Monochromatic:
    """Violated iff all values are equal (a monochromatic hyperedge)."""

    def __call__(self, values) -> bool:
        it = iter(values)
        first = next(it)
        return all(v == first for v in it)


@dataclass(frozen=True)
class Constant:
    """Always (``value=True``) or never violated."""

    value: bool = False

    def __call__(self, values) -> bool:
        return self.value


@dataclass(frozen=True)
class Event:
    """A bad event: a predicate over the values of the variables in ``vbl``."""

    id: int
    vbl: tuple
    predicate: Callable[[tuple], bool] = field(compare=False)

    def __post_init__(self):
        vbl = tuple(int(v) for v in self.vbl)
        object.__setattr__(self, "vbl", vbl)
        if not vbl:
            raise InputError(f"event {self.id}: empty variable support")
        if len(set(vbl)) != len(vbl):
            raise InputError(f"event {self.id}: duplicate variables in support {vbl}")

    def violated_by(self, assignment: Sequence[int]) -> bool:
        return bool(self.predicate(tuple(assignment[v] for v in self.vbl)))


class Instance:
    """Independent variables plus a family of events determined by them.

    Instances are immutable once built; derived indexes are cached.
    """

    def __init__(self, variables: Sequence[VarSpec], events: Sequence[Event]):
        self.variables = tuple(variables)
        self.events = tuple(events)
        for i, v in enumerate(self.variables):
            if v.id != i:
                raise InputError(f"variable ids must be 0..m-1 in order; got {v.id} at position {i}")
        for i, e in enumerate(self.events):
            if e.id != i:
                raise InputError(f"event ids must be 0..n-1 in order; got {e.id} at position {i}")
            for v in e.vbl:
                if not 0 <= v < len(self.variables):
                    raise InputError(f"event {e.id} references unknown variable {v}")

    def __repr__(self):
        return f"Instance({len(self.variables)} variables, {len(self.events)} events)"

    @property
    def n_events(self) -> int:
        return len(self.events)

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    def event(self, event_id: int) -> Event:
        if not isinstance(event_id, (int, np.integer)) or not 0 <= event_id < len(self.events):
            raise InputError(f"unknown event id {event_id!r}")
        return self.events[event_id]

    @cached_property
    def events_of_variable(self) -> tuple:
        """For each variable, the sorted ids of events whose support contains it."""
        occ = [[] for _ in self.variables]
        for e in self.events:
            for v in e.vbl:
                occ[v].append(e.id)
        return tuple(tuple(o) for o in occ)

    @cached_property
    def vbl_sets(self) -> tuple:
        return tuple(frozenset(e.vbl) for e in self.events)

    @cached_property
    def cumulative_weights(self) -> tuple:
        return tuple(tuple(itertools.accumulate(v.weights)) for v in self.variables)

    @cached_property
    def graph(self) -> "DependencyGraph":
        return build_dependency_graph(self)

    def check_assignment(self, assignment: Sequence[int]) -> None:
        if len(assignment) != len(self.variables):
            raise InputError(
                f"assignment has {len(assignment)} values for {len(self.variables)} variables"
            )
        for v, a in zip(self.variables, assignment):
            if not 0 <= a < v.domain_size:
                raise InputError(f"variable {v.id}: value {a} outside domain of size {v.domain_size}")


class DependencyGraph:
    """Undirected, irreflexive graph on event ids.

    ``neighbors(a)`` is the open neighborhood and ``inclusive(a)`` the closed one
    (the event itself plus its neighbors), both sorted.
    """

    def __init__(self, n: int, edges=()):
        self.n = int(n)
        adj = [set() for _ in range(self.n)]
        for a, b in edges:
            a, b = int(a), int(b)
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise InputError(f"edge ({a}, {b}) out of range for {self.n} vertices")
            if a == b:
                raise InputError(f"self-loop at {a}; the dependency graph is irreflexive")
            adj[a].add(b)
            adj[b].add(a)
        self._adj = tuple(tuple(sorted(s)) for s in adj)
        self._adj_sets = tuple(frozenset(s) for s in adj)
        self._incl = tuple(tuple(sorted(s | {i})) for i, s in enumerate(adj))

    def __repr__(self):
        return f"DependencyGraph(n={self.n}, edges={self.edges()})"

    def __eq__(self, other):
        return isinstance(other, DependencyGraph) and self._adj == other._adj

    def __hash__(self):
        return hash(self._adj)

    @property
    def adjacency(self) -> tuple:
        return self._adj

    def neighbors(self, a: int) -> tuple:
        return self._adj[a]

    def inclusive(self, a: int) -> tuple:
        return self._incl[a]

    def adjacent(self, a: int, b: int) -> bool:
        return b in self._adj_sets[a]

    def degree(self, a: int) -> int:
        return len(self._adj[a])

    def max_degree(self) -> int:
        return max((len(s) for s in self._adj), default=0)

    def edges(self) -> list:
        return [(a, b) for a in range(self.n) for b in self._adj[a] if a < b]

    def is_independent(self, vertices) -> bool:
        vs = list(vertices)
        for i, a in enumerate(vs):
            nb = self._adj_sets[a]
            for b in vs[i + 1:]:
                if b in nb or a == b:
                    return False
        return True

    def adjacency_matrix(self) -> np.ndarray:
        m = np.zeros((self.n, self.n), dtype=np.bool_)
        for a, b in self.edges():
            m[a, b] = m[b, a] = True
        return m


def build_dependency_graph(instance: Instance) -> DependencyGraph:
    """Edge between two distinct events exactly when their supports intersect."""
    edges = set()
    for ids in instance.events_of_variable:
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                edges.add((a, b))
    return DependencyGraph(instance.n_events, sorted(edges))


def is_violated(instance: Instance, assignment: Sequence[int], event_id: int) -> bool:
    return instance.event(event_id).violated_by(assignment)


def event_probability(instance: Instance, event_id: int, cap: int = PROBABILITY_CAP) -> float:
    """Exact probability of the event under the product measure, by enumeration of its support."""
    event = instance.event(event_id)
    specs = [instance.variables[v] for v in event.vbl]
    size = math.prod(s.domain_size for s in specs)
    if size > cap:
        raise CapExceededError(
            f"support too large for exact probability: event {event_id} has {size} joint values (cap {cap})"
        )
    pred = event.predicate
    if isinstance(pred, Constant):
        return 1.0 if pred.value else 0.0
    total = []
    for values in itertools.product(*(range(s.domain_size) for s in specs)):
        if pred(values):
            total.append(math.prod(s.weights[x] for s, x in zip(specs, values)))
    return math.fsum(total)


def event_probabilities(instance: Instance, cap: int = PROBABILITY_CAP) -> list:
    return [event_probability(instance, e.id, cap) for e in instance.events]


def sample_assignment(instance: Instance, rng) -> list:
    """Draw every variable independently from its weights."""
    return [rng.choice_cdf(cdf) for cdf in instance.cumulative_weights]
