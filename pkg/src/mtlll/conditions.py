"""Sufficient conditions for the resampling algorithm to terminate.

Two conditions are checked per event ``A``:

* classical:  p(A) <= x_A * prod_{B ~ A} (1 - x_B)
* cluster:    p(A) <= mu_A / Z(closed neighborhood of A, mu)

where ``Z(S, mu)`` sums ``prod_{B in I} mu_B`` over the independent subsets
``I`` of ``S`` (the empty set contributes 1). Under ``mu = x / (1 - x)`` the
cluster bound is never smaller than the classical one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import CapExceededError, InputError
from .model import DependencyGraph, Instance, event_probabilities

#: Largest vertex set handed to ``independence_polynomial_sum``.
INDEPENDENCE_CAP = 25
#: Relative tolerance used when comparing a probability against its bound.
EPS = 1e-12

SCHEMA_VERSION = 1


def _check_mu(mu: Sequence[float], n: int) -> list:
    mu = [float(m) for m in mu]
    if len(mu) != n:
        raise InputError(f"expected {n} mu values, got {len(mu)}")
    for i, m in enumerate(mu):
        if not (0.0 < m < math.inf):
            raise InputError(f"mu[{i}] = {m!r} is not in (0, inf)")
    return mu


def _check_x(x: Sequence[float], n: int) -> list:
    x = [float(v) for v in x]
    if len(x) != n:
        raise InputError(f"expected {n} x values, got {len(x)}")
    for i, v in enumerate(x):
        if not (0.0 < v < 1.0):
            raise InputError(f"x[{i}] = {v!r} is not in (0, 1)")
    return x


def mu_from_x(x: Sequence[float]) -> list:
    return [v / (1.0 - v) for v in _check_x(x, len(x))]


def x_from_mu(mu: Sequence[float]) -> list:
    return [m / (m + 1.0) for m in _check_mu(mu, len(mu))]


def _local_masks(graph: DependencyGraph, vertices: Sequence[int]) -> list:
    index = {v: i for i, v in enumerate(vertices)}
    masks = []
    for v in vertices:
        m = 0
        for u in graph.neighbors(v):
            j = index.get(u)
            if j is not None:
                m |= 1 << j
        masks.append(m)
    return masks


def independence_polynomial_sum(
    graph: DependencyGraph, vertex_set, mu: Sequence[float], cap: int = INDEPENDENCE_CAP
) -> float:
    """Sum over independent subsets ``I`` of ``vertex_set`` of ``prod_{B in I} mu[B]``."""
    vertices = sorted(set(vertex_set))
    if len(vertices) > cap:
        raise CapExceededError(
            f"neighborhood too large for exact independence polynomial: {len(vertices)} vertices (cap {cap})"
        )
    if not vertices:
        return 1.0
    masks = _local_masks(graph, vertices)
    weights = [float(mu[v]) for v in vertices]
    memo = {0: 1.0}

    def z(mask):
        if mask in memo:
            return memo[mask]
        i = mask.bit_length() - 1
        rest = mask & ~(1 << i)
        val = z(rest) + weights[i] * z(rest & ~masks[i])
        memo[mask] = val
        return val

    return z((1 << len(vertices)) - 1)


def independent_subsets(graph: DependencyGraph, vertex_set, cap: int = INDEPENDENCE_CAP) -> list:
    """All independent subsets of ``vertex_set`` as sorted tuples, the empty set first."""
    vertices = sorted(set(vertex_set))
    if len(vertices) > cap:
        raise CapExceededError(
            f"neighborhood too large for exact independence polynomial: {len(vertices)} vertices (cap {cap})"
        )
    out = []

    def rec(i, chosen, blocked):
        if i == len(vertices):
            out.append(tuple(chosen))
            return
        rec(i + 1, chosen, blocked)
        v = vertices[i]
        if v not in blocked:
            rec(i + 1, chosen + [v], blocked | set(graph.neighbors(v)))

    rec(0, [], frozenset())
    out.sort(key=lambda s: (len(s), s))
    return out


@dataclass
class EventBound:
    event: int
    p: float
    bound: float

    @property
    def slack(self) -> float:
        return self.bound - self.p

    @property
    def satisfied(self) -> bool:
        return self.p <= self.bound * (1.0 + EPS)


@dataclass
class ConditionReport:
    """Per-event comparison of p(A) with the bound of one sufficient condition."""

    condition: str
    per_event: list = field(default_factory=list)
    total_bound: float = 0.0
    params: list = field(default_factory=list)

    @property
    def satisfied(self) -> bool:
        return all(b.satisfied for b in self.per_event)

    def violations(self) -> list:
        return [b.event for b in self.per_event if not b.satisfied]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "condition": self.condition,
            "satisfied": self.satisfied,
            "total_bound": self.total_bound,
            "events": [
                {
                    "event": b.event,
                    "param": self.params[b.event] if self.params else None,
                    "p": b.p,
                    "bound": b.bound,
                    "slack": b.slack,
                    "verdict": "ok" if b.satisfied else "violated",
                }
                for b in self.per_event
            ],
        }


def cluster_bounds(graph: DependencyGraph, mu: Sequence[float], cap: int = INDEPENDENCE_CAP) -> list:
    mu = _check_mu(mu, graph.n)
    return [mu[a] / independence_polynomial_sum(graph, graph.inclusive(a), mu, cap) for a in range(graph.n)]


def classical_bounds(graph: DependencyGraph, x: Sequence[float]) -> list:
    x = _check_x(x, graph.n)
    return [x[a] * math.prod(1.0 - x[b] for b in graph.neighbors(a)) for a in range(graph.n)]


def _probs(instance, probabilities):
    if probabilities is None:
        return event_probabilities(instance)
    if len(probabilities) != instance.n_events:
        raise InputError("probabilities must have one entry per event")
    return list(probabilities)


def check_cluster_condition(
    instance: Instance,
    graph: DependencyGraph,
    mu: Sequence[float],
    probabilities: Sequence[float] | None = None,
    cap: int = INDEPENDENCE_CAP,
) -> ConditionReport:
    p = _probs(instance, probabilities)
    bounds = cluster_bounds(graph, mu, cap)
    return ConditionReport(
        "cluster",
        [EventBound(a, p[a], bounds[a]) for a in range(graph.n)],
        math.fsum(mu),
        [float(m) for m in mu],
    )


def check_classical_condition(
    instance: Instance,
    graph: DependencyGraph,
    x: Sequence[float],
    probabilities: Sequence[float] | None = None,
) -> ConditionReport:
    p = _probs(instance, probabilities)
    bounds = classical_bounds(graph, x)
    return ConditionReport(
        "classical",
        [EventBound(a, p[a], bounds[a]) for a in range(graph.n)],
        math.fsum(mu_from_x(x)),
        [float(v) for v in x],
    )


def uniform_mu_search(
    graph: DependencyGraph,
    probabilities: Sequence[float],
    objective: str = "min",
    iterations: int = 60,
    cap: int = INDEPENDENCE_CAP,
) -> float | None:
    """Scalar ``mu`` (same for every event) satisfying the cluster condition, or None.

    For each event ``Z(mu) / mu`` is convex in ``mu``, so the feasible values
    form an interval. ``objective="min"`` returns its lower end (the tightest
    resampling bound), ``"max"`` its upper end. Both ends are found by
    bisection after a ternary search locates the best interior point.
    """
    if objective not in ("min", "max"):
        raise InputError("objective must be 'min' or 'max'")
    p = list(probabilities)
    if graph.n == 0:
        return None
    nbhds = [graph.inclusive(a) for a in range(graph.n)]
    if any(len(s) > cap for s in nbhds):
        raise CapExceededError("neighborhood too large for exact independence polynomial")
    if all(q == 0 for q in p):
        return None
    if any(q >= 1.0 for q in p):
        return None

    # ratio(mu) = max_A p(A) * Z_A(mu) / mu; feasible iff ratio <= 1. No EPS
    # here, so results pass check_cluster_condition despite rounding.
    def ratio(m):
        mus = [m] * graph.n
        return max(p[a] * independence_polynomial_sum(graph, nbhds[a], mus, cap) / m for a in range(graph.n))

    def feasible(m):
        return ratio(m) <= 1.0

    lo, hi = 1e-12, 1e12
    # ternary search on log(mu); ratio is convex in mu and hence unimodal in log(mu)
    a, b = math.log(lo), math.log(hi)
    for _ in range(200):
        m1 = a + (b - a) / 3
        m2 = b - (b - a) / 3
        if ratio(math.exp(m1)) <= ratio(math.exp(m2)):
            b = m2
        else:
            a = m1
    best = math.exp((a + b) / 2)
    if not feasible(best):
        return None
    if objective == "min":
        bad, good = lo, best
    else:
        bad, good = hi, best
    if feasible(bad):
        return bad
    for _ in range(iterations):
        mid = math.sqrt(bad * good)
        if feasible(mid):
            good = mid
        else:
            bad = mid
    return good
