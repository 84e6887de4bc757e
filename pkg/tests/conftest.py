import itertools
import random

import numpy as np
import pytest

from mtlll.model import DependencyGraph, Event, Instance, Pattern, VarSpec

GRAPHS = {
    "isolated": (1, []),
    "edge": (2, [(0, 1)]),
    "path3": (3, [(0, 1), (1, 2)]),
    "triangle": (3, [(0, 1), (1, 2), (0, 2)]),
    "cycle5": (5, [(i, (i + 1) % 5) for i in range(5)]),
}


def graph(name):
    n, edges = GRAPHS[name]
    return DependencyGraph(n, edges)


def random_graph(rng, n, p):
    return DependencyGraph(n, [(a, b) for a, b in itertools.combinations(range(n), 2) if rng.random() < p])


def naive_independence_sum(g, vertex_set, mu):
    """Brute force over all 2^|S| subsets of S, vectorized with numpy bitmasks."""
    verts = sorted(vertex_set)
    k = len(verts)
    subsets = np.arange(1 << k, dtype=np.int64)
    ok = np.ones(1 << k, dtype=bool)
    weight = np.ones(1 << k)
    for i, a in enumerate(verts):
        has = (subsets >> i) & 1
        weight = np.where(has == 1, weight * mu[a], weight)
        for j, b in enumerate(verts[i + 1:], i + 1):
            if g.adjacent(a, b):
                ok &= ~((has == 1) & (((subsets >> j) & 1) == 1))
    return float(weight[ok].sum())


def instance_with_graph(g, probs):
    """An instance whose dependency graph is ``g`` and whose event probabilities are ``probs``.

    Event A owns a biased bit (P(1) = probs[A]) and is violated iff that bit is 1;
    every graph edge adds a one-value variable shared by its two endpoints.
    """
    variables = [VarSpec(a, (1.0 - probs[a], probs[a])) for a in range(g.n)]
    shared = [[] for _ in range(g.n)]
    for a, b in g.edges():
        vid = len(variables)
        variables.append(VarSpec(vid, (1.0,)))
        shared[a].append(vid)
        shared[b].append(vid)
    events = []
    for a in range(g.n):
        vbl = (a, *shared[a])
        events.append(Event(a, vbl, Pattern((1,) + (0,) * len(shared[a]))))
    return Instance(variables, events)


def random_instance(rng, n_vars=8, n_events=6, max_support=3, max_domain=3):
    variables = []
    for i in range(n_vars):
        d = rng.randint(1, max_domain)
        w = [rng.random() + 0.05 for _ in range(d)]
        s = sum(w)
        w = [v / s for v in w]
        w[-1] = 1.0 - sum(w[:-1])
        variables.append(VarSpec(i, tuple(w)))
    events = []
    for e in range(n_events):
        vbl = tuple(rng.sample(range(n_vars), rng.randint(1, min(max_support, n_vars))))
        target = tuple(rng.randrange(variables[v].domain_size) for v in vbl)
        events.append(Event(e, vbl, Pattern(target)))
    return Instance(variables, events)


@pytest.fixture
def pyrng():
    return random.Random(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
