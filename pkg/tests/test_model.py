import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mtlll.errors import CapExceededError, InputError
from mtlll.model import (
    Constant,
    DependencyGraph,
    Event,
    Instance,
    Monochromatic,
    Pattern,
    VarSpec,
    build_dependency_graph,
    event_probability,
    is_violated,
    sample_assignment,
)
from mtlll.rng import CounterRNG

from conftest import random_instance


def bits(n):
    return [VarSpec.uniform(i, 2) for i in range(n)]


def clause(eid, vbl):
    # (x_a or x_b ...) is violated iff all are 0
    return Event(eid, vbl, Pattern((0,) * len(vbl)))


class TestTypes:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(InputError):
            VarSpec(0, (0.5, 0.4))

    def test_negative_weight(self):
        with pytest.raises(InputError):
            VarSpec(0, (1.5, -0.5))

    def test_domain_size(self):
        assert VarSpec.uniform(0, 3).domain_size == 3

    def test_event_needs_support(self):
        with pytest.raises(InputError):
            Event(0, (), Constant())

    def test_event_rejects_duplicate_vars(self):
        with pytest.raises(InputError):
            Event(0, (1, 1), Constant())

    def test_instance_checks_ids(self):
        with pytest.raises(InputError):
            Instance(bits(2), [clause(0, (0, 5))])
        with pytest.raises(InputError):
            Instance(bits(2), [clause(1, (0,))])


class TestDependencyGraph:
    def test_disjoint_supports(self):
        g = build_dependency_graph(Instance(bits(4), [clause(0, (0, 1)), clause(1, (2, 3))]))
        assert g.n == 2 and g.edges() == []

    def test_single_event(self):
        g = build_dependency_graph(Instance(bits(1), [clause(0, (0,))]))
        assert g.edges() == [] and g.inclusive(0) == (0,) and g.neighbors(0) == ()

    def test_three_clauses(self):
        # variables {1,2},{2,3},{4} -> 0-based {0,1},{1,2},{3}
        inst = Instance(bits(4), [clause(0, (0, 1)), clause(1, (1, 2)), clause(2, (3,))])
        assert build_dependency_graph(inst).edges() == [(0, 1)]

    def test_graph_rejects_self_loop(self):
        with pytest.raises(InputError):
            DependencyGraph(2, [(1, 1)])

    def test_matches_bruteforce_on_random_instances(self):
        rng = random.Random(7)
        for _ in range(100):
            inst = random_instance(rng, n_vars=rng.randint(1, 10), n_events=rng.randint(1, 9))
            g = build_dependency_graph(inst)
            for a, b in itertools.product(range(inst.n_events), repeat=2):
                shares = bool(set(inst.events[a].vbl) & set(inst.events[b].vbl))
                assert g.adjacent(a, b) == (a != b and shares)
                assert g.adjacent(a, b) == g.adjacent(b, a)
            for a in range(g.n):
                assert a in g.inclusive(a) and a not in g.neighbors(a)


class TestIsViolated:
    def test_clause_falsified(self):
        inst = Instance(bits(2), [clause(0, (0, 1))])
        assert is_violated(inst, [0, 0], 0)

    def test_clause_satisfied_regardless_of_others(self):
        inst = Instance(bits(3), [clause(0, (0, 1))])
        assert not is_violated(inst, [1, 0, 0], 0)
        assert not is_violated(inst, [1, 0, 1], 0)

    def test_monochromatic(self):
        inst = Instance(bits(3), [Event(0, (0, 1, 2), Monochromatic())])
        assert not is_violated(inst, [0, 0, 1], 0)
        assert is_violated(inst, [1, 1, 1], 0)

    def test_unknown_event(self):
        inst = Instance(bits(2), [clause(0, (0, 1))])
        with pytest.raises(InputError):
            is_violated(inst, [0, 0], 3)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 10**6))
    def test_invariant_outside_support(self, seed):
        rng = random.Random(seed)
        inst = random_instance(rng)
        r = CounterRNG(seed)
        a = sample_assignment(inst, r)
        b = sample_assignment(inst, r)
        for e in inst.events:
            mixed = list(b)
            for v in e.vbl:
                mixed[v] = a[v]
            assert is_violated(inst, a, e.id) == is_violated(inst, mixed, e.id)


class TestEventProbability:
    def test_never(self):
        inst = Instance(bits(1), [Event(0, (0,), Constant(False))])
        assert event_probability(inst, 0) == 0.0

    @pytest.mark.parametrize("k", [1, 2, 3, 5])
    def test_clause(self, k):
        inst = Instance(bits(k), [clause(0, tuple(range(k)))])
        assert event_probability(inst, 0) == 2.0**-k

    def test_monochromatic_edge(self):
        inst = Instance(bits(3), [Event(0, (0, 1, 2), Monochromatic())])
        assert event_probability(inst, 0) == 0.25

    def test_weighted(self):
        inst = Instance([VarSpec(0, (0.6, 0.4)), VarSpec(1, (0.6, 0.4))], [Event(0, (0, 1), Pattern((1, 1)))])
        assert event_probability(inst, 0) == pytest.approx(0.16, abs=1e-15)

    def test_cap(self):
        inst = Instance(bits(5), [clause(0, tuple(range(5)))])
        with pytest.raises(CapExceededError, match="event 0"):
            event_probability(inst, 0, cap=16)

    def test_matches_sampling(self):
        rng = random.Random(3)
        for i in range(5):
            inst = random_instance(rng)
            r = CounterRNG(100 + i)
            n = 100_000
            hits = np.zeros(inst.n_events)
            for _ in range(n):
                a = sample_assignment(inst, r)
                for e in inst.events:
                    hits[e.id] += e.violated_by(a)
            for e in inst.events:
                p = event_probability(inst, e.id)
                se = math.sqrt(max(p * (1 - p), 1e-12) / n)
                assert abs(hits[e.id] / n - p) <= 4 * se
