"""The two branching processes behind the running-time bounds.

``simulate_mt_branching`` grows a random tree where every node ``v`` gets, for
each event ``B`` in the closed neighborhood of its label, an independent child
labeled ``B`` with probability ``x_B``. ``simulate_improved_branching`` uses
``x = mu / (1 + mu)`` and redraws a node's whole child set until its labels
form an independent set. The closed forms ``closed_form_p_T`` and
``closed_form_p_T_prime`` give the exact probability that each process
produces a given finite tree.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .conditions import (
    INDEPENDENCE_CAP,
    _check_mu,
    _check_x,
    independence_polynomial_sum,
    independent_subsets,
    x_from_mu,
)
from .errors import CapExceededError, InputError
from .model import DependencyGraph
from .rng import CounterRNG
from .witness import WitnessTree, canonical_encoding, is_proper, is_strongly_proper

DEFAULT_DEPTH_CAP = 64
DEFAULT_NODE_CAP = 10**6
DEFAULT_TALLY_NODES = 64
REJECTION_LIMIT = 10**9
MAX_ENUMERATED_TREES = 10**6

PROCESSES = ("mt", "improved")


@dataclass
class BranchingOutcome:
    """Result of one simulated tree.

    ``tree`` is None when the run was cut short; ``truncated`` then says
    whether the generation cap ("depth") or the node cap ("size") was hit.
    """

    tree: WitnessTree | None
    generations_used: int
    rejection_rounds: int
    truncated: str | None = None


def _csr(graph: DependencyGraph):
    ptr = [0]
    idx = []
    for a in range(graph.n):
        idx.extend(graph.inclusive(a))
        ptr.append(len(idx))
    return (
        np.asarray(ptr, dtype=np.int64),
        np.asarray(idx, dtype=np.int64),
        graph.adjacency_matrix(),
    )


def _x_array(graph, x, allow_zero=True):
    arr = np.asarray([float(v) for v in x], dtype=np.float64)
    if arr.shape != (graph.n,):
        raise InputError(f"expected {graph.n} parameters, got {arr.shape[0]}")
    lo_ok = (arr >= 0) if allow_zero else (arr > 0)
    if not np.all(lo_ok & (arr < 1)):
        raise InputError("branching probabilities must lie in [0, 1)")
    return arr


def _check_root(graph, root_event):
    if not 0 <= root_event < graph.n:
        raise InputError(f"unknown root event {root_event}")


def _simulate(graph, xarr, root_event, depth_cap, rng_stream, node_cap, improved):
    _check_root(graph, root_event)
    if depth_cap < 1:
        raise InputError("depth_cap must be >= 1")
    if rng_stream is None:
        rng_stream = CounterRNG(0)
    ptr, idx, adj = _csr(graph)
    labels = np.empty(node_cap, dtype=np.int64)
    parents = np.empty(node_cap, dtype=np.int64)
    status, n, gens, rej, ctr = _kernels.simulate_one(
        ptr, idx, adj, xarr, root_event, depth_cap, node_cap, improved,
        np.uint64(rng_stream.key), rng_stream.counter, REJECTION_LIMIT, labels, parents,
    )
    rng_stream.counter = int(ctr)
    if status == _kernels.REJECTION_ABORT:
        raise RuntimeError(
            f"rejection subprocess restarted more than {REJECTION_LIMIT} times; "
            "some x is too close to 1 for an independent child set to appear"
        )
    if status == _kernels.COMPLETE:
        par = [None] + [int(p) for p in parents[1:n]]
        return BranchingOutcome(WitnessTree(tuple(int(v) for v in labels[:n]), tuple(par)), gens, rej)
    reason = "depth" if status == _kernels.DEPTH_TRUNCATED else "size"
    return BranchingOutcome(None, gens, rej, reason)


def simulate_mt_branching(
    graph: DependencyGraph,
    x: Sequence[float],
    root_event: int,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    rng_stream: CounterRNG | None = None,
    node_cap: int = DEFAULT_NODE_CAP,
) -> BranchingOutcome:
    return _simulate(graph, _x_array(graph, x), root_event, depth_cap, rng_stream, node_cap, False)


def simulate_improved_branching(
    graph: DependencyGraph,
    mu: Sequence[float],
    root_event: int,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    rng_stream: CounterRNG | None = None,
    node_cap: int = DEFAULT_NODE_CAP,
) -> BranchingOutcome:
    xarr = _x_array(graph, x_from_mu(mu))
    return _simulate(graph, xarr, root_event, depth_cap, rng_stream, node_cap, True)


def rejection_child_set(graph: DependencyGraph, vertex: int, x: Sequence[float], rng_stream: CounterRNG) -> frozenset:
    """One run of the restart-until-independent subprocess for a node labeled ``vertex``."""
    incl = graph.inclusive(vertex)
    for _ in range(REJECTION_LIMIT):
        chosen = [u for u in incl if rng_stream.random() < x[u]]
        if graph.is_independent(chosen):
            return frozenset(chosen)
    raise RuntimeError("rejection subprocess did not produce an independent set")


def rejection_child_set_batch(graph: DependencyGraph, vertex: int, x: Sequence[float], draws: int, seed: int) -> list:
    """``draws`` child sets from the rejection subprocess (draw ``t`` uses stream ``(seed, t)``)."""
    _check_root(graph, vertex)
    ptr, idx, adj = _csr(graph)
    out = np.empty(draws, dtype=np.int64)
    _kernels.child_set_kernel(ptr, idx, adj, _x_array(graph, x), vertex, True, np.uint64(seed), draws, out)
    incl = graph.inclusive(vertex)
    decoded = {}
    result = []
    for m in out.tolist():
        s = decoded.get(m)
        if s is None:
            s = decoded[m] = frozenset(incl[i] for i in range(len(incl)) if m >> i & 1)
        result.append(s)
    return result


class IndependentSetSampler:
    """Exact sampler for independent ``I`` within ``vertex_set`` with weight

        w(I) = prod_{u in I} x_u * prod_{u in vertex_set, u not in I} (1 - x_u).
    """

    def __init__(self, graph: DependencyGraph, vertex_set, x: Sequence[float], cap: int = INDEPENDENCE_CAP):
        verts = sorted(set(vertex_set))
        self.sets = [frozenset(s) for s in independent_subsets(graph, verts, cap)]
        weights = []
        for s in self.sets:
            weights.append(math.prod(x[u] if u in s else 1.0 - x[u] for u in verts))
        self.weights = weights
        total = math.fsum(weights)
        if total <= 0:
            raise InputError("all independent sets have zero weight")
        self.probabilities = [w / total for w in weights]
        acc = []
        run = 0.0
        for w in weights:
            run += w
            acc.append(run)
        self._cdf = acc

    def sample(self, rng_stream: CounterRNG) -> frozenset:
        return self.sets[rng_stream.choice_cdf(self._cdf)]


def weighted_independent_set_sample(
    graph: DependencyGraph, vertex_set, x: Sequence[float], rng_stream: CounterRNG
) -> frozenset:
    return IndependentSetSampler(graph, vertex_set, x).sample(rng_stream)


def closed_form_p_T(tree: WitnessTree, graph: DependencyGraph, x: Sequence[float]) -> float:
    """Probability that the plain branching process produces exactly ``tree``."""
    if not is_proper(tree, graph):
        raise InputError(f"tree {tree.encoding} is not a proper witness tree")
    x = _check_x(x, graph.n)
    a0 = tree.root_label
    out = (1.0 - x[a0]) / x[a0]
    for a in tree.labels:
        out *= x[a] * math.prod(1.0 - x[b] for b in graph.neighbors(a))
    return out


def closed_form_p_T_prime(tree: WitnessTree, graph: DependencyGraph, mu: Sequence[float]) -> float:
    """Probability that the rejection branching process produces exactly ``tree``.

    Each node contributes ``mu`` of its own label over the independence
    polynomial of its closed neighborhood; the root's ``mu`` is divided out.
    """
    if not is_strongly_proper(tree, graph):
        raise InputError(f"tree {tree.encoding} is not strongly proper")
    mu = _check_mu(mu, graph.n)
    z = {}
    out = 1.0 / mu[tree.root_label]
    for a in tree.labels:
        if a not in z:
            z[a] = independence_polynomial_sum(graph, graph.inclusive(a), mu)
        out *= mu[a] / z[a]
    return out


def improved_lemma_forms(tree: WitnessTree, graph: DependencyGraph, mu: Sequence[float]) -> tuple:
    """The tree probability of the rejection process written two ways.

    First as a product over nodes of the chosen child set's weight over the
    total weight of all independent child sets (in terms of ``x``), then after
    dividing numerator and denominator by ``prod (1 - x_B)`` over the closed
    neighborhood (in terms of ``mu``). The two must agree.
    """
    mu = _check_mu(mu, graph.n)
    x = x_from_mu(mu)
    pre = 1.0
    post = 1.0
    for v, kids in enumerate(tree.children):
        incl = graph.inclusive(tree.labels[v])
        kid_labels = {tree.labels[c] for c in kids}
        rest = [b for b in incl if b not in kid_labels]
        num = math.prod(x[u] for u in kid_labels) * math.prod(1.0 - x[b] for b in rest)
        den = math.fsum(
            math.prod(x[a] for a in s) * math.prod(1.0 - x[b] for b in incl if b not in s)
            for s in independent_subsets(graph, incl)
        )
        pre *= num / den
        post *= math.prod(mu[u] for u in kid_labels) / independence_polynomial_sum(graph, incl, mu)
    return pre, post


def enumerate_trees(
    graph: DependencyGraph,
    root_event: int,
    max_nodes: int,
    strong: bool = True,
    max_results: int = MAX_ENUMERATED_TREES,
) -> list:
    """All (strongly) proper trees rooted at ``root_event`` with at most ``max_nodes`` nodes.

    Trees are built breadth first, choosing for each node in turn a child
    label set from its closed neighborhood (an independent one when
    ``strong``). With distinct sibling labels this visits every tree once.
    """
    _check_root(graph, root_event)
    if max_nodes < 1:
        raise InputError("max_nodes must be >= 1")
    options = {}

    def child_options(a):
        if a not in options:
            incl = graph.inclusive(a)
            if strong:
                subs = independent_subsets(graph, incl)
            else:
                subs = [()]
                for u in incl:
                    subs += [s + (u,) for s in subs]
                subs.sort(key=lambda s: (len(s), s))
            options[a] = subs
        return options[a]

    out = []
    labels = [root_event]
    parents = [None]

    def rec(i):
        if i == len(labels):
            if len(out) >= max_results:
                raise CapExceededError(f"more than {max_results} trees; lower max_nodes")
            out.append(WitnessTree(tuple(labels), tuple(parents)))
            return
        room = max_nodes - len(labels)
        for kids in child_options(labels[i]):
            if len(kids) > room:
                break
            labels.extend(kids)
            parents.extend([i] * len(kids))
            rec(i + 1)
            del labels[len(labels) - len(kids):]
            del parents[len(parents) - len(kids):]

    rec(0)
    return out


def enumerate_strongly_proper_trees(
    graph: DependencyGraph, root_event: int, max_nodes: int, max_results: int = MAX_ENUMERATED_TREES
) -> list:
    return enumerate_trees(graph, root_event, max_nodes, True, max_results)


def enumerate_proper_trees(
    graph: DependencyGraph, root_event: int, max_nodes: int, max_results: int = MAX_ENUMERATED_TREES
) -> list:
    return enumerate_trees(graph, root_event, max_nodes, False, max_results)


@dataclass
class TreeTally:
    """Counts of completed trees by canonical encoding over ``trials`` runs."""

    process: str
    root_event: int
    trials: int
    counts: dict = field(default_factory=dict)
    depth_truncated: int = 0
    size_truncated: int = 0
    rejection_rounds: int = 0

    def frequency(self, encoding: str) -> float:
        return self.counts.get(encoding, 0) / self.trials

    @property
    def frequencies(self) -> dict:
        return {k: v / self.trials for k, v in self.counts.items()}

    @property
    def truncated_fraction(self) -> float:
        return (self.depth_truncated + self.size_truncated) / self.trials

    def merge(self, other: "TreeTally") -> "TreeTally":
        if (other.process, other.root_event) != (self.process, self.root_event):
            raise InputError("can only merge tallies of the same process and root")
        counts = Counter(self.counts)
        counts.update(other.counts)
        return TreeTally(
            self.process,
            self.root_event,
            self.trials + other.trials,
            dict(counts),
            self.depth_truncated + other.depth_truncated,
            self.size_truncated + other.size_truncated,
            self.rejection_rounds + other.rejection_rounds,
        )

    def to_dict(self) -> dict:
        return {
            "process": self.process,
            "root_event": self.root_event,
            "trials": self.trials,
            "depth_truncated": self.depth_truncated,
            "size_truncated": self.size_truncated,
            "rejection_rounds": self.rejection_rounds,
            "counts": dict(sorted(self.counts.items())),
        }


def _decode_row(row) -> WitnessTree:
    labels, parents = [], []
    for i in range(0, len(row), 2):
        if row[i] < 0:
            break
        labels.append(int(row[i]))
        parents.append(None if row[i + 1] < 0 else int(row[i + 1]))
    return WitnessTree(tuple(labels), tuple(parents))


def monte_carlo_tree_tally(
    graph: DependencyGraph,
    params: Sequence[float],
    root_event: int,
    process_kind: str,
    trials: int,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    seed: int = 0,
    max_nodes: int = DEFAULT_TALLY_NODES,
) -> TreeTally:
    """Simulate ``trials`` trees and count the completed ones by encoding.

    ``params`` is ``x`` for ``process_kind="mt"`` and ``mu`` for
    ``"improved"``. Runs are abandoned once the tree exceeds ``max_nodes``
    nodes and counted as size-truncated; the tally of smaller trees is
    unaffected.
    """
    if process_kind not in PROCESSES:
        raise InputError(f"process_kind must be one of {PROCESSES}")
    if trials < 1:
        raise InputError("trials must be >= 1")
    if depth_cap < 1:
        raise InputError("depth_cap must be >= 1")
    _check_root(graph, root_event)
    improved = process_kind == "improved"
    xarr = _x_array(graph, x_from_mu(params) if improved else params)
    node_cap = int(max_nodes)
    if node_cap < 1:
        raise InputError("max_nodes must be >= 1")
    ptr, idx, adj = _csr(graph)
    codes = np.empty((trials, 2 * node_cap), dtype=np.int64)
    status = np.empty(trials, dtype=np.int64)
    sizes = np.empty(trials, dtype=np.int64)
    rej = _kernels.tally_kernel(
        ptr, idx, adj, xarr, root_event, depth_cap, node_cap, improved,
        np.uint64(seed), REJECTION_LIMIT, trials, codes, status, sizes,
    )
    if np.any(status == _kernels.REJECTION_ABORT):
        raise RuntimeError(f"rejection subprocess restarted more than {REJECTION_LIMIT} times")
    done = codes[status == _kernels.COMPLETE, : 2 * int(sizes.max())]
    counts = {}
    if len(done):
        rows, cnt = np.unique(done, axis=0, return_counts=True)
        for row, c in zip(rows, cnt):
            counts[canonical_encoding(_decode_row(row))] = int(c)
    return TreeTally(
        process_kind,
        root_event,
        trials,
        counts,
        int(np.sum(status == _kernels.DEPTH_TRUNCATED)),
        int(np.sum(status == _kernels.SIZE_TRUNCATED)),
        int(rej),
    )
