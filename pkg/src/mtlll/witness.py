"""Witness trees built from execution logs, and their structural checks.

Canonical encoding
------------------
A labeled rooted tree is written as its root label followed, if it has
children, by the comma-separated encodings of the children in parentheses.
Children are ordered by ``(label, encoding)``, so the string does not depend
on the order in which children were attached::

    "3"            single node labeled 3
    "0(1,2(0))"    root 0 with children 1 and 2; node 2 has a child 0

Two trees have equal encodings iff they are equal as unordered labeled
rooted trees. The encoding is stable and used as a key in reports.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property

from .errors import InputError
from .model import DependencyGraph, Instance, event_probability


@dataclass(frozen=True)
class WitnessTree:
    """Rooted tree with event labels. Node 0 is the root; ``parents[0]`` is None."""

    labels: tuple
    parents: tuple

    def __post_init__(self):
        labels = tuple(int(v) for v in self.labels)
        parents = tuple(None if p is None else int(p) for p in self.parents)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "parents", parents)
        if not labels:
            raise InputError("a tree has at least one node")
        if len(parents) != len(labels):
            raise InputError("labels and parents differ in length")
        if parents[0] is not None:
            raise InputError("node 0 must be the root")
        for i, p in enumerate(parents[1:], 1):
            if p is None or not 0 <= p < i:
                raise InputError(f"node {i}: parent must be an earlier node, got {p}")

    def __len__(self):
        return len(self.labels)

    @property
    def root(self) -> int:
        return 0

    @property
    def root_label(self) -> int:
        return self.labels[0]

    @cached_property
    def depths(self) -> tuple:
        d = [0] * len(self.labels)
        for i in range(1, len(self.labels)):
            d[i] = d[self.parents[i]] + 1
        return tuple(d)

    @cached_property
    def children(self) -> tuple:
        ch = [[] for _ in self.labels]
        for i, p in enumerate(self.parents[1:], 1):
            ch[p].append(i)
        return tuple(tuple(c) for c in ch)

    def label_count(self, label: int) -> int:
        return self.labels.count(label)

    @cached_property
    def encoding(self) -> str:
        return canonical_encoding(self)

    def __str__(self):
        return self.encoding


LabeledRootedTree = WitnessTree


def canonical_encoding(tree: WitnessTree) -> str:
    enc = [""] * len(tree.labels)
    for v in reversed(range(len(tree.labels))):
        kids = sorted((tree.labels[c], enc[c]) for c in tree.children[v])
        s = str(tree.labels[v])
        if kids:
            s += "(" + ",".join(e for _, e in kids) + ")"
        enc[v] = s
    return enc[0]


_TOKEN = re.compile(r"\d+|[(),]")


def parse_encoding(text: str) -> WitnessTree:
    """Inverse of ``canonical_encoding`` (nodes come back in preorder)."""
    tokens = _TOKEN.findall(text)
    if "".join(tokens) != text.replace(" ", ""):
        raise InputError(f"bad tree encoding {text!r}")
    labels, parents = [], []
    pos = 0

    def node(parent):
        nonlocal pos
        if pos >= len(tokens) or not tokens[pos].isdigit():
            raise InputError(f"bad tree encoding {text!r}")
        me = len(labels)
        labels.append(int(tokens[pos]))
        parents.append(parent)
        pos += 1
        if pos < len(tokens) and tokens[pos] == "(":
            pos += 1
            node(me)
            while tokens[pos] == ",":
                pos += 1
                node(me)
            if tokens[pos] != ")":
                raise InputError(f"bad tree encoding {text!r}")
            pos += 1

    try:
        node(None)
    except IndexError:
        raise InputError(f"bad tree encoding {text!r}") from None
    if pos != len(tokens):
        raise InputError(f"trailing input in tree encoding {text!r}")
    return WitnessTree(tuple(labels), tuple(parents))


def build_witness_tree(log, t: int, instance: Instance) -> WitnessTree:
    """Witness tree of step ``t`` (1-based) of ``log``.

    Going back from step ``t - 1`` to step 1, an event sharing a variable with
    some node already in the tree is attached below the deepest such node;
    among equally deep candidates the most recently added one wins. Events
    sharing no variable are skipped.
    """
    steps = log.steps if hasattr(log, "steps") else log
    if not 1 <= t <= len(steps):
        raise InputError(f"step {t} out of range 1..{len(steps)}")
    vbl = [e.vbl for e in instance.events]
    root = steps[t - 1]
    labels = [root]
    parents = [None]
    depth = [0]
    # per variable: (depth, node id) of the deepest, most recent node whose label contains it
    best = {}
    for v in vbl[root]:
        best[v] = (0, 0)
    for i in range(t - 2, -1, -1):
        a = steps[i]
        cand = None
        for v in vbl[a]:
            b = best.get(v)
            if b is not None and (cand is None or b > cand):
                cand = b
        if cand is None:
            continue
        node = len(labels)
        d = cand[0] + 1
        labels.append(a)
        parents.append(cand[1])
        depth.append(d)
        key = (d, node)
        for v in vbl[a]:
            b = best.get(v)
            if b is None or key > b:
                best[v] = key
    return WitnessTree(tuple(labels), tuple(parents))


def _overlaps(graph: DependencyGraph, a: int, b: int) -> bool:
    return a == b or graph.adjacent(a, b)


def is_proper(tree: WitnessTree, graph: DependencyGraph) -> bool:
    """Children overlap their parent and siblings carry distinct labels."""
    for v, kids in enumerate(tree.children):
        lv = tree.labels[v]
        seen = set()
        for c in kids:
            lc = tree.labels[c]
            if lc in seen or not _overlaps(graph, lv, lc):
                return False
            seen.add(lc)
    return True


def is_strongly_proper(tree: WitnessTree, graph: DependencyGraph) -> bool:
    """Proper, and every sibling label set is independent in the graph."""
    if not is_proper(tree, graph):
        return False
    return all(graph.is_independent([tree.labels[c] for c in kids]) for kids in tree.children)


def tree_probability_product(tree: WitnessTree, instance: Instance, probabilities=None) -> float:
    if probabilities is None:
        cache = {a: event_probability(instance, a) for a in set(tree.labels)}
        return math.prod(cache[a] for a in tree.labels)
    return math.prod(probabilities[a] for a in tree.labels)


def witness_trees(log, instance: Instance) -> list:
    """Witness trees of every step of the log, in step order."""
    steps = log.steps if hasattr(log, "steps") else log
    return [build_witness_tree(steps, t, instance) for t in range(1, len(steps) + 1)]
