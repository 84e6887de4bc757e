"""Concrete problems as instances: k-SAT (DIMACS CNF) and hypergraph coloring.

Hypergraph text format: one edge per line as whitespace-separated vertex ids
(0-based); ``#`` starts a comment; blank lines are ignored. An optional
``# vertices N`` line fixes the vertex count, otherwise it is one more than
the largest id used.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import InputError, ParseError
from .model import Event, Instance, Monochromatic, Pattern, VarSpec

RETRY_LIMIT = 10_000


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple

    def __post_init__(self):
        clauses = tuple(tuple(int(l) for l in c) for c in self.clauses)
        object.__setattr__(self, "clauses", clauses)
        for i, c in enumerate(clauses):
            if not c:
                raise InputError(f"clause {i} is empty")
            vars_ = [abs(l) for l in c]
            if any(l == 0 or abs(l) > self.num_vars for l in c):
                raise InputError(f"clause {i} has a literal out of range 1..{self.num_vars}")
            if len(set(vars_)) != len(vars_):
                raise InputError(f"clause {i} mentions a variable twice")

    def satisfied_by(self, values) -> bool:
        """Direct clause evaluation; ``values[v - 1]`` is the truth value of variable ``v``."""
        return all(any(bool(values[abs(l) - 1]) == (l > 0) for l in c) for c in self.clauses)


@dataclass(frozen=True)
class Hypergraph:
    num_vertices: int
    edges: tuple

    def __post_init__(self):
        edges = tuple(tuple(sorted(int(v) for v in e)) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        seen = set()
        for i, e in enumerate(edges):
            if len(e) < 2:
                raise InputError(f"edge {i} has fewer than 2 vertices")
            if len(set(e)) != len(e):
                raise InputError(f"edge {i} repeats a vertex")
            if e[0] < 0 or e[-1] >= self.num_vertices:
                raise InputError(f"edge {i} has a vertex out of range 0..{self.num_vertices - 1}")
            if e in seen:
                raise InputError(f"edge {i} duplicates an earlier edge")
            seen.add(e)


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF. Clauses may span lines; each ends with a 0."""
    header = None
    clauses = []
    current = []
    current_line = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if header is not None:
                raise ParseError("second problem line", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"malformed header {line!r}", lineno)
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise ParseError(f"malformed header {line!r}", lineno) from None
            if header[0] < 0 or header[1] < 0:
                raise ParseError(f"negative count in header {line!r}", lineno)
            continue
        if header is None:
            raise ParseError("clause before 'p cnf' header", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", lineno) from None
            if current_line is None:
                current_line = lineno
            if lit == 0:
                if not current:
                    raise ParseError("empty clause", lineno)
                vars_ = [abs(l) for l in current]
                if len(set(current)) != len(current):
                    raise ParseError("duplicate literal in clause", current_line)
                if len(set(vars_)) != len(vars_):
                    raise ParseError("tautological clause (x and -x)", current_line)
                clauses.append(tuple(current))
                current = []
                current_line = None
                continue
            if abs(lit) > header[0]:
                raise ParseError(f"literal {lit} out of range 1..{header[0]}", lineno)
            current.append(lit)
    if header is None:
        raise ParseError("missing 'p cnf' header")
    if current:
        raise ParseError("last clause not terminated by 0", current_line)
    if len(clauses) != header[1]:
        raise ParseError(f"header declares {header[1]} clauses, found {len(clauses)}")
    return CnfFormula(header[0], tuple(clauses))


def format_dimacs(formula: CnfFormula, comments=()) -> str:
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {formula.num_vars} {len(formula.clauses)}")
    lines += [" ".join(map(str, c)) + " 0" for c in formula.clauses]
    return "\n".join(lines) + "\n"


def parse_hypergraph(text: str) -> Hypergraph:
    edges = []
    declared = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line, _, comment = raw.partition("#")
        words = comment.split()
        if len(words) == 2 and words[0] == "vertices" and not line.strip():
            try:
                declared = int(words[1])
            except ValueError:
                raise ParseError(f"bad vertex count {words[1]!r}", lineno) from None
            continue
        if not line.strip():
            continue
        try:
            edge = [int(t) for t in line.split()]
        except ValueError:
            raise ParseError(f"bad vertex id in {line.strip()!r}", lineno) from None
        if len(edge) < 2:
            raise ParseError("edge with fewer than 2 vertices", lineno)
        if min(edge) < 0:
            raise ParseError("negative vertex id", lineno)
        if len(set(edge)) != len(edge):
            raise ParseError("edge repeats a vertex", lineno)
        edges.append(tuple(edge))
    n = max((max(e) for e in edges), default=-1) + 1
    if declared is not None:
        if declared < n:
            raise ParseError(f"declared {declared} vertices but ids go up to {n - 1}")
        n = declared
    if len({tuple(sorted(e)) for e in edges}) != len(edges):
        raise ParseError("duplicate edge")
    return Hypergraph(n, tuple(edges))


def format_hypergraph(h: Hypergraph, comments=()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(f"# vertices {h.num_vertices}")
    lines += [" ".join(map(str, e)) for e in h.edges]
    return "\n".join(lines) + "\n"


def cnf_to_instance(formula: CnfFormula) -> Instance:
    """Uniform boolean per CNF variable (value 1 = true); one event per clause, violated iff falsified."""
    variables = [VarSpec.uniform(i, 2) for i in range(formula.num_vars)]
    events = []
    for i, c in enumerate(formula.clauses):
        vbl = tuple(abs(l) - 1 for l in c)
        falsifying = tuple(0 if l > 0 else 1 for l in c)
        events.append(Event(i, vbl, Pattern(falsifying)))
    return Instance(variables, events)


def hypergraph_to_instance(h: Hypergraph, colors: int = 2) -> Instance:
    """Uniform color per vertex; one event per edge, violated iff the edge is monochromatic."""
    if colors < 2:
        raise InputError("need at least 2 colors")
    variables = [VarSpec.uniform(i, colors) for i in range(h.num_vertices)]
    events = [Event(i, e, Monochromatic()) for i, e in enumerate(h.edges)]
    return Instance(variables, events)


def _place(rng, n_items, n_sets, k, cap):
    """``n_sets`` k-subsets of range(n_items), each item used at most ``cap`` times."""
    if n_items < k:
        raise InputError(f"cannot choose {k} distinct items out of {n_items}")
    if n_sets * k > n_items * cap:
        raise InputError(f"{n_sets} sets of size {k} need more than {cap} uses of each of {n_items} items")
    for _ in range(RETRY_LIMIT):
        uses = [0] * n_items
        out = []
        seen = set()
        for _ in range(n_sets):
            free = [i for i in range(n_items) if uses[i] < cap]
            if len(free) < k:
                break
            s = tuple(sorted(rng.sample(free, k)))
            if s in seen:
                break
            seen.add(s)
            for i in s:
                uses[i] += 1
            out.append(s)
        else:
            return out
    raise InputError(f"no feasible placement found after {RETRY_LIMIT} attempts")


def random_ksat(n_vars: int, n_clauses: int, k: int, max_var_occurrence: int, seed: int) -> CnfFormula:
    """Random k-CNF with every variable in at most ``max_var_occurrence`` clauses."""
    if min(n_vars, n_clauses, k, max_var_occurrence) < 1:
        raise InputError("parameters must be positive")
    rng = random.Random(seed)
    sets = _place(rng, n_vars, n_clauses, k, max_var_occurrence)
    clauses = [tuple((v + 1) * rng.choice((1, -1)) for v in s) for s in sets]
    return CnfFormula(n_vars, tuple(clauses))


def random_hypergraph(n_vertices: int, n_edges: int, k: int, max_degree: int, seed: int) -> Hypergraph:
    """Random k-uniform hypergraph with every vertex in at most ``max_degree`` edges."""
    if min(n_vertices, n_edges, max_degree) < 1 or k < 2:
        raise InputError("parameters must be positive and k >= 2")
    rng = random.Random(seed)
    return Hypergraph(n_vertices, tuple(_place(rng, n_vertices, n_edges, k, max_degree)))
