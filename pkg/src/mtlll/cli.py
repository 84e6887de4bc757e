"""Command-line front end.

Exit codes: 0 success / condition satisfied, 1 error, 2 condition not
satisfied (or experiment refused), 3 solve did not terminate within
``--max-steps``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import bundled
from .branching import (
    DEFAULT_DEPTH_CAP,
    closed_form_p_T,
    closed_form_p_T_prime,
    enumerate_proper_trees,
    enumerate_strongly_proper_trees,
    monte_carlo_tree_tally,
)
from .conditions import (
    SCHEMA_VERSION,
    check_classical_condition,
    check_cluster_condition,
    mu_from_x,
    uniform_mu_search,
    x_from_mu,
)
from .encodings import cnf_to_instance, hypergraph_to_instance, parse_dimacs, parse_hypergraph
from .engine import SelectionPolicy, default_max_steps, run
from .errors import InputError, LLLError
from .experiment import run_trials
from .model import DependencyGraph, event_probabilities

EXIT_OK, EXIT_ERROR, EXIT_UNSATISFIED, EXIT_NOT_TERMINATED = 0, 1, 2, 3

TEST_GRAPHS = {
    "isolated": (1, []),
    "edge": (2, [(0, 1)]),
    "path3": (3, [(0, 1), (1, 2)]),
    "triangle": (3, [(0, 1), (1, 2), (0, 2)]),
    "cycle5": (5, [(i, (i + 1) % 5) for i in range(5)]),
}

BUNDLED = {
    "random-3sat-50": bundled.random_3sat,
    "hypergraph-60": bundled.hypergraph_coloring,
    "five-cycle": bundled.five_cycle,
    "fair-coin": bundled.fair_coin,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def test_graph(name: str) -> DependencyGraph:
    if name not in TEST_GRAPHS:
        raise InputError(f"unknown graph {name!r}; choose from {', '.join(TEST_GRAPHS)}")
    n, edges = TEST_GRAPHS[name]
    return DependencyGraph(n, edges)


def load_instance(path: str, fmt: str | None, colors: int = 2):
    """Returns (instance, default mu or None). ``bundled:NAME`` selects a shipped instance."""
    if path.startswith("bundled:"):
        name = path.split(":", 1)[1]
        if name not in BUNDLED:
            raise InputError(f"unknown bundled instance {name!r}; choose from {', '.join(BUNDLED)}")
        b = BUNDLED[name]()
        return b.instance, list(b.mu)
    text = Path(path).read_text()
    if fmt is None:
        fmt = "dimacs" if path.endswith(".cnf") else "hypergraph"
    if fmt == "dimacs":
        return cnf_to_instance(parse_dimacs(text)), None
    return hypergraph_to_instance(parse_hypergraph(text), colors), None


def _read_vector(spec: str, n: int, what: str) -> list:
    """A number (same value for every event), or a file of numbers (whitespace or JSON)."""
    try:
        return [float(spec)] * n
    except ValueError:
        pass
    text = Path(spec).read_text()
    try:
        data = json.loads(text)
        if isinstance(data, dict):
            data = data[what]
        values = [float(v) for v in data]
    except (json.JSONDecodeError, KeyError, TypeError):
        values = [float(t) for t in text.split()]
    if len(values) != n:
        raise InputError(f"{what} file has {len(values)} values for {n} events")
    return values


def resolve_params(args, instance, default_mu):
    """(condition report, mu, source) for the chosen condition and parameter source."""
    graph = instance.graph
    probs = event_probabilities(instance)
    if args.condition == "classical":
        if args.x is not None:
            x = _read_vector(args.x, instance.n_events, "x")
            source = "x"
        elif args.mu not in (None, "uniform"):
            x = x_from_mu(_read_vector(args.mu, instance.n_events, "mu"))
            source = "mu"
        else:
            raise InputError("the classical condition needs --x (or an explicit --mu)")
        report = check_classical_condition(instance, graph, x, probs)
        return report, mu_from_x(x), source
    if args.x is not None:
        mu = mu_from_x(_read_vector(args.x, instance.n_events, "x"))
        source = "x"
    elif args.mu is None and default_mu is not None:
        mu, source = default_mu, "bundled"
    elif args.mu in (None, "uniform"):
        found = uniform_mu_search(graph, probs)
        if found is None:
            mu, source = [1.0] * instance.n_events, "uniform-search-failed"
        else:
            mu, source = [found] * instance.n_events, "uniform-search"
    else:
        mu, source = _read_vector(args.mu, instance.n_events, "mu"), "file"
    return check_cluster_condition(instance, graph, mu, probs), mu, source


def _emit(args, payload: dict, rows: list | None = None) -> None:
    if not args.out:
        return
    if args.out_format == "csv":
        buf = io.StringIO()
        rows = rows if rows is not None else []
        if rows:
            w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        Path(args.out).write_text(buf.getvalue())
    else:
        Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def cmd_check(args) -> int:
    instance, default_mu = load_instance(args.instance, args.format, args.colors)
    report, mu, source = resolve_params(args, instance, default_mu)
    d = report.to_dict()
    d["param_source"] = source
    d["instance"] = args.instance
    print(f"{'event':>6} {'p':>12} {'bound':>12} {'slack':>13}  verdict")
    for e in d["events"]:
        print(f"{e['event']:>6} {e['p']:>12.6g} {e['bound']:>12.6g} {e['slack']:>13.6g}  {e['verdict']}")
    label = "sum mu" if report.condition == "cluster" else "sum x/(1-x)"
    print(f"{report.condition} condition {'satisfied' if report.satisfied else 'NOT satisfied'}; "
          f"{label} = {report.total_bound:.6g}")
    _emit(args, d, d["events"])
    return EXIT_OK if report.satisfied else EXIT_UNSATISFIED


def cmd_solve(args) -> int:
    instance, default_mu = load_instance(args.instance, args.format, args.colors)
    mu = default_mu
    if args.mu not in (None, "uniform"):
        mu = _read_vector(args.mu, instance.n_events, "mu")
    max_steps = args.max_steps or default_max_steps(mu)
    log = run(instance, args.policy, args.seed, max_steps)
    print(f"terminated={log.terminated} steps={log.steps_used}")
    print("N_A: " + " ".join(str(c) for c in log.counts))
    d = log.to_dict()
    _emit(args, d, [{"step": i + 1, "event": a} for i, a in enumerate(log.steps)])
    return EXIT_OK if log.terminated else EXIT_NOT_TERMINATED


def cmd_experiment(args) -> int:
    instance, default_mu = load_instance(args.instance, args.format, args.colors)
    report, mu, source = resolve_params(args, instance, default_mu)
    if not report.satisfied and not args.force:
        print(f"{report.condition} condition not satisfied (events {report.violations()}); "
              "use --force to run anyway", file=sys.stderr)
        return EXIT_UNSATISFIED
    max_steps = args.max_steps or default_max_steps(mu)
    stats = run_trials(instance, args.trials, args.seed, args.policy, max_steps)
    applicable = report.satisfied
    summary = stats.summary(mu if applicable else None)
    summary.update(
        schema_version=SCHEMA_VERSION,
        instance=args.instance,
        condition=report.condition,
        condition_satisfied=report.satisfied,
        param_source=source,
        bounds_applicable=applicable,
        max_steps=max_steps,
    )
    if not applicable:
        summary["sum_mu"] = None
        summary["total_within_bound"] = None
        for e, m in zip(summary["events"], mu):
            e["mu"] = None
            e["within_bound"] = None
    print(f"trials={stats.trials} nonterminated={summary['nonterminated']} "
          f"mean_total_steps={summary['mean_total_steps']:.6g} (se {summary['stderr_total_steps']:.3g})"
          + (f" sum_mu={summary['sum_mu']:.6g}" if applicable else " bounds n/a"))
    _emit(args, summary, summary["events"])
    if summary["nonterminated"]:
        print(f"warning: {summary['nonterminated']} trials hit max_steps", file=sys.stderr)
    return EXIT_OK


def cmd_branching(args) -> int:
    if args.graph:
        graph = test_graph(args.graph)
    elif args.instance:
        graph = load_instance(args.instance, args.format, args.colors)[0].graph
    else:
        raise InputError("give --graph or --instance")
    if args.x is not None:
        x = _read_vector(args.x, graph.n, "x")
        mu = mu_from_x(x)
    else:
        mu = _read_vector(args.mu if args.mu not in (None, "uniform") else "1", graph.n, "mu")
        x = x_from_mu(mu)
    processes = ["mt", "improved"] if args.process == "both" else [args.process]
    out = {
        "schema_version": SCHEMA_VERSION,
        "graph": args.graph or args.instance,
        "root": args.root,
        "mu": mu,
        "trials": args.trials,
        "seed": args.seed,
        "max_nodes": args.max_nodes,
        "processes": {},
    }
    rows = []
    for proc in processes:
        if proc == "mt":
            trees = enumerate_proper_trees(graph, args.root, args.max_nodes)
            closed = [closed_form_p_T(t, graph, x) for t in trees]
            params = x
        else:
            trees = enumerate_strongly_proper_trees(graph, args.root, args.max_nodes)
            closed = [closed_form_p_T_prime(t, graph, mu) for t in trees]
            params = mu
        tally = monte_carlo_tree_tally(graph, params, args.root, proc, args.trials,
                                       args.depth_cap, args.seed, max_nodes=args.max_nodes)
        per_tree = []
        for t, p in zip(trees, closed):
            f = tally.frequency(t.encoding)
            se = math.sqrt(p * (1 - p) / args.trials)
            z = (f - p) / se if se > 0 else 0.0
            row = {"process": proc, "tree": t.encoding, "nodes": len(t), "closed_form": p,
                   "frequency": f, "stderr": se, "z": z}
            per_tree.append(row)
            rows.append(row)
        partial = {}
        for t, p in zip(trees, closed):
            partial[len(t)] = partial.get(len(t), 0.0) + p
        running, sums = 0.0, []
        for k in range(1, args.max_nodes + 1):
            running += partial.get(k, 0.0)
            sums.append({"max_nodes": k, "sum_closed_form": running})
        out["processes"][proc] = {
            "trees": per_tree,
            "partial_sums": sums,
            "size_truncated": tally.size_truncated,
            "depth_truncated": tally.depth_truncated,
            "rejection_rounds": tally.rejection_rounds,
            "max_abs_z": max((abs(r["z"]) for r in per_tree), default=0.0),
        }
        print(f"{proc}: {len(trees)} trees up to {args.max_nodes} nodes, "
              f"sum of closed forms {running:.6g}, max |z| {out['processes'][proc]['max_abs_z']:.3g}")
    _emit(args, out, rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mtlll", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, instance_required=True):
        p.add_argument("--instance", required=instance_required,
                       help="instance file, or bundled:NAME (%s)" % ", ".join(BUNDLED))
        p.add_argument("--format", choices=["dimacs", "hypergraph"],
                       help="instance format (default: dimacs for *.cnf, else hypergraph)")
        p.add_argument("--colors", type=int, default=2, help="colors for hypergraph instances")
        p.add_argument("--mu", help="'uniform', a number, or a file with one mu per event")
        p.add_argument("--x", help="a number or a file with one x per event")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="write the report here")
        p.add_argument("--out-format", choices=["json", "csv"], default="json")

    def engine_opts(p):
        p.add_argument("--policy", choices=[s.value for s in SelectionPolicy], default="lowest-id")
        p.add_argument("--max-steps", type=int, default=None,
                       help="default max(1e6, 100 * ceil(sum mu))")

    p = sub.add_parser("check", help="check the classical or cluster condition")
    common(p)
    p.add_argument("--condition", choices=["classical", "cluster"], default="cluster")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", help="run the resampling algorithm once")
    common(p)
    engine_opts(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("experiment", help="many seeded runs compared against the mu bounds")
    common(p)
    engine_opts(p)
    p.add_argument("--condition", choices=["classical", "cluster"], default="cluster")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--force", action="store_true", help="run even if the condition fails")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("branching", help="compare branching-process frequencies with closed forms")
    common(p, instance_required=False)
    p.add_argument("--graph", choices=list(TEST_GRAPHS))
    p.add_argument("--root", type=int, default=0)
    p.add_argument("--process", choices=["mt", "improved", "both"], default="both")
    p.add_argument("--max-nodes", type=int, default=4)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--depth-cap", type=int, default=DEFAULT_DEPTH_CAP)
    p.set_defaults(func=cmd_branching)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "trials", 1) < 1:
        print("mtlll: error: --trials must be >= 1", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except (LLLError, OSError, ValueError) as exc:
        print(f"mtlll: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
