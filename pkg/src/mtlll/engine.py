"""The Moser-Tardos resampling procedure.

Sample every variable, then while some event is violated pick one, redraw all
variables in its support, and log it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import InputError
from .model import Instance, sample_assignment
from .rng import CounterRNG

DEFAULT_MAX_STEPS = 10**6


class SelectionPolicy(str, Enum):
    LOWEST_ID = "lowest-id"
    RANDOM_UNIFORM = "random-uniform"
    MOST_RECENTLY_INVALIDATED = "most-recently-invalidated"


def default_max_steps(mu: Sequence[float] | None = None) -> int:
    if mu is None:
        return DEFAULT_MAX_STEPS
    return max(DEFAULT_MAX_STEPS, 100 * math.ceil(math.fsum(mu)))


@dataclass
class ExecutionLog:
    """What one run did: the ordered resampled events and per-event tallies."""

    steps: list
    counts: list
    final_assignment: list
    terminated: bool
    seed: int = 0
    trial: int = 0
    policy: str = SelectionPolicy.LOWEST_ID.value

    @property
    def steps_used(self) -> int:
        return len(self.steps)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "seed": self.seed,
            "trial": self.trial,
            "policy": self.policy,
            "terminated": self.terminated,
            "steps_used": self.steps_used,
            "steps": list(self.steps),
            "counts": list(self.counts),
            "final_assignment": list(self.final_assignment),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ExecutionLog":
        return cls(
            steps=list(d["steps"]),
            counts=list(d["counts"]),
            final_assignment=list(d["final_assignment"]),
            terminated=bool(d["terminated"]),
            seed=d.get("seed", 0),
            trial=d.get("trial", 0),
            policy=d.get("policy", SelectionPolicy.LOWEST_ID.value),
        )


def find_violated(
    instance: Instance,
    assignment: Sequence[int],
    dirty_hint: Iterable[int] | None = None,
    previous: Iterable[int] | None = None,
) -> set:
    """Set of violated events.

    Without a hint every event is checked. With a hint only the hinted events
    are re-evaluated; events in ``previous`` outside the hint keep their status,
    which is correct as long as the hint covers every event touching a changed
    variable.
    """
    events = instance.events
    if dirty_hint is None:
        return {e.id for e in events if e.violated_by(assignment)}
    hint = set(dirty_hint)
    out = {a for a in (previous or ()) if a not in hint}
    out.update(a for a in hint if events[a].violated_by(assignment))
    return out


def run(
    instance: Instance,
    policy: SelectionPolicy | str = SelectionPolicy.LOWEST_ID,
    seed: int = 0,
    max_steps: int = DEFAULT_MAX_STEPS,
    trial: int = 0,
) -> ExecutionLog:
    """One run of the resampling algorithm on the stream ``(seed, trial)``.

    Stops when no event is violated (``terminated=True``) or after
    ``max_steps`` resamplings (``terminated=False``).
    """
    policy = SelectionPolicy(policy)
    if max_steps < 1:
        raise InputError("max_steps must be >= 1")
    rng = CounterRNG(seed, trial)
    cdfs = instance.cumulative_weights
    graph = instance.graph
    events = instance.events
    assignment = sample_assignment(instance, rng)
    violated = find_violated(instance, assignment)
    counts = [0] * instance.n_events
    steps = []
    # step index at which each event last turned from satisfied to violated
    stamp = {a: -1 for a in violated}
    while violated and len(steps) < max_steps:
        if policy is SelectionPolicy.LOWEST_ID:
            a = min(violated)
        elif policy is SelectionPolicy.RANDOM_UNIFORM:
            a = sorted(violated)[rng.randbelow(len(violated))]
        else:
            a = max(violated, key=lambda e: (stamp[e], -e))
        for v in events[a].vbl:
            assignment[v] = rng.choice_cdf(cdfs[v])
        steps.append(a)
        counts[a] += 1
        before = violated
        violated = find_violated(instance, assignment, graph.inclusive(a), before)
        t = len(steps)
        for e in violated:
            if e not in before or e == a:
                stamp[e] = t
    return ExecutionLog(
        steps=steps,
        counts=counts,
        final_assignment=assignment,
        terminated=not violated,
        seed=seed,
        trial=trial,
        policy=policy.value,
    )
