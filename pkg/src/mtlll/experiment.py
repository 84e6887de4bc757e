"""Repeated seeded runs and their summary statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import DEFAULT_MAX_STEPS, SelectionPolicy, run
from .model import Instance


@dataclass
class TrialStats:
    """Per-trial resample counts: ``counts[t, A]`` is N_A in trial ``t``."""

    counts: np.ndarray
    terminated: np.ndarray
    seed: int
    policy: str

    @property
    def trials(self) -> int:
        return self.counts.shape[0]

    @property
    def totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def mean(self) -> np.ndarray:
        return self.counts.mean(axis=0)

    def stderr(self) -> np.ndarray:
        if self.trials < 2:
            return np.zeros(self.counts.shape[1])
        return self.counts.std(axis=0, ddof=1) / math.sqrt(self.trials)

    def total_mean(self) -> float:
        return float(self.totals.mean())

    def total_stderr(self) -> float:
        if self.trials < 2:
            return 0.0
        return float(self.totals.std(ddof=1) / math.sqrt(self.trials))

    def summary(self, mu=None, z: float = 3.0) -> dict:
        """Report dict. With ``mu``, each event is checked against mean <= mu + z * SE."""
        mean, se = self.mean(), self.stderr()
        mx = self.counts.max(axis=0) if self.trials else np.zeros_like(mean)
        events = []
        for a in range(self.counts.shape[1]):
            row = {"event": a, "mean": float(mean[a]), "stderr": float(se[a]), "max": int(mx[a])}
            if mu is not None:
                row["mu"] = float(mu[a])
                row["within_bound"] = bool(mean[a] <= mu[a] + z * se[a])
            events.append(row)
        out = {
            "trials": self.trials,
            "seed": self.seed,
            "policy": self.policy,
            "nonterminated": int((~self.terminated).sum()),
            "mean_total_steps": self.total_mean(),
            "stderr_total_steps": self.total_stderr(),
            "events": events,
        }
        if mu is not None:
            total = math.fsum(mu)
            out["sum_mu"] = total
            out["total_within_bound"] = bool(self.total_mean() <= total + z * self.total_stderr())
        return out


def run_trials(
    instance: Instance,
    trials: int,
    seed: int = 0,
    policy: SelectionPolicy | str = SelectionPolicy.LOWEST_ID,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> TrialStats:
    """``trials`` independent runs; trial ``t`` uses the stream ``(seed, t)``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    counts = np.zeros((trials, instance.n_events), dtype=np.int64)
    term = np.zeros(trials, dtype=bool)
    for t in range(trials):
        log = run(instance, policy, seed, max_steps, trial=t)
        counts[t] = log.counts
        term[t] = log.terminated
    return TrialStats(counts, term, seed, SelectionPolicy(policy).value)
