"""Idealized single-parameter model of a greedy pursuit's support estimate.

A sensor holding true support ``T`` (``|T| = T``) reports ``T_hat`` with

* ``P(i in T_hat | i in T)   = 1 - eps``  (detect)
* ``P(i in T_hat | i not in T) = T eps / (N - T)``  (false alarm)
* ``|T_hat| = T`` always.

Misses are replaced one-for-one by false alarms: ``k ~ Binomial(T, eps)``
true indices are dropped uniformly at random and ``k`` indices of the
complement are added uniformly at random.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sigmodel import as_support

__all__ = [
    "ChannelParams",
    "ConfusionCounts",
    "ideal_channel",
    "estimate_epsilon",
    "tally_confusion",
    "false_alarm_prob",
]


def false_alarm_prob(n: int, t: int, eps: float) -> float:
    return t * eps / (n - t)


@dataclass(frozen=True)
class ChannelParams:
    n: int
    t: int
    eps: float

    def __post_init__(self):
        if not 0 < self.t < self.n:
            raise ValueError(f"need 0 < T < N, got T={self.t}, N={self.n}")
        if not 0.0 <= self.eps <= self.eps_max + 1e-15:
            raise ValueError(f"eps={self.eps} outside [0, (N-T)/N = {self.eps_max}]")

    @property
    def eps_max(self) -> float:
        return (self.n - self.t) / self.n

    @property
    def p_false_alarm(self) -> float:
        return false_alarm_prob(self.n, self.t, self.eps)


@dataclass(frozen=True)
class ConfusionCounts:
    detects: int = 0
    misses: int = 0
    false_alarms: int = 0
    trials: int = 0

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.detects + other.detects,
            self.misses + other.misses,
            self.false_alarms + other.false_alarms,
            self.trials + other.trials,
        )


def ideal_channel(truth, params: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    """Pass ``truth`` through the idealized channel and return the estimate."""
    truth = as_support(truth, params.n)
    if truth.size != params.t:
        raise ValueError(f"truth has {truth.size} indices, expected T={params.t}")
    k = int(rng.binomial(params.t, params.eps))
    if k == 0:
        return truth.copy()
    dropped = rng.choice(truth, size=k, replace=False)
    outside = np.ones(params.n, dtype=bool)
    outside[truth] = False
    added = rng.choice(np.flatnonzero(outside), size=k, replace=False)
    kept = np.setdiff1d(truth, dropped, assume_unique=True)
    return np.sort(np.concatenate([kept, added]))


def tally_confusion(truth, estimate, acc: ConfusionCounts | None = None) -> ConfusionCounts:
    """Add one (truth, estimate) pair to ``acc``."""
    truth = np.asarray(truth)
    estimate = np.asarray(estimate)
    hit = int(np.isin(estimate, truth, assume_unique=True).sum())
    step = ConfusionCounts(hit, truth.size - hit, estimate.size - hit, 1)
    return step if acc is None else acc + step


def estimate_epsilon(counts: ConfusionCounts, n: int, t: int | None = None) -> float:
    """False-alarm estimate ``FA / (T * trials)``, clamped to ``[0, (N-T)/N]``.

    ``t`` defaults to ``(detects + misses) / trials``.
    """
    if counts.trials < 1:
        raise ValueError("need at least one trial")
    if t is None:
        t = (counts.detects + counts.misses) // counts.trials
    eps = counts.false_alarms / (t * counts.trials)
    return float(min(max(eps, 0.0), (n - t) / n))
