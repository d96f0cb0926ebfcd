"""Democratic voting over support-set estimates.

``majority`` is the fusion-center rule that keeps the ``J`` most voted
indices.  ``consensus`` is the local rule that keeps indices seen by at least
two of {own estimate, neighbor estimates}, capped at ``T`` indices.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .pursuit import top_k

__all__ = [
    "NeighborSet",
    "new_tally",
    "vote1",
    "max_indices",
    "majority",
    "consensus",
    "consensus_candidates",
    "pairwise_intersection_union",
]


@dataclass
class NeighborSet:
    """Incoming neighbors of one node."""

    node: int
    members: list[int]

    def __post_init__(self):
        if self.node in self.members:
            raise ValueError("a node cannot be its own neighbor")

    @property
    def num_neighbors(self) -> int:
        return len(self.members)


def new_tally(n: int) -> np.ndarray:
    return np.zeros(n, dtype=np.int64)


def vote1(z: np.ndarray, s) -> np.ndarray:
    """Add one vote to ``z[i]`` for every ``i`` in ``s`` (in place); return ``z``."""
    s = np.asarray(s, dtype=np.int64)
    if s.size:
        if s.min() < 0 or s.max() >= z.size:
            raise IndexError(f"support index out of range for N={z.size}")
        z[s] += 1
    return z


def max_indices(z: np.ndarray, k: int) -> np.ndarray:
    """The ``k`` indices with most votes, ties toward the lower index."""
    if k > z.size:
        raise ValueError(f"k={k} exceeds N={z.size}")
    return top_k(np.asarray(z), k)


def _universe(sets: Sequence, n: int | None) -> int:
    if n is not None:
        return n
    top = max((int(np.max(s)) for s in sets if len(s)), default=-1)
    return top + 1


def _tally(sets: Sequence, n: int) -> np.ndarray:
    z = new_tally(n)
    for s in sets:
        vote1(z, s)
    return z


def majority(estimates: Sequence, j: int, n: int | None = None) -> np.ndarray:
    """Fusion-center majority vote returning exactly ``j`` indices.

    ``n`` is the signal dimension; it defaults to one past the largest index
    seen, which only matters when ``j`` exceeds the number of voted indices.
    """
    if j < 1:
        raise ValueError("j must be at least 1")
    n = max(_universe(estimates, n), j)
    return max_indices(_tally(estimates, n), j)


def consensus_candidates(own, neighbors: Sequence, n: int | None = None) -> np.ndarray:
    """Indices with at least two votes, before any truncation."""
    sets = [own, *neighbors]
    z = _tally(sets, _universe(sets, n))
    return np.flatnonzero(z >= 2)


def consensus(own, neighbors: Sequence, t: int, n: int | None = None) -> np.ndarray:
    """Local consensus: indices with two or more votes, at most ``t`` of them.

    When more than ``t`` indices qualify, the ``t`` with the highest vote
    count are kept, ties toward the lower index.
    """
    sets = [own, *neighbors]
    z = _tally(sets, _universe(sets, n))
    cand = np.flatnonzero(z >= 2)
    if cand.size <= t:
        return cand
    return cand[top_k(z[cand], t)]


def pairwise_intersection_union(estimates: Sequence) -> np.ndarray:
    """Union over all pairs ``a < b`` of ``estimates[a] ∩ estimates[b]``."""
    if len(estimates) < 2:
        raise ValueError("need at least two estimates")
    out = np.empty(0, dtype=np.int64)
    for a, b in combinations(estimates, 2):
        out = np.union1d(out, np.intersect1d(a, b))
    return out.astype(np.int64)
