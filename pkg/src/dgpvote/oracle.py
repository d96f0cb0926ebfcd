"""Exact enumeration of idealized-channel outcomes on tiny instances.

Used to check the closed forms in :mod:`dgpvote.analysis` by a route that
never touches them: every sensor's output distribution is built by listing
all ``(k, dropped subset, added subset)`` triples with their exact weights,
and conditional probabilities are then summed index by index.  The index
``i`` is uniform over ``[0, N)`` and the support layout is held fixed, which
is the setting the closed forms describe.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .sigmodel import SupportLayout

__all__ = [
    "OracleCondition",
    "OracleLimitError",
    "sensor_output_distribution",
    "inclusion_marginals",
    "exact_small_oracle",
    "brute_force_event_prob",
    "block_layout",
    "OracleCase",
    "default_oracle_suite",
    "run_oracle_suite",
]

MAX_N = 12
MAX_T = 3
MAX_NODES = 4


class OracleCondition(str, enum.Enum):
    MAJORITY = "majority"
    CONSENSUS_HIT = "consensus_hit"
    CONSENSUS_MISS = "consensus_miss"
    JOINT = "joint"
    LEMMA1 = "lemma1"
    LEMMA2 = "lemma2"


class OracleLimitError(ValueError):
    """Instance too large to enumerate under the configured limits."""


def _binom_pmf(t: int, k: int, eps: float) -> float:
    return math.comb(t, k) * eps ** k * (1 - eps) ** (t - k)


def sensor_output_distribution(n: int, support, eps: float) -> list[tuple[frozenset, float]]:
    """All channel outputs for one sensor with their probabilities.

    ``k`` true indices are dropped and ``k`` outside indices added, with
    ``k ~ Binomial(T, eps)`` and both subsets uniform given ``k``.
    """
    truth = sorted(int(i) for i in support)
    t = len(truth)
    comp = [i for i in range(n) if i not in set(truth)]
    out = []
    for k in range(t + 1):
        pk = _binom_pmf(t, k, eps)
        if pk == 0.0:
            continue
        n_ways = math.comb(t, k) * math.comb(len(comp), k)
        if n_ways == 0:
            continue
        w = pk / n_ways
        for drop in itertools.combinations(truth, k):
            kept = [i for i in truth if i not in drop]
            for add in itertools.combinations(comp, k):
                out.append((frozenset(kept).union(add), w))
    return out


def inclusion_marginals(n: int, support, eps: float) -> np.ndarray:
    """``P(i in estimate)`` for every index, summed over the enumeration."""
    q = np.zeros(n)
    for s, w in sensor_output_distribution(n, support, eps):
        q[list(s)] += w
    return q


def _check_limits(n: int, t: int, n_nodes: int, max_n: int) -> None:
    if n > max_n or t > MAX_T or n_nodes > MAX_NODES:
        raise OracleLimitError(
            f"enumeration limited to N <= {max_n}, T <= {MAX_T}, {MAX_NODES} nodes; "
            f"got N={n}, T={t}, {n_nodes} nodes"
        )


def _pattern_weights(q: list[np.ndarray], hit: list[int], miss: list[int]) -> np.ndarray:
    w = np.ones_like(q[0])
    for p in hit:
        w = w * q[p]
    for p in miss:
        w = w * (1.0 - q[p])
    return w


def _region_mean(w: np.ndarray, region) -> float:
    region = np.asarray(sorted(region), dtype=np.int64)
    if region.size == 0:
        raise ValueError("empty region")
    return float(w[region].mean())


def _ratio(w: np.ndarray, target) -> float:
    den = float(w.sum())
    if den == 0.0:
        return float("nan")
    return float(w[np.asarray(sorted(target), dtype=np.int64)].sum()) / den


def exact_small_oracle(
    n: int,
    t: int,
    eps: float,
    layout: SupportLayout,
    h: int,
    m: int,
    condition: OracleCondition | str,
    subset_a=None,
    subset_b=None,
    max_n: int = MAX_N,
):
    """Exact probability of ``condition`` on a fixed layout.

    Node roles are positional: for ``majority`` and ``joint`` nodes
    ``0..h-1`` hit and ``h..h+m-1`` miss.  For the consensus conditions node
    0 is the voting node and nodes ``1..h`` hit, ``h+1..h+m`` miss.  For
    ``lemma2`` nodes ``0..h-1`` hit and ``h..h+m-1`` miss, and a dict keyed
    by region is returned.  ``lemma1`` looks at node 0 only and returns a dict
    over subsets ``subset_a`` of its support and ``subset_b`` of the
    complement.

    Returns NaN where the conditioning event has probability zero.
    """
    condition = OracleCondition(condition)
    consensus = condition in (OracleCondition.CONSENSUS_HIT, OracleCondition.CONSENSUS_MISS)
    n_nodes = h + m + 1 if consensus else max(h + m, 1)
    if layout.n_sensors < n_nodes:
        raise ValueError(f"layout has {layout.n_sensors} sensors, need {n_nodes}")
    _check_limits(n, t, n_nodes, max_n)
    supports = layout.per_sensor[:n_nodes]
    if any(len(s) != t for s in supports):
        raise ValueError("every sensor support must have T indices")
    q = [inclusion_marginals(n, s, eps) for s in supports]

    if condition is OracleCondition.LEMMA1:
        truth = set(int(i) for i in supports[0])
        a = sorted(truth)[: max(1, t - 1)] if subset_a is None else sorted(subset_a)
        comp = [i for i in range(n) if i not in truth]
        b = comp[:2] if subset_b is None else sorted(subset_b)
        if not set(a) <= truth or set(b) & truth:
            raise ValueError("need A inside and B outside the node's support")
        p_hat = float(q[0].sum()) / n
        return {
            "a_given_hat": float(q[0][a].sum()) / n / p_hat,
            "hat_given_a": _region_mean(q[0], a),
            "b_given_hat": float(q[0][b].sum()) / n / p_hat,
            "hat_given_b": _region_mean(q[0], b),
        }

    if condition is OracleCondition.MAJORITY:
        w = _pattern_weights(q, list(range(h)), list(range(h, h + m)))
        return _ratio(w, layout.joint)

    if condition is OracleCondition.JOINT:
        w = _pattern_weights(q, list(range(h)), list(range(h, h + m)))
        return float(w.sum()) / n

    if condition is OracleCondition.LEMMA2:
        w = _pattern_weights(q, list(range(h)), list(range(h, h + m)))
        used = set(int(i) for i in layout.joint)
        for p in range(h + m):
            used |= set(int(i) for i in layout.individual[p])
        out = {}
        if len(layout.joint):
            out["joint"] = _region_mean(w, layout.joint)
        if h >= 1 and len(layout.individual[0]):
            out["hit_individual"] = _region_mean(w, layout.individual[0])
        if m >= 1 and len(layout.individual[h]):
            out["miss_individual"] = _region_mean(w, layout.individual[h])
        rest = [i for i in range(n) if i not in used]
        if rest:
            out["outside"] = _region_mean(w, rest)
        return out

    hit = list(range(1, h + 1))
    miss = list(range(h + 1, h + m + 1))
    if condition is OracleCondition.CONSENSUS_HIT:
        hit = [0] + hit
    else:
        miss = [0] + miss
    w = _pattern_weights(q, hit, miss)
    return _ratio(w, supports[0])


def brute_force_event_prob(
    n: int, t: int, eps: float, layout: SupportLayout, hit: list[int], miss: list[int],
    target=None,
) -> float:
    """Same quantities as :func:`exact_small_oracle` without assuming
    independence across sensors: the joint output distribution is the full
    product of per-sensor distributions.

    With ``target`` given, returns ``P(i in target | pattern)``; otherwise the
    unconditional pattern probability for a uniform ``i``.
    """
    nodes = sorted(set(hit) | set(miss))
    _check_limits(n, t, len(nodes), MAX_N)
    dists = {p: sensor_output_distribution(n, layout.per_sensor[p], eps) for p in nodes}
    tgt = set() if target is None else set(int(i) for i in target)
    num = den = 0.0
    for combo in itertools.product(*(dists[p] for p in nodes)):
        w = math.prod(c[1] for c in combo)
        sets = {p: c[0] for p, c in zip(nodes, combo)}
        for i in range(n):
            if all(i in sets[p] for p in hit) and all(i not in sets[p] for p in miss):
                den += w
                if i in tgt:
                    num += w
    if target is None:
        return den / n
    return num / den if den else float("nan")


def block_layout(n: int, t: int, j: int, n_nodes: int) -> SupportLayout:
    """Deterministic layout: joint part ``0..J-1`` then consecutive blocks."""
    i_card = t - j
    if j + n_nodes * i_card > n:
        raise ValueError("individual parts do not fit")
    joint = np.arange(j, dtype=np.int64)
    individual = [np.arange(j + p * i_card, j + (p + 1) * i_card, dtype=np.int64)
                  for p in range(n_nodes)]
    return SupportLayout(joint, individual)


@dataclass(frozen=True)
class OracleCase:
    name: str
    n: int
    t: int
    j: int
    eps: float
    h: int
    m: int
    condition: OracleCondition


def default_oracle_suite(max_n: int = 10) -> list[OracleCase]:
    """A fixed list of small instances covering every condition.

    ``max_n`` up to 12 adds larger instances.
    """
    cases = []
    sizes = [(8, 2), (10, 2), (9, 3)]
    if max_n >= 12:
        sizes += [(12, 3), (11, 2)]
    sizes = [(n, t) for n, t in sizes if n <= max_n]
    for n, t in sizes:
        for eps in (0.1, 0.25, 0.5):
            for h, m in ((1, 0), (2, 1), (1, 2)):
                cases.append(OracleCase(f"majority-{n}-{t}-{eps}-{h}{m}", n, t, t, eps, h, m,
                                        OracleCondition.MAJORITY))
            j = t - 1
            for h, m in ((1, 1), (2, 0), (0, 1)):
                if j + (h + m + 1) * (t - j) <= n:
                    cases.append(OracleCase(f"joint-{n}-{t}-{eps}-{h}{m}", n, t, j, eps, h, m,
                                            OracleCondition.JOINT))
            for h, m in ((0, 0), (1, 0), (2, 0), (1, 1)):
                cases.append(OracleCase(f"hit-{n}-{t}-{eps}-{h}{m}", n, t, j, eps, h, m,
                                        OracleCondition.CONSENSUS_HIT))
            for h, m in ((1, 0), (2, 0), (1, 1)):
                cases.append(OracleCase(f"miss-{n}-{t}-{eps}-{h}{m}", n, t, j, eps, h, m,
                                        OracleCondition.CONSENSUS_MISS))
            cases.append(OracleCase(f"lemma1-{n}-{t}-{eps}", n, t, j, eps, 1, 0,
                                    OracleCondition.LEMMA1))
            cases.append(OracleCase(f"lemma2-{n}-{t}-{eps}", n, t, j, eps, 1, 1,
                                    OracleCondition.LEMMA2))
    return cases


def _closed_form(case: OracleCase):
    from . import analysis as an

    p = an.MixedParams(case.n, case.t, case.t - case.j, case.j, case.eps)
    c = case.condition
    if c is OracleCondition.MAJORITY:
        return an.majority_detect_prob(case.n, case.t, case.j, case.eps, case.h, case.m)
    if c is OracleCondition.JOINT:
        return an.joint_event_prob(p, case.h, case.m)
    if c is OracleCondition.CONSENSUS_HIT:
        return an.consensus_prob_given_hit(p, case.h, case.m)
    if c is OracleCondition.CONSENSUS_MISS:
        return an.consensus_prob_given_miss(p, case.h, case.m)
    if c is OracleCondition.LEMMA1:
        return an.lemma1_values(case.n, case.t, case.eps, max(1, case.t - 1), 2)
    return an.lemma2_values(case.n, case.t, case.eps, case.h, case.m)


def _case_oracle(case: OracleCase, max_n: int):
    c = case.condition
    consensus = c in (OracleCondition.CONSENSUS_HIT, OracleCondition.CONSENSUS_MISS)
    n_nodes = case.h + case.m + 1 if consensus else max(case.h + case.m, 1)
    layout = block_layout(case.n, case.t, case.j, n_nodes)
    return exact_small_oracle(case.n, case.t, case.eps, layout, case.h, case.m, c, max_n=max_n)


def run_oracle_suite(
    cases: list[OracleCase] | None = None,
    max_n: int = MAX_N,
    perturb: Callable[[float], float] | None = None,
) -> list[tuple[str, float, float, float]]:
    """Compare each closed form with the enumeration.

    Returns ``(name, closed_form, oracle, abs_error)`` rows; dict-valued
    conditions are expanded to one row per key.  ``perturb`` is applied to
    every closed-form value and exists for negative-control runs.
    """
    cases = default_oracle_suite(max_n) if cases is None else cases
    rows = []
    for case in cases:
        ref = _closed_form(case)
        got = _case_oracle(case, max_n)
        pairs = [(k, ref[k], got[k]) for k in got] if isinstance(got, dict) else [("", ref, got)]
        for key, r, g in pairs:
            if perturb is not None:
                r = perturb(r)
            name = f"{case.name}:{key}" if key else case.name
            rows.append((name, float(r), float(g), abs(float(r) - float(g))))
    return rows
