"""Closed-form detection probabilities for majority and consensus voting.

All formulas are functions of the single miss probability ``eps`` of the
idealized channel (see :mod:`dgpvote.channel`), with false-alarm probability
``f = T eps / (N - T)``.

An ``(h, m)`` event means a fixed index was reported by ``h`` sensors and
missed by ``m`` sensors.  For consensus, the node's own report is counted
separately: ``hit`` means the node itself reported the index and ``miss``
means it did not.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import bisect
from scipy.special import logsumexp

from .channel import ChannelParams

__all__ = [
    "MixedParams",
    "VoteEvent",
    "DomainError",
    "DegenerateEventWarning",
    "detect_miss_fa",
    "majority_detect_prob",
    "majority_monotonicity_margin",
    "joint_event_prob",
    "consensus_prob_given_hit",
    "consensus_prob_given_miss",
    "lemma1_values",
    "lemma2_values",
    "Remark7Check",
    "remark7_check",
    "remark7_roots",
    "REMARK7_PARAMS",
    "corollary_limit_scan",
]

LOG_SPACE_THRESHOLD = 30


class DomainError(ValueError):
    """The conditioning event has probability zero for every ``eps`` nearby."""


class DegenerateEventWarning(RuntimeWarning):
    """The conditioning event has probability zero; the result is a convention."""


class VoteEvent(NamedTuple):
    h: int
    m: int


@dataclass(frozen=True)
class MixedParams:
    n: int
    t: int
    i_card: int
    j: int
    eps: float

    def __post_init__(self):
        if not 0 < self.t < self.n:
            raise ValueError(f"need 0 < T < N, got T={self.t}, N={self.n}")
        if self.i_card < 0 or self.j < 0 or self.i_card + self.j != self.t:
            raise ValueError(f"need T = I + J, got T={self.t}, I={self.i_card}, J={self.j}")
        _check_eps(self.n, self.t, self.eps)

    @property
    def f(self) -> float:
        return self.t * self.eps / (self.n - self.t)

    def rest(self, n_nodes: int) -> int:
        """Indices outside the joint part and all ``n_nodes`` individual parts."""
        left = self.n - self.j - n_nodes * self.i_card
        if left < 0:
            raise ValueError(
                f"N - J - {n_nodes} I = {left} < 0: individual parts cannot be disjoint"
            )
        return left


def _check_eps(n: int, t: int, eps: float) -> None:
    if not 0.0 <= eps <= (n - t) / n + 1e-15:
        raise ValueError(f"eps={eps} outside [0, (N-T)/N = {(n - t) / n}]")


def _check_event(h: int, m: int) -> None:
    if h < 0 or m < 0 or h + m < 1:
        raise ValueError(f"need h, m >= 0 and h + m >= 1, got h={h}, m={m}")


# A term is coef * prod(base ** power); zero-coefficient terms are dropped so
# that 0 ** -1 never appears (e.g. h * f ** (h - 1) with h = 0).
Term = tuple[float, Sequence[tuple[float, int]]]


def _eval_direct(terms: Sequence[Term]) -> float:
    total = 0.0
    for coef, factors in terms:
        if coef == 0:
            continue
        val = coef
        for base, power in factors:
            val *= base ** power
        total += val
    return total


def _eval_log(terms: Sequence[Term]) -> float:
    logs = []
    for coef, factors in terms:
        if coef == 0:
            continue
        acc = math.log(coef)
        for base, power in factors:
            if power == 0:
                continue
            if base == 0.0:
                acc = -math.inf
                break
            acc += power * math.log(base)
        logs.append(acc)
    if not logs:
        return -math.inf
    return float(logsumexp(logs))


def _ratio(num: Sequence[Term], den: Sequence[Term], order: int) -> float:
    if order > LOG_SPACE_THRESHOLD:
        log_den = _eval_log(den)
        if log_den == -math.inf:
            return _degenerate()
        return math.exp(_eval_log(num) - log_den)
    d = _eval_direct(den)
    if d == 0.0:
        return _degenerate()
    return _eval_direct(num) / d


def _degenerate() -> float:
    warnings.warn(
        "conditioning event has probability zero; returning 1 by convention",
        DegenerateEventWarning,
        stacklevel=3,
    )
    return 1.0


def detect_miss_fa(params) -> tuple[float, float, float]:
    """``(P(detect), P(miss), P(false alarm))`` of the idealized channel.

    ``params`` is anything with ``n``, ``t`` and ``eps`` attributes, e.g.
    :class:`~dgpvote.channel.ChannelParams` or :class:`MixedParams`.
    """
    n, t, eps = params.n, params.t, params.eps
    _check_eps(n, t, eps)
    return 1.0 - eps, eps, t * eps / (n - t)


def _dmf(n, t, eps):
    return detect_miss_fa(ChannelParams(n, t, eps))


def majority_detect_prob(n: int, t: int, j: int, eps: float, h: int, m: int) -> float:
    """Probability that an index with ``h`` hits and ``m`` misses is in the
    common support, for ``L = h + m`` sensors and ``J = T``.

    If the event is impossible (``eps = 0`` with ``m > 0`` and ``h > 0``) a
    :class:`DegenerateEventWarning` is emitted and 1.0 is returned.
    """
    if j != t:
        raise ValueError("the majority formula assumes the common model, J = T")
    _check_eps(n, t, eps)
    _check_event(h, m)
    f = t * eps / (n - t)
    joint = (j, [(1 - eps, h), (eps, m)])
    other = (n - j, [(f, h), (1 - f, m)])
    return _ratio([joint], [joint, other], h + m)


def majority_monotonicity_margin(n: int, t: int, j: int, eps: float, h: int, m: int) -> float:
    """``P(h, m) - P(h - 1, m + 1)``; non-negative over the valid ``eps`` range."""
    if h < 1:
        raise ValueError("need h >= 1")
    return (majority_detect_prob(n, t, j, eps, h, m)
            - majority_detect_prob(n, t, j, eps, h - 1, m + 1))


def _lemma3_terms(p: MixedParams, h: int, m: int, n_nodes: int) -> list[Term]:
    eps, f, n = p.eps, p.f, p.n
    ji, ii = p.j / n, p.i_card / n
    return [
        (ji, [(1 - eps, h), (eps, m)]),
        (h * ii, [(1 - eps, 1), (f, h - 1), (1 - f, m)]),
        (m * ii, [(eps, 1), (f, h), (1 - f, m - 1)]),
        (p.rest(n_nodes) / n, [(f, h), (1 - f, m)]),
    ]


def joint_event_prob(params: MixedParams, h: int, m: int) -> float:
    """Probability that ``h`` given nodes report an index and ``m`` others do not.

    The index is uniform over ``[0, N)``; the ``h + m`` nodes follow the mixed
    model with pairwise disjoint individual parts.
    """
    _check_event(h, m)
    terms = _lemma3_terms(params, h, m, h + m)
    if h + m > LOG_SPACE_THRESHOLD:
        return math.exp(_eval_log(terms))
    return _eval_direct(terms)


def consensus_prob_given_hit(params: MixedParams, h: int, m: int) -> float:
    """``P(i in T_p | p reports i, h neighbors report i, m neighbors do not)``."""
    if h < 0 or m < 0:
        raise ValueError("h and m must be non-negative")
    p = params
    eps, f = p.eps, p.f
    num = [
        (p.j / p.n, [(1 - eps, h + 1), (eps, m)]),
        (p.i_card / p.n, [(1 - eps, 1), (f, h), (1 - f, m)]),
    ]
    den = _lemma3_terms(p, h + 1, m, h + m + 1)
    return _ratio(num, den, h + m + 1)


def consensus_prob_given_miss(params: MixedParams, h: int, m: int) -> float:
    """``P(i in T_p | p misses i, h neighbors report i, m neighbors do not)``.

    Undefined at ``eps = 0``: a node holding ``i`` in its support cannot miss
    it, so :class:`DomainError` is raised.
    """
    if h < 1 or m < 0:
        raise ValueError(f"need h >= 1 and m >= 0, got h={h}, m={m}")
    p = params
    if p.eps == 0.0:
        raise DomainError("the miss branch is undefined at eps = 0")
    eps, f = p.eps, p.f
    num = [
        (p.j / p.n, [(1 - eps, h), (eps, m + 1)]),
        (p.i_card / p.n, [(eps, 1), (f, h), (1 - f, m)]),
    ]
    den = _lemma3_terms(p, h, m + 1, h + m + 1)
    return _ratio(num, den, h + m + 1)


def lemma1_values(n: int, t: int, eps: float, size_a: int, size_b: int) -> dict[str, float]:
    """Closed forms for a single node with ``A ⊆ T_p`` and ``B ⊆ T_p^c``.

    Keys: ``a_given_hat`` = P(i in A | i in T_hat), ``hat_given_a``,
    ``b_given_hat``, ``hat_given_b``.
    """
    p_det, _, p_fa = _dmf(n, t, eps)
    return {
        "a_given_hat": size_a / t * p_det,
        "hat_given_a": p_det,
        "b_given_hat": size_b / t * p_fa,
        "hat_given_b": p_fa,
    }


def lemma2_values(n: int, t: int, eps: float, h: int, m: int) -> dict[str, float]:
    """Closed forms of ``P(h given nodes hit, m given nodes miss | i in region)``.

    Regions: ``joint`` (inside J), ``hit_individual`` (inside the individual
    part of one hitting node), ``miss_individual`` (inside the individual part
    of one missing node) and ``outside`` (none of the above).
    """
    p_det, p_miss, p_fa = _dmf(n, t, eps)
    out = {
        "joint": p_det ** h * p_miss ** m,
        "outside": p_fa ** h * (1 - p_fa) ** m,
    }
    if h >= 1:
        out["hit_individual"] = p_det * p_fa ** (h - 1) * (1 - p_fa) ** m
    if m >= 1:
        out["miss_individual"] = p_miss * p_fa ** h * (1 - p_fa) ** (m - 1)
    return out


REMARK7_PARAMS = {"n": 1000, "t": 20, "j": 15, "i_card": 5}

# (formula, h, m) for the three ways an index enters the consensus output
# with two neighbors: all three report it, own + one neighbor, both neighbors only
_REMARK7_CASES = (("hit", 2, 0), ("hit", 1, 1), ("miss", 2, 0))


class Remark7Check(NamedTuple):
    holds: tuple[bool, bool, bool]
    margins: tuple[float, float, float]


def _remark7_margin(case: int, eps: float, params=REMARK7_PARAMS) -> float:
    kind, h, m = _REMARK7_CASES[case]
    p = MixedParams(params["n"], params["t"], params["i_card"], params["j"], eps)
    prob = consensus_prob_given_hit(p, h, m) if kind == "hit" else consensus_prob_given_miss(p, h, m)
    return prob - (1.0 - eps)


def _remark7_margin_unbounded(case: int, eps: float) -> float:
    # margins are rational in eps and stay finite beyond eps_max; evaluate
    # them on (0, 1) without the channel's range check
    kind, h, m = _REMARK7_CASES[case]
    n, t, j, i = (REMARK7_PARAMS[k] for k in ("n", "t", "j", "i_card"))
    f = t * eps / (n - t)
    rest = n - j - (h + m + 1) * i
    if kind == "hit":
        num = (1 - eps) ** (h + 1) * eps ** m * j + (1 - eps) * f ** h * (1 - f) ** m * i
        hh, mm = h + 1, m
    else:
        num = (1 - eps) ** h * eps ** (m + 1) * j + eps * f ** h * (1 - f) ** m * i
        hh, mm = h, m + 1
    den = (1 - eps) ** hh * eps ** mm * j + rest * f ** hh * (1 - f) ** mm
    if hh:
        den += hh * (1 - eps) * f ** (hh - 1) * (1 - f) ** mm * i
    if mm:
        den += mm * eps * f ** hh * (1 - f) ** (mm - 1) * i
    return num / den - (1.0 - eps)


def remark7_check(eps: float, tol: float = 1e-12) -> Remark7Check:
    """Compare the three consensus entry probabilities against ``1 - eps``.

    Uses N = 1000, T = 20, J = 15, I = 5 and two neighbors.  An inequality
    holds when its margin is at least ``-tol``; the margins are exactly zero
    at ``eps = 0.98``.
    """
    margins = tuple(_remark7_margin(k, eps) for k in range(3))
    return Remark7Check(tuple(mg >= -tol for mg in margins), margins)


def remark7_roots(grid_step: float = 1e-4, xtol: float = 1e-9) -> dict[int, list[float]]:
    """Sign changes of the three margins on ``(0, 1)``, refined by bisection.

    Keys are 1, 2, 3 in the order (all three report), (own + one neighbor),
    (both neighbors only).
    """
    grid = np.arange(grid_step, 1.0, grid_step)
    roots: dict[int, list[float]] = {}
    for case in range(3):
        fn = lambda e, c=case: _remark7_margin_unbounded(c, e)
        vals = np.array([fn(e) for e in grid])
        found = []
        for k in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
            found.append(bisect(fn, grid[k], grid[k + 1], xtol=xtol))
        for k in np.flatnonzero(vals == 0.0):
            found.append(float(grid[k]))
        roots[case + 1] = sorted(found)
    return roots


def corollary_limit_scan(
    eps: float,
    n_list: Sequence[int],
    t_of_n: Callable[[int], int] = lambda n: math.ceil(math.sqrt(n)),
    j_of_t: Callable[[int], int] = lambda t: math.ceil(3 * t / 4),
) -> list[dict]:
    """Evaluate the consensus hit (h=1, m=0) and miss (h=2, m=0) branches
    along a sequence of growing ``N``.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    rows = []
    for n in n_list:
        t = t_of_n(n)
        j = j_of_t(t)
        if j < 1:
            raise ValueError("the limit needs a non-empty joint part, J >= 1")
        p = MixedParams(n, t, t - j, j, eps)
        rows.append({
            "n": n, "t": t, "j": j,
            "hit": consensus_prob_given_hit(p, 1, 0),
            "miss": consensus_prob_given_miss(p, 2, 0),
        })
    return rows
