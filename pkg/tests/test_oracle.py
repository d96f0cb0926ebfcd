import itertools
import math

import numpy as np
import pytest

from dgpvote import analysis as an
from dgpvote.oracle import (
    OracleLimitError,
    block_layout,
    brute_force_event_prob,
    default_oracle_suite,
    exact_small_oracle,
    inclusion_marginals,
    run_oracle_suite,
    sensor_output_distribution,
)


@pytest.mark.parametrize("n,t,eps", [(8, 2, 0.25), (10, 3, 0.5), (12, 3, 0.1), (6, 1, 0.8)])
def test_distribution_is_normalized_and_sized(n, t, eps):
    dist = sensor_output_distribution(n, range(t), eps)
    assert math.fsum(w for _, w in dist) == pytest.approx(1.0, abs=1e-14)
    assert all(len(s) == t for s, _ in dist)
    assert len({s for s, _ in dist}) == len(dist)


@pytest.mark.parametrize("eps", [0.0, 0.1, 0.25, 0.5, 0.7])
def test_enumerated_marginals_follow_definition(eps):
    n, t = 9, 3
    q = inclusion_marginals(n, [1, 4, 6], eps)
    inside = np.isin(np.arange(n), [1, 4, 6])
    np.testing.assert_allclose(q[inside], 1 - eps, atol=1e-14)
    np.testing.assert_allclose(q[~inside], t * eps / (n - t), atol=1e-14)


def test_limits_enforced():
    lay = block_layout(14, 2, 2, 2)
    with pytest.raises(OracleLimitError):
        exact_small_oracle(14, 2, 0.1, lay, 1, 1, "majority")
    lay = block_layout(12, 4, 4, 2)
    with pytest.raises(OracleLimitError):
        exact_small_oracle(12, 4, 0.1, lay, 1, 1, "majority")
    lay = block_layout(12, 2, 1, 5)
    with pytest.raises(OracleLimitError):
        exact_small_oracle(12, 2, 0.1, lay, 2, 2, "consensus_hit")


@pytest.mark.parametrize("hit,miss", [([0, 1], [2]), ([0], [1, 2]), ([1, 2], [0])])
def test_product_route_matches_full_joint_enumeration(hit, miss):
    n, t, eps = 8, 2, 0.25
    lay = block_layout(n, t, 1, 3)
    q = [inclusion_marginals(n, s, eps) for s in lay.per_sensor]
    w = np.ones(n)
    for p in hit:
        w *= q[p]
    for p in miss:
        w *= 1 - q[p]
    assert brute_force_event_prob(n, t, eps, lay, hit, miss) == pytest.approx(w.sum() / n, abs=1e-12)
    tgt = lay.per_sensor[0]
    assert brute_force_event_prob(n, t, eps, lay, hit, miss, target=tgt) == pytest.approx(
        w[tgt].sum() / w.sum(), abs=1e-12)


def test_lemma1_every_subset():
    n, t, eps = 8, 2, 0.25
    lay = block_layout(n, t, 2, 1)
    ref = an.lemma1_values(n, t, eps, 1, 1)
    truth = [0, 1]
    comp = list(range(2, 8))
    for r_a in (1, 2):
        for a in itertools.combinations(truth, r_a):
            for r_b in (1, 2, 3):
                for b in itertools.combinations(comp, r_b):
                    got = exact_small_oracle(n, t, eps, lay, 1, 0, "lemma1", subset_a=a, subset_b=b)
                    want = an.lemma1_values(n, t, eps, len(a), len(b))
                    for k in want:
                        assert got[k] == pytest.approx(want[k], abs=1e-12)
    assert ref["hat_given_a"] == 0.75


def test_lemma2_factorizes_per_index():
    n, t, eps, h, m = 10, 2, 0.3, 2, 1
    lay = block_layout(n, t, 1, h + m)
    got = exact_small_oracle(n, t, eps, lay, h, m, "lemma2")
    want = an.lemma2_values(n, t, eps, h, m)
    assert set(got) == set(want) == {"joint", "hit_individual", "miss_individual", "outside"}
    for k in want:
        assert got[k] == pytest.approx(want[k], abs=1e-12)


def test_zero_probability_condition_is_nan():
    lay = block_layout(8, 2, 2, 3)
    assert math.isnan(exact_small_oracle(8, 2, 0.0, lay, 2, 1, "majority"))


def test_suite_covers_every_condition():
    cases = default_oracle_suite(12)
    assert len(cases) >= 20
    assert {c.condition.value for c in cases} == {
        "majority", "joint", "consensus_hit", "consensus_miss", "lemma1", "lemma2"}
    assert {c.eps for c in cases} == {0.1, 0.25, 0.5}
    assert max(c.n for c in cases) <= 12 and max(c.t for c in cases) <= 3


def test_suite_passes_and_perturbation_fails():
    rows = run_oracle_suite(max_n=10)
    assert max(r[3] for r in rows) < 1e-12
    rows = run_oracle_suite(max_n=10, perturb=lambda v: v + 1e-8)
    assert all(r[3] > 1e-10 for r in rows)
