import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dgpvote import analysis as an
from dgpvote.channel import ChannelParams
from dgpvote.oracle import block_layout, exact_small_oracle

from . import _rational as rat

P = an.MixedParams(1000, 20, 5, 15, 0.3)


# -- frozen values, each first computed with exact rationals ------------------

def test_frozen_values_against_rationals():
    cases = [
        (an.majority_detect_prob(1000, 20, 20, 0.5, 2, 1), rat.majority(1000, 20, Fraction(1, 2), 2, 1)),
        (an.consensus_prob_given_hit(P, 1, 0), rat.hit(1000, 20, 15, Fraction(3, 10), 1, 0)),
        (an.consensus_prob_given_miss(P, 2, 0), rat.miss(1000, 20, 15, Fraction(3, 10), 2, 0)),
    ]
    for got, exact in cases:
        assert got == pytest.approx(float(exact), abs=1e-14)


def test_frozen_spot_values():
    assert an.majority_detect_prob(1000, 20, 20, 0.5, 2, 1) == pytest.approx(0.9611689351, abs=1e-9)
    assert an.consensus_prob_given_hit(P, 1, 0) == pytest.approx(0.9921964346, abs=1e-9)
    assert an.consensus_prob_given_miss(P, 2, 0) == pytest.approx(0.9655257040, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(
    eps=st.fractions(0, Fraction(49, 50)).filter(lambda e: e > 0),
    h=st.integers(1, 6),
    m=st.integers(0, 6),
)
def test_formulas_match_rationals(eps, h, m):
    e = float(eps)
    assert an.majority_detect_prob(1000, 20, 20, e, h, m) == pytest.approx(
        float(rat.majority(1000, 20, eps, h, m)), rel=1e-11, abs=1e-13)
    p = an.MixedParams(1000, 20, 5, 15, e)
    assert an.consensus_prob_given_hit(p, h, m) == pytest.approx(
        float(rat.hit(1000, 20, 15, eps, h, m)), rel=1e-11, abs=1e-13)
    assert an.consensus_prob_given_miss(p, h, m) == pytest.approx(
        float(rat.miss(1000, 20, 15, eps, h, m)), rel=1e-11, abs=1e-13)


# -- channel marginals ---------------------------------------------------------

def test_detect_miss_fa():
    assert an.detect_miss_fa(ChannelParams(1000, 20, 0.0)) == (1.0, 0.0, 0.0)
    d, _, _ = an.detect_miss_fa(ChannelParams(1000, 20, 0.98))
    assert d == pytest.approx(0.02)
    assert an.detect_miss_fa(ChannelParams(1000, 20, 0.49))[2] == pytest.approx(0.01)
    assert an.detect_miss_fa(P) == pytest.approx((0.7, 0.3, 20 * 0.3 / 980))


# -- majority ---------------------------------------------------------------

@settings(max_examples=100, deadline=None)
@given(eps=st.floats(0, 0.98))
def test_single_hit_is_detect_prob(eps):
    assert an.majority_detect_prob(1000, 20, 20, eps, 1, 0) == pytest.approx(1 - eps, abs=1e-12)


def test_worst_case_endpoint():
    for h, m in [(1, 0), (2, 1), (3, 7), (5, 5)]:
        assert an.majority_detect_prob(1000, 20, 20, 0.98, h, m) == pytest.approx(0.02, abs=1e-12)


def test_majority_needs_common_model():
    with pytest.raises(ValueError):
        an.majority_detect_prob(1000, 20, 15, 0.3, 1, 0)
    with pytest.raises(ValueError):
        an.majority_detect_prob(1000, 20, 20, 0.99, 1, 0)
    with pytest.raises(ValueError):
        an.majority_detect_prob(1000, 20, 20, 0.3, 0, 0)


def test_degenerate_event_flagged():
    with pytest.warns(an.DegenerateEventWarning):
        assert an.majority_detect_prob(1000, 20, 20, 0.0, 2, 1) == 1.0


def test_monotonicity_margin_example():
    assert an.majority_monotonicity_margin(1000, 20, 20, 0.2, 1, 0) > 0
    with pytest.raises(ValueError):
        an.majority_monotonicity_margin(1000, 20, 20, 0.2, 0, 1)


@settings(max_examples=200, deadline=None)
@given(eps=st.floats(0.001, 0.98), h=st.integers(1, 8), m=st.integers(0, 8))
def test_monotonicity_property(eps, h, m):
    assert an.majority_monotonicity_margin(1000, 20, 20, eps, h, m) >= -1e-12


def test_log_space_matches_direct(monkeypatch):
    vals = [an.majority_detect_prob(1000, 20, 20, 0.4, 12, 10),
            an.consensus_prob_given_hit(P, 10, 8), an.consensus_prob_given_miss(P, 9, 9)]
    monkeypatch.setattr(an, "LOG_SPACE_THRESHOLD", 0)
    logs = [an.majority_detect_prob(1000, 20, 20, 0.4, 12, 10),
            an.consensus_prob_given_hit(P, 10, 8), an.consensus_prob_given_miss(P, 9, 9)]
    np.testing.assert_allclose(vals, logs, rtol=1e-12)


def test_large_event_counts_stay_finite():
    v = an.majority_detect_prob(1000, 20, 20, 0.01, 200, 150)
    assert 0.0 <= v <= 1.0 and math.isfinite(v)


# -- mixed model --------------------------------------------------------------

def test_mixed_params_validation():
    with pytest.raises(ValueError):
        an.MixedParams(1000, 20, 5, 14, 0.3)
    with pytest.raises(ValueError):
        an.MixedParams(1000, 20, 5, 15, 0.99)
    p = an.MixedParams(30, 10, 5, 5, 0.1)
    with pytest.raises(ValueError):
        an.consensus_prob_given_hit(p, 4, 1)  # 5 + 6*5 > 30


def test_joint_event_collapses_to_support_fraction():
    for eps in (0.0, 0.2, 0.6, 0.98):
        p = an.MixedParams(1000, 20, 0, 20, eps)
        assert an.joint_event_prob(p, 1, 0) == pytest.approx(20 / 1000, abs=1e-15)


def test_joint_event_at_zero_eps():
    # common model: with no misses possible, any pattern with a miss and a hit is impossible
    p = an.MixedParams(1000, 20, 0, 20, 0.0)
    assert an.joint_event_prob(p, 1, 1) == 0.0
    assert an.joint_event_prob(p, 3, 2) == 0.0
    # mixed model: an index in a hitting node's individual part still fits (1, 1)
    p = an.MixedParams(1000, 20, 5, 15, 0.0)
    assert an.joint_event_prob(p, 1, 1) == pytest.approx(5 / 1000)
    lay = block_layout(9, 3, 2, 2)
    ref = exact_small_oracle(9, 3, 0.0, lay, 1, 1, "joint")
    assert an.joint_event_prob(an.MixedParams(9, 3, 1, 2, 0.0), 1, 1) == pytest.approx(ref, abs=1e-15)


def test_joint_event_small_instance_vs_oracle():
    p = an.MixedParams(8, 2, 1, 1, 0.25)
    lay = block_layout(8, 2, 1, 2)
    ref = exact_small_oracle(8, 2, 0.25, lay, 1, 1, "joint")
    assert an.joint_event_prob(p, 1, 1) == pytest.approx(ref, abs=1e-12)


def test_hit_branch_no_neighbors_is_single_sensor_posterior():
    for eps in (0.1, 0.25, 0.5):
        p = an.MixedParams(10, 3, 1, 2, eps)
        lay = block_layout(10, 3, 2, 1)
        ref = exact_small_oracle(10, 3, eps, lay, 0, 0, "consensus_hit")
        assert an.consensus_prob_given_hit(p, 0, 0) == pytest.approx(ref, abs=1e-12)
        assert ref == pytest.approx(1 - eps, abs=1e-12)


def test_majority_vs_oracle_spot():
    lay = block_layout(10, 2, 2, 3)
    ref = exact_small_oracle(10, 2, 0.3, lay, 2, 1, "majority")
    assert an.majority_detect_prob(10, 2, 2, 0.3, 2, 1) == pytest.approx(ref, abs=1e-12)


def test_miss_branch_vs_oracle_spot():
    p = an.MixedParams(9, 3, 1, 2, 0.25)
    lay = block_layout(9, 3, 2, 3)
    ref = exact_small_oracle(9, 3, 0.25, lay, 2, 0, "consensus_miss")
    assert an.consensus_prob_given_miss(p, 2, 0) == pytest.approx(ref, abs=1e-12)


def test_miss_branch_undefined_at_zero():
    with pytest.raises(an.DomainError):
        an.consensus_prob_given_miss(an.MixedParams(1000, 20, 5, 15, 0.0), 2, 0)
    with pytest.raises(ValueError):
        an.consensus_prob_given_miss(P, 0, 1)


def test_small_eps_limits():
    p = an.MixedParams(1000, 20, 5, 15, 1e-9)
    assert an.consensus_prob_given_hit(p, 1, 0) == pytest.approx(1.0, abs=1e-7)
    assert an.consensus_prob_given_miss(p, 3, 0) == pytest.approx(1.0, abs=1e-7)
    # with two neighbor hits the false-alarm term is first order in eps, so
    # at fixed N the limit is J / (J + 2 T I / (N - T)) rather than one
    limit = 15 / (15 + 2 * 20 * 5 / 980)
    assert an.consensus_prob_given_miss(p, 2, 0) == pytest.approx(limit, abs=1e-7)
    exact = rat.miss(1000, 20, 15, Fraction(1, 10**9), 2, 0)
    assert float(exact) == pytest.approx(limit, abs=1e-7)


@settings(max_examples=200, deadline=None)
@given(eps=st.floats(1e-6, 0.98), h=st.integers(0, 6), m=st.integers(0, 6))
def test_outputs_are_probabilities(eps, h, m):
    p = an.MixedParams(1000, 20, 5, 15, eps)
    vals = [an.consensus_prob_given_hit(p, h, m)]
    if h >= 1:
        vals.append(an.consensus_prob_given_miss(p, h, m))
    if h + m >= 1:
        vals.append(an.joint_event_prob(p, h, m))
        vals.append(an.majority_detect_prob(1000, 20, 20, eps, h, m))
    for v in vals:
        assert -1e-12 <= v <= 1 + 1e-12


# -- threshold-two region ------------------------------------------------------

def test_region_check_examples():
    assert all(an.remark7_check(0.5).holds)
    chk = an.remark7_check(0.01)
    assert chk.holds[:2] == (True, True) and not chk.holds[2]
    chk = an.remark7_check(0.98)
    assert all(chk.holds)
    assert max(abs(x) for x in chk.margins) < 1e-12


def test_region_roots():
    roots = an.remark7_roots()
    assert roots[1] == [pytest.approx(0.98, abs=1e-6)]
    assert roots[2][0] == pytest.approx(49 / 7058, abs=1e-6)
    assert roots[2][1] == pytest.approx(0.98, abs=1e-6)
    assert roots[3][0] == pytest.approx(0.0140, abs=1e-3)
    assert roots[3][2] == pytest.approx(0.9930, abs=1e-3)
    # the remaining candidate root lies above 1
    assert 7203 / 7058 > 1


# -- growing-N scan ------------------------------------------------------------

def test_scan_rejects_empty_joint():
    with pytest.raises(ValueError):
        an.corollary_limit_scan(0.3, [100], j_of_t=lambda t: 0)
    with pytest.raises(ValueError):
        an.corollary_limit_scan(1.0, [100])


def test_scan_rule_and_bound():
    rows = an.corollary_limit_scan(0.3, [10**4, 10**5, 10**6])
    assert [r["t"] for r in rows] == [100, 317, 1000]
    assert [r["j"] for r in rows] == [75, 238, 750]
    for r in rows:
        assert r["hit"] > 1 - 10 / math.sqrt(r["n"])


def test_scan_values_against_rationals():
    for r in an.corollary_limit_scan(0.3, [10**3, 10**6]):
        assert r["hit"] == pytest.approx(float(rat.hit(r["n"], r["t"], r["j"], Fraction(3, 10), 1, 0)), abs=1e-13)
        assert r["miss"] == pytest.approx(float(rat.miss(r["n"], r["t"], r["j"], Fraction(3, 10), 2, 0)), abs=1e-13)


# -- single-node and independence identities ---------------------------------

def test_lemma_closed_forms():
    v = an.lemma1_values(8, 2, 0.25, 1, 3)
    assert v["hat_given_a"] == 0.75
    assert v["a_given_hat"] == pytest.approx(0.375)
    assert v["b_given_hat"] == pytest.approx(3 / 2 * 2 * 0.25 / 6)
    w = an.lemma2_values(1000, 20, 0.3, 2, 1)
    f = 20 * 0.3 / 980
    assert w["joint"] == pytest.approx(0.7 ** 2 * 0.3)
    assert w["hit_individual"] == pytest.approx(0.7 * f * (1 - f))
    assert w["miss_individual"] == pytest.approx(0.3 * f ** 2)
    assert w["outside"] == pytest.approx(f ** 2 * (1 - f))
