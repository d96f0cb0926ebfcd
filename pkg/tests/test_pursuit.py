import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dgpvote.pursuit import least_squares_on_support, subspace_pursuit, top_k
from dgpvote.sigmodel import ModelConfig, draw_sensor


def test_top_k_ties_go_low():
    assert top_k(np.array([1.0, 1.0, 1.0, 1.0]), 2).tolist() == [0, 1]
    assert top_k(np.array([3.0, 1.0, 2.0, 0.0]), 2).tolist() == [0, 2]
    assert top_k(np.array([0.0, 5.0, 5.0]), 1).tolist() == [1]
    assert top_k(np.array([1.0, 2.0]), 0).tolist() == []


@pytest.mark.parametrize("seed", range(10))
def test_noiseless_exact_recovery(seed):
    rng = np.random.default_rng(seed)
    cfg = ModelConfig(n=256, m_rows=80, t=8)
    truth = np.sort(rng.choice(256, 8, replace=False))
    inst = draw_sensor(cfg, truth, rng)
    res = subspace_pursuit(inst.meas_y, inst.matrix_a, 8)
    assert res.support_est.tolist() == truth.tolist()
    assert res.residual_norm < 1e-9
    x = np.zeros(256)
    x[res.support_est] = res.coeffs
    np.testing.assert_allclose(x, inst.signal_x, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t=st.integers(1, 6), snr=st.sampled_from([0.0, 10.0, 30.0]))
def test_output_shape_and_residual(seed, t, snr):
    rng = np.random.default_rng(seed)
    cfg = ModelConfig(n=60, m_rows=t + 6, t=t, smnr_db=snr)
    inst = draw_sensor(cfg, rng.choice(60, t, replace=False), rng)
    res = subspace_pursuit(inst.meas_y, inst.matrix_a, t)
    assert res.support_est.size == t
    assert np.all(np.diff(res.support_est) > 0)
    r = inst.meas_y - inst.matrix_a[:, res.support_est] @ res.coeffs
    assert res.residual_norm == pytest.approx(np.linalg.norm(r), abs=1e-10)
    assert 0 <= res.iterations <= 2 * t
    # never worse than the initial correlation guess
    s0 = top_k(np.abs(inst.matrix_a.T @ inst.meas_y), t)
    c0 = least_squares_on_support(inst.matrix_a, inst.meas_y, s0)
    assert res.residual_norm <= np.linalg.norm(inst.meas_y - inst.matrix_a[:, s0] @ c0) + 1e-12


def test_deterministic():
    rng = np.random.default_rng(11)
    cfg = ModelConfig(n=100, m_rows=20, t=5, smnr_db=10.0)
    inst = draw_sensor(cfg, [1, 2, 3, 4, 5], rng)
    a = subspace_pursuit(inst.meas_y, inst.matrix_a, 5)
    b = subspace_pursuit(inst.meas_y.copy(), inst.matrix_a.copy(), 5)
    assert a.support_est.tolist() == b.support_est.tolist()
    assert a.residual_norm == b.residual_norm


def test_least_squares_matches_pseudoinverse():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((6, 20))
    y = rng.standard_normal(6)
    s = [0, 3, 5, 9, 12, 15, 17, 19]  # more columns than rows
    c = least_squares_on_support(a, y, s)
    np.testing.assert_allclose(c, np.linalg.pinv(a[:, s]) @ y, atol=1e-10)
    s = [1, 4, 8]
    c = least_squares_on_support(a, y, s)
    np.testing.assert_allclose(c, np.linalg.lstsq(a[:, s], y, rcond=None)[0], atol=1e-10)


def test_rank_deficiency_flagged():
    rng = np.random.default_rng(8)
    a = rng.standard_normal((10, 30))
    a[:, 1] = a[:, 0]
    a /= np.linalg.norm(a, axis=0)
    y = a[:, 0] + a[:, 2]
    res = subspace_pursuit(y, a, 3)
    assert res.rank_deficient


def test_underdetermined_merge_step():
    # 2t > M: the merged least-squares problem has more columns than rows
    rng = np.random.default_rng(9)
    cfg = ModelConfig(n=200, m_rows=12, t=8, smnr_db=20.0)
    inst = draw_sensor(cfg, rng.choice(200, 8, replace=False), rng)
    res = subspace_pursuit(inst.meas_y, inst.matrix_a, 8)
    assert res.support_est.size == 8 and np.isfinite(res.residual_norm)


def test_bad_sparsity():
    with pytest.raises(ValueError):
        subspace_pursuit(np.zeros(3), np.eye(3), 3)
    with pytest.raises(ValueError):
        subspace_pursuit(np.zeros(3), np.eye(3), 0)
