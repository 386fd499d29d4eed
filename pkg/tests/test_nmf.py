import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import planted
from sepnmf.errors import InvalidConfig, RankTooLarge, ZeroNorm
from sepnmf.masked import MaskedMatrix
from sepnmf.nmf import (
    NmfModel,
    SolverConfig,
    _MaskedData,
    _reseed,
    fit_nmf,
    has_converged,
    init_factors,
    ramped,
    relative_sq_error,
)
from sepnmf.sparsity import hoyer_sparsity


def test_rank_one_exact():
    x = np.outer([1, 2], [1, 2]).astype(float)
    _, rep = fit_nmf(x, SolverConfig(1))
    assert rep.rel_sq_error < 1e-6


def test_planted_rank4_recovery():
    W, H = planted(200, 50, 4, seed=0)
    _, rep = fit_nmf(W @ H.T, SolverConfig(4, max_iter=500, seed=0))
    assert rep.iterations <= 500
    assert rep.rel_sq_error < 1e-3


def test_planted_noisy_error_order():
    W, H = planted(200, 50, 4, seed=1)
    rng = np.random.default_rng(1)
    clean = W @ H.T
    x = clean * (1 + 0.01 * rng.standard_normal(clean.shape))
    _, rep = fit_nmf(np.maximum(x, 0), SolverConfig(4, max_iter=1000))
    # relative noise energy is 1e-4; the fit cannot be much worse than that
    assert 1e-6 < rep.rel_sq_error < 1e-3


def test_relative_error_examples():
    x = np.outer([1, 2], [3, 1]).astype(float)
    assert relative_sq_error(x, NmfModel(np.array([[1.0], [2.0]]), np.array([[3.0], [1.0]]))) == 0
    assert relative_sq_error(x, NmfModel(np.zeros((2, 1)), np.zeros((2, 1)))) == 1.0
    with pytest.raises(ZeroNorm):
        relative_sq_error(np.zeros((2, 2)), NmfModel(np.zeros((2, 1)), np.zeros((2, 1))))


def test_init_examples():
    rng = np.random.default_rng(3)
    x = MaskedMatrix(rng.random((50, 20)) * 100)
    a = init_factors(x, SolverConfig(5, seed=9))
    b = init_factors(x, SolverConfig(5, seed=9))
    np.testing.assert_array_equal(a.W, b.W)
    np.testing.assert_array_equal(a.H, b.H)
    assert abs(a.reconstruct().mean() / x.values.mean() - 1) < 0.1
    z = init_factors(MaskedMatrix(np.zeros((4, 3))), SolverConfig(2))
    assert np.all(z.W <= 1e-12) and np.all(z.reconstruct() < 1e-20)


def test_zero_matrix_fit():
    model, rep = fit_nmf(np.zeros((3, 4)), SolverConfig(2))
    assert rep.rel_sq_error == 0 and rep.converged
    assert np.all(model.reconstruct() == 0)


def test_config_errors():
    with pytest.raises(RankTooLarge):
        fit_nmf(np.ones((3, 5)), SolverConfig(4))
    for bad in (dict(rank=0), dict(rank=2, tol=0), dict(rank=2, sparsity_h=1.0), dict(rank=2, init="x")):
        with pytest.raises(InvalidConfig):
            fit_nmf(np.ones((3, 5)), SolverConfig(**bad))


def test_convergence_rule():
    assert not has_converged([1.0] * 10, 1e-6)
    assert has_converged([1.0] * 11, 1e-6)
    assert not has_converged([1.0] + [0.5] * 10, 1e-6)
    assert has_converged([0.3, 0.0], 1e-6)
    _, rep = fit_nmf(np.outer([1, 2, 3], [1, 1]).astype(float), SolverConfig(1))
    assert rep.converged and rep.iterations < 2000


def test_ramp_schedule():
    assert ramped(0.9, 1, 0) == 0.9
    assert ramped(0.9, 50, 100) == pytest.approx(0.45)
    assert ramped(0.9, 100, 100) == 0.9
    assert ramped(0.0, 3, 10) == 0.0


def test_reseed_does_not_increase_objective():
    rng = np.random.default_rng(2)
    x = MaskedMatrix(rng.random((20, 8)))
    data = _MaskedData(x)
    W, H = rng.random((20, 3)), rng.random((8, 3))
    W[:, 1] = 0
    before = np.sum(data.residual(W @ H.T) ** 2)
    _reseed(data, W, H, 1)
    assert np.sum(data.residual(W @ H.T) ** 2) <= before


def test_sparsity_attained():
    W, H = planted(60, 30, 3, seed=4)
    model, rep = fit_nmf(W @ H.T, SolverConfig(3, sparsity_h=0.6, max_iter=300))
    for k in range(3):
        if np.any(model.H[:, k] > 0):
            assert abs(hoyer_sparsity(model.H[:, k]) - 0.6) < 0.05


def test_masked_fit_ignores_missing_cells():
    W, H = planted(40, 15, 3, seed=6)
    x = W @ H.T
    mask = np.random.default_rng(0).random(x.shape) > 0.2
    model, rep = fit_nmf(MaskedMatrix(np.where(mask, x, np.nan), mask), SolverConfig(3, max_iter=1500))
    assert rep.rel_sq_error < 1e-3
    # the held-out cells are predicted reasonably by the low-rank fit
    err = np.abs(model.reconstruct() - x)[~mask]
    assert np.median(err / x[~mask]) < 0.05


small_cases = st.tuples(st.integers(3, 12), st.integers(3, 10), st.integers(1, 3), st.integers(0, 2**31))


@settings(max_examples=40, deadline=None)
@given(small_cases)
def test_monotone_descent_and_nonnegative(case):
    n, f, c, seed = case
    x = np.random.default_rng(seed).random((n, f)) * 100
    model, rep = fit_nmf(x, SolverConfig(c, max_iter=60, seed=seed))
    assert np.all(np.diff(rep.error_trace) <= 1e-10)
    assert np.all(model.W >= 0) and np.all(model.H >= 0)


@settings(max_examples=25, deadline=None)
@given(small_cases, st.floats(0.05, 0.5))
def test_mask_independence(case, missing):
    n, f, c, seed = case
    rng = np.random.default_rng(seed)
    v = rng.random((n, f)) * 10
    mask = rng.random((n, f)) > missing
    other = np.where(mask, v, rng.random((n, f)) * 1000)
    cfg = SolverConfig(c, max_iter=40, seed=seed)
    a, _ = fit_nmf(MaskedMatrix(v, mask), cfg)
    b, _ = fit_nmf(MaskedMatrix(other, mask), cfg)
    np.testing.assert_array_equal(a.W, b.W)
    np.testing.assert_array_equal(a.H, b.H)


@settings(max_examples=20, deadline=None)
@given(small_cases)
def test_deterministic(case):
    n, f, c, seed = case
    x = np.random.default_rng(seed).random((n, f))
    cfg = SolverConfig(c, max_iter=30, seed=seed, sparsity_h=0.3)
    a, ra = fit_nmf(x, cfg)
    b, rb = fit_nmf(x, cfg)
    np.testing.assert_array_equal(a.W, b.W)
    assert ra.error_trace == rb.error_trace


def test_svd_init_is_valid_start():
    W, H = planted(50, 20, 3, seed=8)
    model, rep = fit_nmf(W @ H.T, SolverConfig(3, init="svd", max_iter=300))
    assert np.all(np.diff(rep.error_trace) <= 1e-10)
    assert rep.rel_sq_error < 1e-2


def test_report_dict():
    _, rep = fit_nmf(np.outer([1, 2], [1, 2]).astype(float), SolverConfig(1))
    d = rep.to_dict()
    assert set(d) >= {"rel_sq_error", "iterations", "converged", "error_trace", "dead_components"}
    assert len(d["error_trace"]) == rep.iterations


def test_config_is_frozen():
    cfg = SolverConfig(2)
    with pytest.raises(dataclasses.FrozenInstanceError):
        cfg.rank = 3
