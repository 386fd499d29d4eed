import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from _oracles import brute_force_projection
from sepnmf.errors import LengthOne, ZeroVector
from sepnmf.sparsity import hoyer_sparsity, project_sparsity


def test_hoyer_examples():
    assert hoyer_sparsity([1, 0, 0, 0]) == pytest.approx(1.0, abs=1e-15)
    assert hoyer_sparsity([1, 1, 1, 1]) == pytest.approx(0.0, abs=1e-15)
    expected = (np.sqrt(2) - 7 / 5) / (np.sqrt(2) - 1)
    assert hoyer_sparsity([3, 4]) == pytest.approx(expected, rel=1e-12)
    assert hoyer_sparsity([3, 4]) == pytest.approx(0.03432, abs=1e-5)


def test_hoyer_errors():
    with pytest.raises(ZeroVector):
        hoyer_sparsity([0, 0, 0])
    with pytest.raises(LengthOne):
        hoyer_sparsity([2.0])


def test_projection_fixed_point():
    v = np.array([0.3, 1.2, 0.0, 2.5, 0.7])
    np.testing.assert_allclose(project_sparsity(v, hoyer_sparsity(v)), v, atol=1e-9)


def test_projection_maximal_sparsity_limit():
    p = project_sparsity(np.ones(4), 1.0 - 1e-6)
    assert np.linalg.norm(p) == pytest.approx(2.0, abs=1e-9)
    big = np.argmax(p)
    assert p[big] == pytest.approx(2.0, abs=1e-4)
    assert np.all(np.delete(p, big) < 1e-4)


def test_projection_matches_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(10):
        v = rng.random(4)
        p = project_sparsity(v, 0.7)
        _, best = brute_force_projection(v, 0.7, res=250)
        assert abs(np.sum((p - v) ** 2) - best) < 1e-3


def test_projection_three_coordinates_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(10):
        v = rng.random(3)
        p = project_sparsity(v, 0.5)
        _, best = brute_force_projection(v, 0.5, res=2000)
        assert np.sum((p - v) ** 2) <= best + 1e-6


positive_vectors = arrays(
    float, st.integers(2, 30), elements=st.floats(0, 100, allow_subnormal=False)
).filter(lambda v: np.linalg.norm(v) > 1e-3)


@settings(max_examples=200)
@given(positive_vectors, st.floats(0.05, 0.95))
def test_projection_properties(v, target):
    p = project_sparsity(v, target)
    assert np.all(p >= 0)
    assert np.linalg.norm(p) == pytest.approx(np.linalg.norm(v), rel=1e-9)
    assert hoyer_sparsity(p) == pytest.approx(target, abs=1e-6)


@settings(max_examples=100)
@given(positive_vectors, st.floats(0.05, 0.95), st.floats(0.01, 100))
def test_projection_scale_equivariant(v, target, lam):
    a = project_sparsity(v * lam, target)
    b = project_sparsity(v, target) * lam
    np.testing.assert_allclose(a, b, rtol=1e-7, atol=1e-9 * lam * np.linalg.norm(v))


@settings(max_examples=100)
@given(positive_vectors, st.floats(0.05, 0.95))
def test_projection_idempotent(v, target):
    p = project_sparsity(v, target)
    np.testing.assert_allclose(project_sparsity(p, target), p, atol=1e-7 * np.linalg.norm(v))


@given(positive_vectors)
def test_hoyer_in_unit_interval(v):
    s = hoyer_sparsity(v)
    assert -1e-12 <= s <= 1 + 1e-12


@pytest.mark.parametrize("n", [2, 5, 27, 100])
def test_projection_of_tied_vector(n):
    v = np.full(n, 3.0)
    p = project_sparsity(v, 0.5)
    assert np.all(p >= 0)
    assert np.linalg.norm(p) == pytest.approx(np.linalg.norm(v), rel=1e-9)
    assert hoyer_sparsity(p) == pytest.approx(0.5, abs=1e-6)
