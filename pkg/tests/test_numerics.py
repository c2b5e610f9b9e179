import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from arblobo.errors import DivergenceSuspected, MaxIterExceeded, NotPositiveDefinite, NotSymmetric
from arblobo.numerics import (
    RandomStream,
    check_gradient,
    cholesky,
    empirical_w1_1d,
    gradient_descent,
    log_det_cholesky,
    quadrature_1d,
    quadrature_2d,
    sample_gaussian,
    sample_student_t,
    sym_eigen,
)


def _spd(rng, d):
    A = rng.normal(size=(d, d))
    return A @ A.T + d * np.eye(d)


# ---------------------------------------------------------------------------
# random streams
# ---------------------------------------------------------------------------

def test_same_key_same_draws():
    a = RandomStream(42, 3).normal(10)
    b = RandomStream(42, 3).normal(10)
    assert np.array_equal(a, b)


def test_different_stream_ids_differ():
    a = RandomStream(42, 0).uniform(size=100)
    b = RandomStream(42, 1).uniform(size=100)
    assert not np.array_equal(a, b)
    # independent streams: no meaningful correlation
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.35


def test_substream_does_not_consume_parent():
    s = RandomStream(5)
    t = RandomStream(5)
    s.substream(1, 2)
    assert np.array_equal(s.normal(5), t.normal(5))


def test_substreams_are_keyed():
    s = RandomStream(9)
    assert np.array_equal(s.substream(1, 2).normal(4), RandomStream(9).substream(1, 2).normal(4))
    assert not np.array_equal(s.substream(1, 2).normal(4), s.substream(2, 1).normal(4))
    assert s.substream(0).seed == 9


@pytest.mark.parametrize("seed, sid", [(-1, 0), (0, -1), (2**64, 0)])
def test_stream_rejects_out_of_range_keys(seed, sid):
    with pytest.raises(ValueError):
        RandomStream(seed, sid)


def test_uniform_and_choice_ranges():
    s = RandomStream(1)
    u = s.uniform(-1.0, 1.0, size=1000)
    assert u.min() >= -1.0 and u.max() < 1.0
    c = s.choice(3, p=[0.2, 0.3, 0.5], size=20000)
    assert np.allclose(np.bincount(c) / 20000, [0.2, 0.3, 0.5], atol=0.02)


# ---------------------------------------------------------------------------
# linear algebra, checked against numpy.linalg
# ---------------------------------------------------------------------------

@given(st.integers(1, 8), st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_cholesky_matches_numpy(d, seed):
    M = _spd(np.random.default_rng(seed), d)
    L = cholesky(M)
    assert np.allclose(L, np.linalg.cholesky(M), atol=1e-10)
    assert np.allclose(np.triu(L, 1), 0.0)
    assert log_det_cholesky(L) == pytest.approx(np.linalg.slogdet(M)[1], abs=1e-10)


def test_cholesky_rejects_indefinite_and_asymmetric():
    with pytest.raises(NotPositiveDefinite):
        cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(NotSymmetric):
        cholesky(np.array([[2.0, 1.0], [0.0, 2.0]]))


@given(st.integers(1, 10), st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_sym_eigen_matches_numpy(d, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(d, d))
    M = A + A.T
    values, vectors = sym_eigen(M)
    assert np.allclose(values, np.sort(np.linalg.eigvalsh(M))[::-1], atol=1e-10)
    assert np.all(np.diff(values) <= 1e-12)
    assert np.allclose(vectors.T @ vectors, np.eye(d), atol=1e-10)
    assert np.allclose(vectors @ np.diag(values) @ vectors.T, M, atol=1e-9)


def test_sym_eigen_tiny_offdiagonal_is_stable():
    M = np.array([[1.0, 1e-200], [1e-200, 2.0]])
    with np.errstate(over="raise", invalid="raise"):
        values, _ = sym_eigen(M)
    assert np.allclose(values, [2.0, 1.0])


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def test_gaussian_sampler_moments_and_shapes():
    C = np.array([[2.0, 0.5], [0.5, 1.0]])
    L = np.linalg.cholesky(C)
    x = sample_gaussian(RandomStream(3), np.array([1.0, -1.0]), L, size=200_000)
    assert x.shape == (200_000, 2)
    assert np.allclose(x.mean(axis=0), [1.0, -1.0], atol=0.01)
    assert np.allclose(np.cov(x.T), C, atol=0.02)
    batch = sample_gaussian(RandomStream(3), np.zeros((5, 2)), L)
    assert batch.shape == (5, 2)


def test_student_t_sampler_matches_scipy():
    x = sample_student_t(RandomStream(4), 5.0, np.zeros(1), np.eye(1), size=50_000)[:, 0]
    assert stats.kstest(x, stats.t(df=5).cdf).pvalue > 1e-3


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def test_quadrature_1d_gaussian_integral():
    assert quadrature_1d(lambda x: np.exp(-x * x), -10, 10) == pytest.approx(np.sqrt(np.pi), abs=1e-13)


def test_quadrature_1d_exact_for_polynomials():
    assert quadrature_1d(lambda x: x ** 7 - 3 * x ** 2, 0, 2, panels=1) == pytest.approx(2 ** 8 / 8 - 8, abs=1e-12)


def test_quadrature_falls_back_to_pointwise():
    import math
    assert quadrature_1d(lambda x: math.exp(-x * x), -10, 10) == pytest.approx(np.sqrt(np.pi), abs=1e-12)


def test_quadrature_2d_gaussian_integral():
    val = quadrature_2d(lambda x, y: np.exp(-(x * x + 4 * y * y)), (-8, 8), (-8, 8))
    assert val == pytest.approx(np.pi / 2, abs=1e-12)


def test_quadrature_rejects_non_finite_and_bad_interval():
    with pytest.raises(ValueError):
        quadrature_1d(np.log, -1, 1, panels=2)
    with pytest.raises(ValueError):
        quadrature_1d(np.exp, 1, 0)


# ---------------------------------------------------------------------------
# empirical W1
# ---------------------------------------------------------------------------

def test_empirical_w1_matches_scipy():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=500), rng.exponential(size=500)
    assert empirical_w1_1d(a, b) == pytest.approx(stats.wasserstein_distance(a, b), abs=1e-12)


def test_empirical_w1_of_shift():
    a = np.random.default_rng(1).normal(size=100)
    assert empirical_w1_1d(a, a + 0.3) == pytest.approx(0.3)


def test_empirical_w1_rejects_size_mismatch():
    with pytest.raises(ValueError):
        empirical_w1_1d([1.0, 2.0], [1.0])


# ---------------------------------------------------------------------------
# optimization
# ---------------------------------------------------------------------------

def test_gradient_descent_on_ill_conditioned_quadratic():
    A = np.diag([1.0, 100.0, 0.01])
    b = np.array([1.0, -2.0, 0.5])
    res = gradient_descent(lambda x: 0.5 * x @ A @ x - b @ x, lambda x: A @ x - b, np.zeros(3))
    assert res.converged and res.grad_norm <= 1e-8
    assert np.allclose(res.minimizer, np.linalg.solve(A, b), atol=1e-6)


def test_gradient_descent_detects_divergence():
    with pytest.raises(DivergenceSuspected) as info:
        gradient_descent(lambda x: -x[0], lambda x: np.array([-1.0]), np.zeros(1), max_norm=100.0)
    assert np.linalg.norm(info.value.iterate) > 100.0


def test_gradient_descent_max_iter():
    f = lambda x: float(np.sum(np.cosh(x)))  # noqa: E731
    g = lambda x: np.sinh(x)  # noqa: E731
    with pytest.raises(MaxIterExceeded) as info:
        gradient_descent(f, g, np.full(2, 3.0), max_iter=1)
    assert info.value.result.iterations == 1
    res = gradient_descent(f, g, np.full(2, 3.0), max_iter=1, strict=False)
    assert not res.converged


def test_check_gradient():
    f = lambda x: float(np.sum(np.sin(x)))  # noqa: E731
    assert check_gradient(f, np.cos, np.array([0.3, 1.2])) < 1e-8
    assert check_gradient(f, np.sin, np.array([0.3, 1.2])) > 0.1
