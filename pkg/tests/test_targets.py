import numpy as np
import pytest
from scipy import optimize

from arblobo.numerics import check_gradient, quadrature_1d, quadrature_2d
from arblobo.targets import (
    LogisticData,
    conditional_1d,
    find_mode,
    make_gaussian,
    make_gaussian_mixture_2d,
    make_logistic_flat,
    make_logistic_gaussian_prior,
    make_logistic_zellner,
    make_subexponential_2d,
    smallest_hessian_eigenvalue,
)


@pytest.fixture
def data():
    rng = np.random.default_rng(7)
    X = rng.uniform(-1, 1, size=(40, 3))
    p = 1 / (1 + np.exp(-X @ np.array([1.0, -0.5, 0.25])))
    return LogisticData(X, (rng.uniform(size=40) < p).astype(float))


def _fd_hessian(grad, x, eps=1e-6):
    d = x.size
    H = np.empty((d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = eps
        H[:, j] = (grad(x + e) - grad(x - e)) / (2 * eps)
    return H


def test_gaussian_normalized_and_sup():
    t = make_gaussian(2.5, 1)
    mass = quadrature_1d(lambda x: np.exp(t.log_pdf(x[:, None])), -30, 30)
    assert mass == pytest.approx(1.0, abs=1e-12)
    assert t.sup_density == pytest.approx(np.exp(t.log_pdf(np.zeros(1))))
    assert t.strong_convexity == 2.5


def test_gaussian_vectorized():
    t = make_gaussian(1.0, 3)
    x = np.random.default_rng(0).normal(size=(4, 5, 3))
    assert t.log_pdf(x).shape == (4, 5)
    assert check_gradient(lambda z: float(t.log_pdf(z)), t.grad_log_density, x[0, 0]) < 1e-7


def test_gaussian_rejects_bad_variance():
    with pytest.raises(ValueError):
        make_gaussian(0.0, 1)


def test_mixture_normalized_sup_and_gradient():
    b = 2.0
    t = make_gaussian_mixture_2d(b)
    mass = quadrature_2d(lambda x, y: np.exp(t.log_pdf(np.stack([x, y], -1))), (-8, 8), (-8, 8))
    assert mass == pytest.approx(1.0, abs=1e-10)
    assert t.sup_density == pytest.approx(b / np.pi)
    assert np.exp(t.log_pdf(np.zeros(2))) == pytest.approx(b / np.pi)
    x = np.array([0.3, -0.7])
    assert check_gradient(lambda z: float(t.log_pdf(z)), t.grad_log_density, x) < 1e-7
    with pytest.raises(ValueError):
        make_gaussian_mixture_2d(1.0)


def test_subexponential_gradient_and_hessian():
    t = make_subexponential_2d()
    x = np.array([0.4, -1.3])
    assert check_gradient(lambda z: float(t.log_pdf(z)), t.grad_log_density, x) < 1e-7
    H = _fd_hessian(lambda z: -t.grad_log_density(z), x)
    assert np.allclose(H, t.hessian_neg_log(x), atol=1e-6)


@pytest.mark.parametrize("v", [0.0, 0.8, -2.0])
def test_conditional_matches_normalized_joint(v):
    joint = make_subexponential_2d()
    cond = conditional_1d(joint, 1, v)
    assert cond.params["sigma2"] == pytest.approx(1 / (2 * (1 + v * v)))
    f = lambda y: np.exp(joint.log_pdf(np.stack([np.full_like(y, v), y], -1)))  # noqa: E731
    Z = quadrature_1d(f, -20, 20)
    y = np.array([-0.3, 0.1, 0.9])
    assert np.allclose(f(y) / Z, np.exp(cond.log_pdf(y[:, None])), rtol=1e-10)


def test_conditional_rejects_other_targets():
    with pytest.raises(ValueError):
        conditional_1d(make_gaussian(1, 2), 1, 0.0)
    with pytest.raises(ValueError):
        conditional_1d(make_subexponential_2d(), 3, 0.0)


def test_restricted_support():
    t = make_gaussian(1.0, 1).restricted(lambda x: x[..., 0] > 0)
    assert t.log_pdf(np.array([-1.0])) == -np.inf
    assert np.isfinite(t.log_pdf(np.array([1.0])))
    assert not t.normalized
    assert list(t.in_support(np.array([[-1.0], [1.0]]))) == [False, True]


def test_logistic_data_validation():
    with pytest.raises(ValueError):
        LogisticData(np.zeros((3, 2)), np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        LogisticData(np.zeros((2, 2)), np.array([0.0, 0.5]))


@pytest.mark.parametrize("factory", [
    make_logistic_flat,
    lambda d: make_logistic_zellner(d, 10.0),
    lambda d: make_logistic_gaussian_prior(d, 4.0),
])
def test_logistic_derivatives(data, factory):
    t = factory(data)
    x = np.array([0.2, -0.4, 0.9])
    assert check_gradient(lambda z: float(t.log_pdf(z)), t.grad_log_density, x) < 1e-6
    H = _fd_hessian(lambda z: -t.grad_log_density(z), x)
    assert np.allclose(H, t.hessian_neg_log(x), atol=1e-5)


def test_logistic_loglik_stable_for_large_arguments(data):
    t = make_logistic_flat(data)
    assert np.isfinite(t.log_pdf(np.full(3, 800.0)))


def test_zellner_strong_convexity(data):
    t = make_logistic_zellner(data, 10.0)
    lam = np.linalg.eigvalsh(data.X.T @ data.X).min()
    assert t.strong_convexity == pytest.approx(10.0 / lam)
    for x in np.random.default_rng(1).normal(size=(5, 3)):
        assert smallest_hessian_eigenvalue(t, x) >= 1 / t.strong_convexity - 1e-10


def test_flat_rejects_rank_deficient():
    X = np.ones((5, 2))
    with pytest.raises(ValueError):
        make_logistic_flat(LogisticData(X, np.array([0, 1, 0, 1, 1.0])))


def test_find_mode_matches_scipy(data):
    t = make_logistic_gaussian_prior(data, 4.0)
    res = find_mode(t)
    assert res.converged and res.grad_norm <= 1e-8
    ref = optimize.minimize(lambda b: -t.log_pdf(b), np.zeros(3), jac=lambda b: -t.grad_log_density(b),
                            method="BFGS", options={"gtol": 1e-10})
    assert np.allclose(res.minimizer, ref.x, atol=1e-7)
