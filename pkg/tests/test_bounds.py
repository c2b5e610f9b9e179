import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from arblobo import bounds
from arblobo.kernels import ArbKernel, mc_acceptance, quadrature_acceptance
from arblobo.numerics import RandomStream
from arblobo.experiments import generate_logistic_data
from arblobo.proposals import density_sup, make_independence, make_rw_gaussian
from arblobo.targets import find_mode, make_gaussian, make_gaussian_mixture_2d, make_logistic_zellner


# ---------------------------------------------------------------------------
# total variation and rates
# ---------------------------------------------------------------------------

def test_tv_curve_values():
    curve = bounds.tv_lower_curve(0.5, 3)
    assert curve.rows() == [(1, 0.5), (2, 0.25), (3, 0.125)]
    assert bounds.tv_lower_bound(0.2, 2) == pytest.approx(0.64)


@given(st.floats(0, 1), st.integers(1, 50))
@settings(max_examples=60, deadline=None)
def test_tv_curve_monotone_in_unit_interval(A, T):
    v = bounds.tv_lower_curve(A, T).values
    assert np.all((v >= 0) & (v <= 1))
    assert np.all(np.diff(v) <= 0)


def test_tv_extremes():
    assert bounds.tv_lower_bound(0.0, 7) == 1.0
    assert bounds.tv_lower_bound(1.0, 1) == 0.0


@pytest.mark.parametrize("A", [-0.1, 1.1, np.nan])
def test_probability_validation(A):
    with pytest.raises(ValueError):
        bounds.tv_lower_bound(A, 1)


def test_geometric_rate_bounds():
    assert bounds.geo_rate_lb_tv(0.25) == 0.75
    assert bounds.geo_rate_lb_wass(0.5, 1) == pytest.approx(0.25)
    assert bounds.geo_rate_lb_wass(0.5, 2) == pytest.approx(0.5 ** 1.5)


# ---------------------------------------------------------------------------
# Wasserstein
# ---------------------------------------------------------------------------

def test_wasserstein_constant_reference_values():
    assert bounds.wasserstein_constant(1.0, 1, 1.0) == pytest.approx(1 / 8)
    s = 1 / np.sqrt(2 * np.pi)
    assert bounds.wasserstein_constant(1.0, 1, s) == pytest.approx(np.sqrt(2 * np.pi) / 8)
    # d = 2, C0 = 1, s = 1: 2 / (2 * 3^1.5)
    assert bounds.wasserstein_constant(1.0, 2, 1.0) == pytest.approx(3 ** -1.5)


def test_wasserstein_curve():
    c = bounds.wasserstein_constant(1.0, 1, 1 / np.sqrt(2 * np.pi))
    curve = bounds.wasserstein_lower_curve(0.5, 3, 1, c)
    assert np.allclose(curve.values, c * 0.25 ** np.arange(1, 4))
    assert curve.metadata["d"] == 1
    assert bounds.wasserstein_lower_bound(0.5, 2, 1, c) == pytest.approx(c / 16)


@pytest.mark.parametrize("tag", ["l1", "l2", "linf"])
def test_norm_equivalence_constants_hold(tag):
    d = 5
    c0 = bounds.norm_equivalence_constant(tag, d)
    ord_ = {"l1": 1, "l2": 2, "linf": np.inf}[tag]
    x = np.random.default_rng(0).normal(size=(1000, d))
    assert np.all(np.linalg.norm(x, ord_, axis=1) >= c0 * np.linalg.norm(x, 1, axis=1) - 1e-12)
    # equality on the all-ones vector
    e = np.ones(d)
    assert np.linalg.norm(e, ord_) == pytest.approx(c0 * np.linalg.norm(e, 1))


def test_norm_equivalence_unknown():
    with pytest.raises(ValueError):
        bounds.norm_equivalence_constant("l3", 2)


# ---------------------------------------------------------------------------
# acceptance upper bounds
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("h", [0.1, 1.0, 3.0])
def test_sc_bound_is_exact_at_gaussian_mode(h):
    k = ArbKernel(make_gaussian(1.0, 1), make_rw_gaussian(h, dim=1))
    assert quadrature_acceptance(k, np.zeros(1)) == pytest.approx(bounds.sc_accept_ub(h, 1.0, 1), abs=1e-10)


@pytest.mark.parametrize("theta", [0.5, 1.5, 3.0])
def test_sc_bound_holds_off_mode(theta):
    sigma2, h = 0.7, 1.2
    k = ArbKernel(make_gaussian(sigma2, 1), make_rw_gaussian(h, dim=1))
    A = quadrature_acceptance(k, np.array([theta]))
    assert A <= bounds.sc_accept_ub(h, sigma2, 1, v_norm=theta / sigma2) + 1e-12


def test_sc_bound_log_variant_can_exceed_one():
    assert bounds.log_sc_accept_ub(1.0, 1.0, 1, v_norm=10.0) > 0
    assert bounds.sc_accept_ub(1.0, 1.0, 1, v_norm=10.0) == 1.0


def test_bounded_proposal_bound():
    target = make_gaussian(1.0, 1)
    prop = make_independence([0.0], 0.25)
    k = ArbKernel(target, prop)
    theta = np.array([0.3])
    A = quadrature_acceptance(k, theta)
    assert A <= bounds.accept_ub_bounded_proposal(target.log_pdf(theta), density_sup(prop)) + 1e-12


def test_zellner_formula():
    h, n, gamma, g, d = 0.5, 40, 0.25, 10.0, 10
    expected = (h * n * 0.25 / (2 * g) + 1) ** (-d / 2)
    assert bounds.zellner_accept_ub(h, n, gamma, g, d) == pytest.approx(expected)
    assert bounds.zellner_empirical_accept_ub(h, 8.0, g, d) == pytest.approx((1 + h * 8 / g) ** -5)
    with pytest.raises(ValueError):
        bounds.zellner_accept_ub(h, n, 1.0, g, d)


def test_zellner_empirical_bound_dominates_mc():
    data = generate_logistic_data(RandomStream(3), 24, 4)
    target = make_logistic_zellner(data, 10.0)
    mode = find_mode(target).minimizer
    h = 0.3
    est = mc_acceptance(ArbKernel(target, make_rw_gaussian(h, dim=4)), mode, 20_000, RandomStream(4))
    ub = bounds.zellner_empirical_accept_ub(h, target.params["gram_min_eig"], 10.0, 4)
    assert est.mean <= ub + 3 * est.std_err


def test_mixture_bound_dominates_mc():
    b, h = 2.0, 1.0
    k = ArbKernel(make_gaussian_mixture_2d(b), make_rw_gaussian(h, dim=2))
    for pt in ([0.0, 0.0], [0.3, -0.2]):
        est = mc_acceptance(k, np.array(pt), 20_000, RandomStream(1))
        assert est.mean <= bounds.mixture_accept_ub(b, h, *pt) + 3 * est.std_err
    assert bounds.mixture_accept_ub(b, h, 0.0, 0.0) == pytest.approx(1 / (2 * b * h))


def test_laplace_bounds():
    p = bounds.LaplaceParams(lambda0=2.0, c=0.5, n=100, d=3)
    assert bounds.laplace_density_lb(p) == pytest.approx(1.5 * np.log(100 / (4 * np.pi)) - np.log(1.5))
    assert bounds.laplace_accept_ub(p, 0.0) == pytest.approx(np.exp(-bounds.laplace_density_lb(p)))
    with pytest.raises(ValueError):
        bounds.LaplaceParams(lambda0=2.0, c=0.0, n=10, d=1)


def test_flat_logistic_bound():
    assert bounds.flat_logistic_accept_ub(1.0, 100, 0.1, 2) == pytest.approx(2 * (1 / 10))
    assert bounds.log_flat_logistic_accept_ub(1.0, 1, 0.01, 2) > 0
    assert bounds.flat_logistic_accept_ub(1.0, 1, 0.01, 2) == 1.0


def test_rs_combined_acceptance():
    assert bounds.rs_combined_acceptance([0.25, 0.75], [0.4, 0.8]) == pytest.approx(0.7)
    with pytest.raises(ValueError):
        bounds.rs_combined_acceptance([0.5, 0.4], [0.1, 0.1])
    with pytest.raises(ValueError):
        bounds.rs_combined_acceptance([1.0], [1.5])
