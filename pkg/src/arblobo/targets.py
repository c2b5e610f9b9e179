"""Target densities used throughout the package.

Log-densities are unnormalized unless ``normalized`` is set, and are
vectorized over leading axes: ``log_density(theta)`` maps an array of shape
``(..., d)`` to shape ``(...)``. Off the support they return ``-inf``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional

import numpy as np
from scipy.special import expit

from .numerics import OptimizerResult, gradient_descent, sym_eigen

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class TargetDensity:
    """A density on R^d (or a convex subset) and what is known about it.

    ``strong_convexity`` is xi such that ``-log pi`` is (1/xi)-strongly convex.
    ``sup_density`` may be an upper bound on the supremum rather than the exact
    value; the Wasserstein constants only need ``pi <= s``.
    """

    dim: int
    log_density: Callable[[np.ndarray], np.ndarray]
    grad_log_density: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hessian_neg_log: Optional[Callable[[np.ndarray], np.ndarray]] = None
    sup_density: Optional[float] = None
    strong_convexity: Optional[float] = None
    known_mode: Optional[np.ndarray] = None
    support: Optional[Callable[[np.ndarray], np.ndarray]] = None
    normalized: bool = False
    name: str = "custom"
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")

    def log_pdf(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        out = np.asarray(self.log_density(theta), dtype=float)
        if self.support is not None:
            out = np.where(self.support(theta), out, -np.inf)
        return out

    def in_support(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.support is None:
            return np.ones(theta.shape[:-1], dtype=bool)
        return np.asarray(self.support(theta), dtype=bool)

    def restricted(self, predicate: Callable[[np.ndarray], np.ndarray]) -> "TargetDensity":
        """Same density with support cut down to ``predicate`` (unnormalized)."""
        if self.support is None:
            support = predicate
        else:
            old = self.support
            support = lambda th: np.logical_and(old(th), predicate(th))  # noqa: E731
        return replace(self, support=support, normalized=False)


@dataclass(frozen=True)
class LogisticData:
    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        Y = np.asarray(self.Y, dtype=float)
        if X.ndim != 2:
            raise ValueError("X must be an n x d matrix")
        if Y.shape != (X.shape[0],):
            raise ValueError("Y must have one entry per row of X")
        if not np.all((Y == 0) | (Y == 1)):
            raise ValueError("Y must be binary")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


# ---------------------------------------------------------------------------
# Gaussian family
# ---------------------------------------------------------------------------

def make_gaussian(sigma2: float, d: int) -> TargetDensity:
    """N(0, sigma2 I_d), normalized."""
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    sigma2 = float(sigma2)
    const = -0.5 * d * (LOG_2PI + np.log(sigma2))

    def log_density(theta):
        theta = np.asarray(theta, dtype=float)
        return const - 0.5 * np.sum(theta * theta, axis=-1) / sigma2

    return TargetDensity(
        dim=d,
        log_density=log_density,
        grad_log_density=lambda theta: -np.asarray(theta, dtype=float) / sigma2,
        hessian_neg_log=lambda theta: np.eye(d) / sigma2,
        sup_density=float(np.exp(const)),
        strong_convexity=sigma2,
        known_mode=np.zeros(d),
        normalized=True,
        name="gaussian",
        params={"sigma2": sigma2},
    )


def make_gaussian_mixture_2d(b: float) -> TargetDensity:
    """Equal mixture of N(0, diag(1/2, 1/(2b^2))) and its transpose."""
    if not b > 1:
        raise ValueError("mixture parameter b must exceed 1")
    b = float(b)
    b2 = b * b
    const = np.log(b) - LOG_2PI

    def exponents(theta):
        theta = np.asarray(theta, dtype=float)
        x, y = theta[..., 0], theta[..., 1]
        return -(x * x + b2 * y * y), -(b2 * x * x + y * y)

    def log_density(theta):
        e1, e2 = exponents(theta)
        return const + np.logaddexp(e1, e2)

    def grad(theta):
        theta = np.asarray(theta, dtype=float)
        e1, e2 = exponents(theta)
        w1 = expit(e1 - e2)
        x, y = theta[..., 0], theta[..., 1]
        gx = w1 * (-2 * x) + (1 - w1) * (-2 * b2 * x)
        gy = w1 * (-2 * b2 * y) + (1 - w1) * (-2 * y)
        return np.stack([gx, gy], axis=-1)

    return TargetDensity(
        dim=2,
        log_density=log_density,
        grad_log_density=grad,
        sup_density=b / np.pi,
        known_mode=np.zeros(2),
        normalized=True,
        name="gaussian-mixture-2d",
        params={"b": b},
    )


def make_subexponential_2d() -> TargetDensity:
    """exp{-(t1^2 + t1^2 t2^2 + t2^2)}, normalizing constant left unknown."""

    def log_density(theta):
        theta = np.asarray(theta, dtype=float)
        t1, t2 = theta[..., 0], theta[..., 1]
        return -(t1 * t1 + t1 * t1 * t2 * t2 + t2 * t2)

    def grad(theta):
        theta = np.asarray(theta, dtype=float)
        t1, t2 = theta[..., 0], theta[..., 1]
        return np.stack([-2 * t1 * (1 + t2 * t2), -2 * t2 * (1 + t1 * t1)], axis=-1)

    def hessian(theta):
        t1, t2 = np.asarray(theta, dtype=float)
        return np.array([[2 + 2 * t2 * t2, 4 * t1 * t2], [4 * t1 * t2, 2 + 2 * t1 * t1]])

    return TargetDensity(
        dim=2,
        log_density=log_density,
        grad_log_density=grad,
        hessian_neg_log=hessian,
        known_mode=np.zeros(2),
        name="subexponential-2d",
    )


def conditional_1d(target: TargetDensity, fixed_index: int, fixed_value: float) -> TargetDensity:
    """Exact full conditional of the sub-exponential target.

    ``fixed_index`` is 1-based: fixing coordinate 1 at ``v`` gives the law of
    coordinate 2, which is N(0, 1 / (2 (1 + v^2))), and symmetrically.
    """
    if target.name != "subexponential-2d":
        raise ValueError("closed-form conditionals are only available for the sub-exponential target")
    if fixed_index not in (1, 2):
        raise ValueError("fixed_index must be 1 or 2")
    v = float(fixed_value)
    cond = make_gaussian(1.0 / (2.0 * (1.0 + v * v)), 1)
    return replace(
        cond,
        name="subexponential-conditional",
        params={**cond.params, "fixed_index": fixed_index, "fixed_value": v},
    )


# ---------------------------------------------------------------------------
# logistic regression posteriors
# ---------------------------------------------------------------------------

def _log1pexp(z):
    # log(1 + e^z) without overflow
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def _logistic_pieces(data: LogisticData):
    X, Y = data.X, data.Y

    def loglik(beta):
        z = np.asarray(beta, dtype=float) @ X.T
        return -np.sum(_log1pexp(z) - Y * z, axis=-1)

    def grad(beta):
        z = np.asarray(beta, dtype=float) @ X.T
        return (Y - expit(z)) @ X

    def hessian(beta):
        s = expit(X @ np.asarray(beta, dtype=float))
        return (X * (s * (1.0 - s))[:, None]).T @ X

    return loglik, grad, hessian


def _min_gram_eigenvalue(X: np.ndarray) -> float:
    return float(sym_eigen(X.T @ X)[0][-1])


def make_logistic_flat(data: LogisticData) -> TargetDensity:
    """Flat-prior logistic posterior (unnormalized)."""
    lam_min = _min_gram_eigenvalue(data.X)
    if not lam_min > 1e-10:
        raise ValueError("design matrix is not of full column rank")
    loglik, grad, hessian = _logistic_pieces(data)
    return TargetDensity(
        dim=data.d,
        log_density=loglik,
        grad_log_density=grad,
        hessian_neg_log=hessian,
        name="logistic-flat",
        params={"n": data.n, "gram_min_eig": lam_min},
    )


def make_logistic_zellner(data: LogisticData, g: float) -> TargetDensity:
    """Logistic posterior under Zellner's g-prior N(0, g (X^T X)^{-1})."""
    if not g > 0:
        raise ValueError("g must be positive")
    gram = data.X.T @ data.X
    lam_min = float(sym_eigen(gram)[0][-1])
    if not lam_min > 1e-10:
        raise ValueError("X^T X is not positive definite")
    loglik, grad, hessian = _logistic_pieces(data)
    g = float(g)

    def log_density(beta):
        beta = np.asarray(beta, dtype=float)
        return loglik(beta) - 0.5 * np.sum((beta @ gram) * beta, axis=-1) / g

    return TargetDensity(
        dim=data.d,
        log_density=log_density,
        grad_log_density=lambda beta: grad(beta) - np.asarray(beta, dtype=float) @ gram / g,
        hessian_neg_log=lambda beta: hessian(beta) + gram / g,
        strong_convexity=g / lam_min,
        name="logistic-zellner",
        params={"n": data.n, "g": g, "gram_min_eig": lam_min},
    )


def make_logistic_gaussian_prior(data: LogisticData, sigma2_prior: float) -> TargetDensity:
    """Logistic posterior under an isotropic N(0, sigma2_prior I) prior."""
    if not sigma2_prior > 0:
        raise ValueError("prior variance must be positive")
    s2 = float(sigma2_prior)
    loglik, grad, hessian = _logistic_pieces(data)
    d = data.d

    def log_density(beta):
        beta = np.asarray(beta, dtype=float)
        return loglik(beta) - 0.5 * np.sum(beta * beta, axis=-1) / s2

    return TargetDensity(
        dim=d,
        log_density=log_density,
        grad_log_density=lambda beta: grad(beta) - np.asarray(beta, dtype=float) / s2,
        hessian_neg_log=lambda beta: hessian(beta) + np.eye(d) / s2,
        strong_convexity=s2,
        name="logistic-gaussian-prior",
        params={"n": data.n, "sigma2_prior": s2},
    )


def find_mode(
    target: TargetDensity,
    x0=None,
    tolerance: float = 1e-8,
    max_iter: int = 20_000,
    max_norm: float = np.inf,
) -> OptimizerResult:
    """Maximize the log-density by gradient descent on its negative."""
    if target.grad_log_density is None:
        raise ValueError("target has no gradient")
    x0 = np.zeros(target.dim) if x0 is None else np.asarray(x0, dtype=float)
    return gradient_descent(
        lambda x: -float(target.log_pdf(x)),
        lambda x: -np.asarray(target.grad_log_density(x), dtype=float),
        x0,
        tolerance=tolerance,
        max_iter=max_iter,
        max_norm=max_norm,
    )


def smallest_hessian_eigenvalue(target: TargetDensity, point) -> float:
    """lambda_min of the Hessian of ``-log pi`` at ``point``."""
    if target.hessian_neg_log is None:
        raise ValueError(f"target {target.name!r} exposes no Hessian")
    H = np.asarray(target.hessian_neg_log(np.asarray(point, dtype=float)), dtype=float)
    return float(sym_eigen(0.5 * (H + H.T))[0][-1])
