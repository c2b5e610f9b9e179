"""Proposal families Q(theta, .) with samplers, log-densities and density suprema."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaln

from .errors import Unbounded
from .numerics import RandomStream, cholesky, log_det_cholesky, sample_gaussian, sample_student_t
from .targets import LOG_2PI, TargetDensity

KINDS = (
    "random-walk-gaussian",
    "mean-map-gaussian",
    "mala",
    "independence",
    "crank-nicolson",
    "student-t",
)


@dataclass(frozen=True)
class ProposalFamily:
    """Proposal kernel on R^d.

    ``sample(theta, stream, size=None)`` draws from Q(theta, .); ``theta`` may
    carry batch axes and ``size`` prepends draw axes. ``log_q(theta, theta_new)``
    broadcasts over leading axes of both arguments.
    """

    dim: int
    kind: str
    sample: Callable
    log_q: Callable
    log_density_sup: Optional[float] = None
    mean_map: Optional[Callable] = None
    params: Mapping = field(default_factory=dict)
    diagnostics: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS and self.kind != "custom":
            raise ValueError(f"unknown proposal kind {self.kind!r}")


def _as_cov(C, dim: Optional[int]) -> np.ndarray:
    if C is None:
        if dim is None:
            raise ValueError("either C or dim is required")
        return np.eye(dim)
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if dim is not None and C.shape != (dim, dim):
        raise ValueError(f"C has shape {C.shape}, expected {(dim, dim)}")
    return C


def _whiten(L: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Squared Mahalanobis norms of the rows of ``r`` under ``L L^T``."""
    d = L.shape[0]
    flat = r.reshape(-1, d)
    z = solve_triangular(L, flat.T, lower=True)
    return np.sum(z * z, axis=0).reshape(r.shape[:-1])


def _gaussian_family(mean_map: Callable, h: float, C: np.ndarray, kind: str, params: dict) -> ProposalFamily:
    if not h > 0:
        raise ValueError("h must be positive")
    d = C.shape[0]
    L = cholesky(h * C)
    log_norm = -0.5 * d * LOG_2PI - 0.5 * log_det_cholesky(L)

    def sample(theta, stream: RandomStream, size=None):
        return sample_gaussian(stream, mean_map(np.asarray(theta, dtype=float)), L, size)

    def log_q(theta, theta_new):
        theta = np.asarray(theta, dtype=float)
        theta_new = np.asarray(theta_new, dtype=float)
        r = theta_new - mean_map(theta)
        return log_norm - 0.5 * _whiten(L, r)

    return ProposalFamily(
        dim=d,
        kind=kind,
        sample=sample,
        log_q=log_q,
        log_density_sup=float(log_norm),
        mean_map=mean_map,
        params={"h": float(h), "C": C, **params},
    )


def make_rw_gaussian(h: float, C=None, dim: Optional[int] = None) -> ProposalFamily:
    """N(theta, h C); ``C`` defaults to the identity in dimension ``dim``."""
    C = _as_cov(C, dim)
    return _gaussian_family(lambda th: th, h, C, "random-walk-gaussian", {})


def make_mean_map_gaussian(mean_map: Callable, h: float, C=None, dim: Optional[int] = None,
                           kind: str = "mean-map-gaussian") -> ProposalFamily:
    """N(mu(theta), h C) for an arbitrary vectorized mean map ``mu``."""
    C = _as_cov(C, dim)
    return _gaussian_family(mean_map, h, C, kind, {})


def make_mala(target: TargetDensity, h: float, C=None) -> ProposalFamily:
    """Langevin proposal N(theta + h C grad log pi(theta) / 2, h C)."""
    if target.grad_log_density is None:
        raise ValueError("MALA needs the target gradient")
    C = _as_cov(C, target.dim)
    grad = target.grad_log_density

    def mean_map(theta):
        return theta + 0.5 * h * np.asarray(grad(theta), dtype=float) @ C.T

    return make_mean_map_gaussian(mean_map, h, C, kind="mala")


def make_independence(mean, h: float, C=None) -> ProposalFamily:
    """Independence sampler N(mean, h C), whatever the current state."""
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    C = _as_cov(C, mean.size)

    def mean_map(theta):
        return np.broadcast_to(mean, np.shape(theta))

    return make_mean_map_gaussian(mean_map, h, C, kind="independence")


def make_crank_nicolson(h: float, d: int) -> ProposalFamily:
    """N(sqrt(1 - h) theta, h I_d); reversible with respect to N(0, I_d)."""
    if not 0 < h <= 1:
        raise ValueError("Crank-Nicolson step h must lie in (0, 1]")
    rho = np.sqrt(1.0 - h)
    return _gaussian_family(lambda th: rho * th, h, np.eye(d), "crank-nicolson", {})


def make_student_t_proposal(nu: float, mean_map: Optional[Callable], h: float, C=None,
                            dim: Optional[int] = None) -> ProposalFamily:
    """Multivariate t_nu(mu(theta), h C); ``mean_map=None`` means random walk.

    ``log_density_sup`` is the density at its mode. The bound printed in the
    literature drops the ``nu^{d/2}`` factor; it is kept under
    ``diagnostics["reference_log_bound"]`` for comparison.
    """
    if not (nu > 0 and h > 0):
        raise ValueError("nu and h must be positive")
    C = _as_cov(C, dim)
    d = C.shape[0]
    mean_map = mean_map if mean_map is not None else (lambda th: th)
    L = cholesky(h * C)
    logdet_C = log_det_cholesky(cholesky(C))
    log_mode = float(gammaln(0.5 * (nu + d)) - gammaln(0.5 * nu)
                     - 0.5 * d * np.log(nu * np.pi) - 0.5 * log_det_cholesky(L))
    reference = float(gammaln(0.5 * (nu + d)) - gammaln(0.5 * nu)
                      - 0.5 * d * np.log(h * np.pi) - 0.5 * logdet_C)

    def sample(theta, stream: RandomStream, size=None):
        return sample_student_t(stream, nu, mean_map(np.asarray(theta, dtype=float)), L, size)

    def log_q(theta, theta_new):
        r = np.asarray(theta_new, dtype=float) - mean_map(np.asarray(theta, dtype=float))
        return log_mode - 0.5 * (nu + d) * np.log1p(_whiten(L, r) / nu)

    return ProposalFamily(
        dim=d,
        kind="student-t",
        sample=sample,
        log_q=log_q,
        log_density_sup=log_mode,
        mean_map=mean_map,
        params={"nu": float(nu), "h": float(h), "C": C},
        diagnostics={"reference_log_bound": reference},
    )


def density_sup(proposal: ProposalFamily) -> float:
    """log B, the log of a global bound on the proposal density."""
    if proposal.log_density_sup is None:
        raise Unbounded(f"proposal of kind {proposal.kind!r} has no finite density bound")
    return float(proposal.log_density_sup)
