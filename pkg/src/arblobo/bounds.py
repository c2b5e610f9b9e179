"""Closed-form convergence lower bounds and acceptance upper bounds.

Acceptance upper bounds are evaluated in log space and come in pairs:
``log_<name>`` returns the raw (possibly > 1, i.e. vacuous) log value and
``<name>`` returns it clamped to [0, 1].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np


def _check_prob(A, name="A"):
    A = float(A)
    if not 0.0 <= A <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {A}")
    return A


def _clamp(log_value: float) -> float:
    return float(np.exp(min(log_value, 0.0)))


@dataclass(frozen=True)
class BoundCurve:
    kind: str
    accept: float
    horizon: int
    values: np.ndarray
    constant: Optional[float] = None
    metadata: Mapping = field(default_factory=dict)

    def rows(self):
        return [(t, float(v)) for t, v in zip(range(1, self.horizon + 1), self.values)]


# ---------------------------------------------------------------------------
# total variation
# ---------------------------------------------------------------------------

def tv_lower_bound(A: float, t: int) -> float:
    """(1 - A)^t."""
    A = _check_prob(A)
    if t < 1:
        raise ValueError("t must be a positive integer")
    return float((1.0 - A) ** t)


def tv_lower_curve(A: float, T: int) -> BoundCurve:
    A = _check_prob(A)
    if T < 1:
        raise ValueError("horizon must be positive")
    t = np.arange(1, T + 1)
    return BoundCurve("tv", A, T, (1.0 - A) ** t.astype(float))


def geo_rate_lb_tv(A_inf: float) -> float:
    """Any total-variation geometric rate satisfies rho >= 1 - inf A."""
    return 1.0 - _check_prob(A_inf, "A_inf")


# ---------------------------------------------------------------------------
# Wasserstein
# ---------------------------------------------------------------------------

def norm_equivalence_constant(norm_tag: str, d: int) -> float:
    """Largest C0 with ``||x|| >= C0 ||x||_1`` for the named norm on R^d."""
    if d < 1:
        raise ValueError("d must be positive")
    table = {"l1": 1.0, "l2": d ** -0.5, "linf": 1.0 / d}
    try:
        return table[norm_tag]
    except KeyError:
        raise ValueError(f"unknown norm {norm_tag!r}; expected one of {sorted(table)}") from None


def log_wasserstein_constant(C0: float, d: int, s: float) -> float:
    if not (C0 > 0 and d >= 1 and s > 0):
        raise ValueError("need C0 > 0, d >= 1, s > 0")
    return float(np.log(C0) + np.log(d) - np.log(2.0) - np.log(s) / d - (1.0 + 1.0 / d) * np.log1p(d))


def wasserstein_constant(C0: float, d: int, s: float) -> float:
    """C_{d,pi} = C0 d / (2 s^{1/d} (1 + d)^{1 + 1/d})."""
    return float(np.exp(log_wasserstein_constant(C0, d, s)))


def wasserstein_lower_bound(A: float, t: int, d: int, constant: float) -> float:
    """C_{d,pi} (1 - A)^{t (1 + 1/d)}."""
    A = _check_prob(A)
    if t < 1 or d < 1 or not constant > 0:
        raise ValueError("need t >= 1, d >= 1 and a positive constant")
    return float(constant * (1.0 - A) ** (t * (1.0 + 1.0 / d)))


def wasserstein_lower_curve(A: float, T: int, d: int, constant: float, **metadata) -> BoundCurve:
    A = _check_prob(A)
    if T < 1 or d < 1 or not constant > 0:
        raise ValueError("need T >= 1, d >= 1 and a positive constant")
    t = np.arange(1, T + 1)
    values = constant * (1.0 - A) ** (t * (1.0 + 1.0 / d))
    return BoundCurve("wasserstein", A, T, values, constant, {"d": d, **metadata})


def geo_rate_lb_wass(A_inf: float, d: int) -> float:
    """Lower bound on a Wasserstein geometric rate: (1 - inf A)^{(d+1)/d}."""
    A_inf = _check_prob(A_inf, "A_inf")
    if d < 1:
        raise ValueError("d must be positive")
    return float((1.0 - A_inf) ** ((d + 1.0) / d))


# ---------------------------------------------------------------------------
# acceptance upper bounds
# ---------------------------------------------------------------------------

def log_sc_accept_ub(h: float, xi: float, d: int, v_norm: float = 0.0) -> float:
    if not (h > 0 and xi > 0 and v_norm >= 0):
        raise ValueError("need h > 0, xi > 0, v_norm >= 0")
    r = h / xi
    return float(-0.5 * d * np.log1p(r) + 0.5 * h * v_norm * v_norm / (1.0 + r))


def sc_accept_ub(h: float, xi: float, d: int, v_norm: float = 0.0) -> float:
    """RWMH acceptance bound at a point with subgradient norm ``v_norm``
    for a (1/xi)-strongly log-concave target. ``v_norm=0`` is the mode case."""
    return _clamp(log_sc_accept_ub(h, xi, d, v_norm))


def accept_ub_bounded_proposal(log_pi_at_point: float, log_B: float) -> float:
    """MH acceptance at a point is at most B / pi(point) when q <= B."""
    return _clamp(float(log_B) - float(log_pi_at_point))


def log_zellner_accept_ub(h: float, n: int, gamma: float, g: float, d: int) -> float:
    if not (h >= 0 and n >= 1 and 0 < gamma < 1 and g > 0 and d >= 1):
        raise ValueError("need h >= 0, n >= 1, gamma in (0, 1), g > 0, d >= 1")
    return float(-0.5 * d * np.log1p(h * n * (1.0 - np.sqrt(gamma)) ** 2 / (2.0 * g)))


def zellner_accept_ub(h: float, n: int, gamma: float, g: float, d: int) -> float:
    """Large-n acceptance bound at the mode under Zellner's g-prior."""
    return _clamp(log_zellner_accept_ub(h, n, gamma, g, d))


def zellner_empirical_accept_ub(h: float, gram_min_eig: float, g: float, d: int) -> float:
    """(1 + h lambda_min(X^T X) / g)^{-d/2}: the strong-convexity bound at the mode."""
    return sc_accept_ub(h, g / gram_min_eig, d)


@dataclass(frozen=True)
class LaplaceParams:
    """Inputs to the Laplace-type lower bound on a concentrating density's peak.

    Only ``lambda0`` (inverse local curvature of f_n) and ``c`` enter the
    conclusion. The hypotheses that make it valid (local convexity radius,
    strict optimality gap, tail integral, dimension growth) are not checked.
    """

    lambda0: float
    c: float
    n: int
    d: int

    def __post_init__(self):
        if not self.lambda0 > 0:
            raise ValueError("lambda0 must be positive")
        if not 0 < self.c <= 1:
            raise ValueError("c must lie in (0, 1]")
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be positive")


def laplace_density_lb(params: LaplaceParams) -> float:
    """log of (1/(1+c)) (n / (2 pi lambda0))^{d/2}."""
    p = params
    return float(0.5 * p.d * np.log(p.n / (2.0 * np.pi * p.lambda0)) - np.log1p(p.c))


def laplace_accept_ub(params: LaplaceParams, log_B: float) -> float:
    """B (1 + c) (2 pi lambda0 / n)^{d/2}, clamped."""
    return accept_ub_bounded_proposal(laplace_density_lb(params), log_B)


def log_flat_logistic_accept_ub(lambda0: float, n: int, h: float, d: int, log_det_C: float = 0.0) -> float:
    if not (lambda0 > 0 and n >= 1 and h > 0):
        raise ValueError("need lambda0 > 0, n >= 1, h > 0")
    return float(0.5 * d * np.log(lambda0 / (n * h)) + np.log(2.0) - 0.5 * log_det_C)


def flat_logistic_accept_ub(lambda0: float, n: int, h: float, d: int, log_det_C: float = 0.0) -> float:
    """(lambda0 / (n h))^{d/2} 2 / det(C)^{1/2}, clamped."""
    return _clamp(log_flat_logistic_accept_ub(lambda0, n, h, d, log_det_C))


def log_mixture_accept_ub(b: float, h: float, x: float, y: float) -> float:
    if not (b > 1 and h > 0):
        raise ValueError("need b > 1 and h > 0")
    b2 = b * b
    return float(-np.log(b * h) - np.logaddexp(-(x * x + b2 * y * y), -(b2 * x * x + y * y)))


def mixture_accept_ub(b: float, h: float, x: float, y: float) -> float:
    """RWMH acceptance bound at (x, y) for the two-component Gaussian mixture."""
    return _clamp(log_mixture_accept_ub(b, h, x, y))


def rs_combined_acceptance(weights: Sequence[float], accepts: Sequence[float]) -> float:
    """sum_k lambda_k A_k for a random-scan kernel."""
    w = np.asarray(weights, dtype=float)
    a = np.asarray(accepts, dtype=float)
    if w.shape != a.shape or w.size == 0:
        raise ValueError("need one acceptance value per weight")
    if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be positive and sum to 1")
    if np.any((a < 0) | (a > 1)):
        raise ValueError("acceptance values must lie in [0, 1]")
    return float(min(max(w @ a, 0.0), 1.0))
