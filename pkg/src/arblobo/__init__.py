"""Acceptance-probability lower bounds for accept-reject-based Markov chains.

The expected acceptance probability A(theta) of a Metropolis-Hastings type
chain controls how fast it can possibly converge: the chain stays put with
probability at least 1 - A(theta) at every step. This package estimates A,
evaluates the resulting total-variation and Wasserstein lower bounds,
checks them exactly on finite chains and runs the logistic-regression
scaling studies.
"""
from .bounds import (
    geo_rate_lb_tv,
    geo_rate_lb_wass,
    sc_accept_ub,
    tv_lower_bound,
    tv_lower_curve,
    wasserstein_constant,
    wasserstein_lower_curve,
    zellner_accept_ub,
)
from .kernels import AcceptanceRule, ArbKernel, mc_acceptance, quadrature_acceptance, step
from .numerics import RandomStream
from .proposals import make_crank_nicolson, make_mala, make_rw_gaussian
from .targets import TargetDensity, make_gaussian

__version__ = "0.1.0"

__all__ = [
    "AcceptanceRule",
    "ArbKernel",
    "RandomStream",
    "TargetDensity",
    "geo_rate_lb_tv",
    "geo_rate_lb_wass",
    "make_crank_nicolson",
    "make_gaussian",
    "make_mala",
    "make_rw_gaussian",
    "mc_acceptance",
    "quadrature_acceptance",
    "sc_accept_ub",
    "step",
    "tv_lower_bound",
    "tv_lower_curve",
    "wasserstein_constant",
    "wasserstein_lower_curve",
    "zellner_accept_ub",
]
