"""Accept-reject-based (ARB) Markov kernels.

A kernel pairs a target, a proposal and an acceptance rule a(theta, theta').
Acceptance is evaluated in log space throughout so that ratios as extreme as
exp(+-1e6) neither overflow nor produce NaN.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .numerics import RandomStream, quadrature_1d
from .proposals import ProposalFamily
from .targets import LOG_2PI, TargetDensity

RULE_KINDS = ("mh", "barker", "portkey", "nonreversible-cn")


@dataclass(frozen=True)
class AcceptanceRule:
    """Acceptance function a(theta, theta').

    ``portkey`` uses d(theta, theta') = delta (pi q + pi' q'), which makes the
    portkey acceptance Barker's divided by 1 + delta. ``nonreversible-cn`` is the
    vorticity construction for a N(0, sigma2 I) target with a Crank-Nicolson
    proposal and needs a normalized target.
    """

    kind: str = "mh"
    delta: float = 0.0
    sigma2: Optional[float] = None

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise ValueError(f"unknown acceptance rule {self.kind!r}")
        if self.delta < 0:
            raise ValueError("portkey delta must be non-negative")
        if self.kind == "nonreversible-cn" and not (self.sigma2 is not None and self.sigma2 > 1):
            raise ValueError("non-reversible CN rule needs sigma2 > 1")

    @classmethod
    def mh(cls):
        return cls("mh")

    @classmethod
    def barker(cls):
        return cls("barker")

    @classmethod
    def portkey(cls, delta: float):
        return cls("portkey", delta=float(delta))

    @classmethod
    def nonreversible_cn(cls, sigma2: float):
        return cls("nonreversible-cn", sigma2=float(sigma2))


def _check_compatible(rule: AcceptanceRule, target: TargetDensity, proposal: ProposalFamily):
    if target.dim != proposal.dim:
        raise ValueError(f"target dim {target.dim} != proposal dim {proposal.dim}")
    if rule.kind == "nonreversible-cn":
        ok = (
            target.name == "gaussian"
            and np.isclose(target.params.get("sigma2", np.nan), rule.sigma2)
            and proposal.kind == "crank-nicolson"
        )
        if not ok:
            raise ValueError(
                "non-reversible CN rule requires a N(0, sigma2 I) target with matching sigma2 "
                "and a Crank-Nicolson proposal"
            )


def _log_accept_terms(rule: AcceptanceRule, lp0, lp1, lq01, lq10, theta=None, theta_new=None):
    """log a from log pi(theta), log pi(theta'), log q(theta, theta'), log q(theta', theta)."""
    fwd = np.asarray(lp0 + lq01, dtype=float)
    bwd = np.asarray(lp1 + lq10, dtype=float)
    dead = fwd == -np.inf
    with np.errstate(invalid="ignore"):
        delta = np.where(dead, 0.0, bwd - fwd)
    if rule.kind == "mh":
        out = np.minimum(0.0, delta)
    elif rule.kind in ("barker", "portkey"):
        out = -np.logaddexp(0.0, -delta) - np.log1p(rule.delta)
    else:
        d = np.shape(theta)[-1]
        log_c = -d * np.log(2.0) - 0.5 * d * np.log(rule.sigma2)

        def log_rho(x):
            return -0.5 * d * LOG_2PI - 0.5 * np.sum(np.asarray(x) ** 2, axis=-1)

        with np.errstate(over="ignore", invalid="ignore"):
            ratio = (np.exp(log_c + log_rho(theta) - lp0)
                     - np.exp(log_c + log_rho(theta_new) + lq10 - fwd)
                     + np.exp(delta))
            out = np.log(np.clip(ratio, 0.0, 1.0))
    return np.where(dead, 0.0, out)


def log_accept(rule: AcceptanceRule, target: TargetDensity, proposal: ProposalFamily, theta, theta_new):
    """log a(theta, theta'), broadcasting over leading axes."""
    _check_compatible(rule, target, proposal)
    theta = np.asarray(theta, dtype=float)
    theta_new = np.asarray(theta_new, dtype=float)
    return _log_accept_terms(
        rule,
        target.log_pdf(theta),
        target.log_pdf(theta_new),
        proposal.log_q(theta, theta_new),
        proposal.log_q(theta_new, theta),
        theta,
        theta_new,
    )


def accept_prob(rule: AcceptanceRule, target: TargetDensity, proposal: ProposalFamily, theta, theta_new):
    """a(theta, theta') in [0, 1]."""
    return np.exp(log_accept(rule, target, proposal, theta, theta_new))


@dataclass(frozen=True)
class ArbKernel:
    target: TargetDensity
    proposal: ProposalFamily
    rule: AcceptanceRule = field(default_factory=AcceptanceRule)

    def __post_init__(self):
        _check_compatible(self.rule, self.target, self.proposal)

    def log_accept(self, theta, theta_new):
        return log_accept(self.rule, self.target, self.proposal, theta, theta_new)


class StepResult(NamedTuple):
    state: np.ndarray
    accepted: np.ndarray
    proposal: np.ndarray


def step(kernel: ArbKernel, theta, stream: RandomStream) -> StepResult:
    """One transition; ``theta`` may be a single state or a batch ``(N, d)``."""
    theta = np.asarray(theta, dtype=float)
    prop = kernel.proposal.sample(theta, stream)
    la = kernel.log_accept(theta, prop)
    u = stream.uniform(size=theta.shape[:-1])
    accepted = np.log(u) < la
    return StepResult(np.where(accepted[..., None], prop, theta), accepted, prop)


class ChainRun(NamedTuple):
    states: np.ndarray     # (steps + 1, n_chains, d)
    accepted: np.ndarray   # (steps, n_chains)


def simulate_chains(kernel: ArbKernel, start, n_chains: int, steps: int, stream: RandomStream) -> ChainRun:
    """Run ``n_chains`` independent copies from a common start for ``steps`` steps."""
    start = np.asarray(start, dtype=float)
    states = np.empty((steps + 1, n_chains, kernel.target.dim))
    states[0] = start
    accepted = np.empty((steps, n_chains), dtype=bool)
    for t in range(steps):
        res = step(kernel, states[t], stream)
        states[t + 1] = res.state
        accepted[t] = res.accepted
    return ChainRun(states, accepted)


@dataclass(frozen=True)
class AcceptanceEstimate:
    mean: float
    std_err: float
    n: int
    log_mean: float
    seed: int
    stream_id: int


def _estimate(log_a: np.ndarray, stream: RandomStream) -> AcceptanceEstimate:
    a = np.exp(log_a)
    n = a.size
    return AcceptanceEstimate(
        mean=float(np.mean(a)),
        std_err=float(np.std(a, ddof=1) / np.sqrt(n)),
        n=n,
        log_mean=float(logsumexp(log_a) - np.log(n)),
        seed=stream.seed,
        stream_id=stream.stream_id,
    )


def mc_acceptance(kernel: ArbKernel, theta, n: int, stream: RandomStream) -> AcceptanceEstimate:
    """Plain Monte Carlo estimate of A(theta) = E_{theta' ~ Q(theta, .)} a(theta, theta')."""
    if n < 2:
        raise ValueError("need at least two Monte Carlo samples")
    theta = np.asarray(theta, dtype=float)
    props = kernel.proposal.sample(theta, stream, size=n)
    return _estimate(np.ravel(kernel.log_accept(theta, props)), stream)


def quadrature_acceptance(kernel: ArbKernel, theta, panels: int = 128, width: float = 12.0,
                          interval: Optional[Sequence[float]] = None) -> float:
    """A(theta) for a one-dimensional kernel by Gauss-Legendre quadrature.

    The default range is the proposal mean +- ``width`` proposal standard
    deviations, so it applies to Gaussian proposals; pass ``interval`` for
    heavier tails.
    """
    if kernel.target.dim != 1:
        raise ValueError("quadrature acceptance is one-dimensional")
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if interval is None:
        params = kernel.proposal.params
        sd = float(np.sqrt(params["h"] * np.asarray(params["C"]).item()))
        centre = float(kernel.proposal.mean_map(theta)[0])
        interval = (centre - width * sd, centre + width * sd)

    def integrand(x):
        pts = np.asarray(x, dtype=float)[:, None]
        return np.exp(kernel.log_accept(theta, pts) + kernel.proposal.log_q(theta, pts))

    return quadrature_1d(integrand, interval[0], interval[1], panels)


# ---------------------------------------------------------------------------
# random scan
# ---------------------------------------------------------------------------

def fix_coordinates(target: TargetDensity, block: Sequence[int], state) -> TargetDensity:
    """Unnormalized conditional of ``target`` on ``block`` with the rest held at ``state``."""
    block = np.asarray(block, dtype=int)
    state = np.asarray(state, dtype=float)

    def embed(x):
        x = np.asarray(x, dtype=float)
        full = np.broadcast_to(state, x.shape[:-1] + state.shape).copy()
        full[..., block] = x
        return full

    grad = None
    if target.grad_log_density is not None:
        grad = lambda x: np.asarray(target.grad_log_density(embed(x)))[..., block]  # noqa: E731
    return TargetDensity(
        dim=block.size,
        log_density=lambda x: target.log_pdf(embed(x)),
        grad_log_density=grad,
        name=f"{target.name}|fixed",
    )


@dataclass(frozen=True)
class RSComponent:
    """One coordinate-block updater of a random-scan kernel.

    ``conditional(state)`` may return the exact full conditional of the block;
    when absent the joint density with other coordinates fixed is used.
    """

    block: tuple
    proposal: ProposalFamily
    rule: AcceptanceRule = field(default_factory=AcceptanceRule)
    conditional: Optional[Callable[[np.ndarray], TargetDensity]] = None

    def __post_init__(self):
        object.__setattr__(self, "block", tuple(int(i) for i in self.block))
        if self.proposal.dim != len(self.block):
            raise ValueError("proposal dimension must match block size")
        if self.rule.kind == "nonreversible-cn":
            raise ValueError("random-scan components support MH, Barker and portkey rules")

    def conditional_target(self, target: TargetDensity, state) -> TargetDensity:
        if self.conditional is not None:
            return self.conditional(np.asarray(state, dtype=float))
        return fix_coordinates(target, self.block, state)


@dataclass(frozen=True)
class RandomScanKernel:
    target: TargetDensity
    components: tuple
    weights: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        w = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "weights", w)
        if len(comps) == 0 or len(comps) != len(w):
            raise ValueError("need one selection probability per component")
        if any(not (0.0 < x <= 1.0) for x in w):
            raise ValueError("selection probabilities must lie in (0, 1]")
        if abs(sum(w) - 1.0) > 1e-12:
            raise ValueError("selection probabilities must sum to 1")
        seen = set()
        for c in comps:
            if seen.intersection(c.block) or any(not 0 <= i < self.target.dim for i in c.block):
                raise ValueError("component blocks must be disjoint coordinate sets")
            seen.update(c.block)


class RSStepResult(NamedTuple):
    state: np.ndarray
    component: np.ndarray
    accepted: np.ndarray


def rs_step(rs: RandomScanKernel, theta, stream: RandomStream) -> RSStepResult:
    """Random-scan transition: pick block k w.p. lambda_k, then an ARB update of that block.

    Works on a single state or a batch ``(N, d)``. The acceptance ratio of the
    conditional equals the joint ratio, so the joint density is used directly.
    With one component no selection draw is made, so the draw sequence matches
    :func:`step`.
    """
    theta = np.asarray(theta, dtype=float)
    batch = theta.shape[:-1]
    M = len(rs.components)
    if M == 1:
        k = np.zeros(batch, dtype=int)
    else:
        k = np.asarray(stream.choice(M, p=np.asarray(rs.weights), size=batch if batch else None))
    out = theta.copy()
    accepted = np.zeros(batch, dtype=bool)
    flat_theta = theta.reshape(-1, theta.shape[-1])
    flat_out = out.reshape(-1, theta.shape[-1])
    flat_k = np.atleast_1d(k).ravel()
    flat_acc = accepted.reshape(-1)
    for j, comp in enumerate(rs.components):
        rows = np.nonzero(flat_k == j)[0]
        if rows.size == 0:
            continue
        block = list(comp.block)
        cur = flat_theta[rows]
        x = cur[:, block]
        x_new = comp.proposal.sample(x, stream)
        cand = cur.copy()
        cand[:, block] = x_new
        la = _log_accept_terms(
            comp.rule,
            rs.target.log_pdf(cur),
            rs.target.log_pdf(cand),
            comp.proposal.log_q(x, x_new),
            comp.proposal.log_q(x_new, x),
        )
        u = stream.uniform(size=rows.size)
        acc = np.log(u) < la
        flat_out[rows] = np.where(acc[:, None], cand, cur)
        flat_acc[rows] = acc
    return RSStepResult(out, k, accepted)


def rs_component_acceptances(rs: RandomScanKernel, theta, n: int, stream: RandomStream):
    """Per-block estimates of A_{theta^(-k)}(theta^k) and their lambda-weighted sum."""
    theta = np.asarray(theta, dtype=float)
    estimates = []
    for comp in rs.components:
        cond = comp.conditional_target(rs.target, theta)
        kernel = ArbKernel(cond, comp.proposal, comp.rule)
        estimates.append(mc_acceptance(kernel, theta[list(comp.block)], n, stream))
    combined = float(sum(w * e.mean for w, e in zip(rs.weights, estimates)))
    return estimates, min(max(combined, 0.0), 1.0)


def with_rule(kernel: ArbKernel, rule: AcceptanceRule) -> ArbKernel:
    """Same target and proposal, different acceptance function."""
    return replace(kernel, rule=rule)
