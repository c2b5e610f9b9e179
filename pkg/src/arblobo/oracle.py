"""Finite-state laboratory for ARB chains.

On a finite state space everything the continuous theory only bounds can be
computed exactly: t-step distributions, total variation, spectral gaps,
conductance and Wasserstein distances (by a transportation simplex). The
finite analogue of the total-variation lower bound picks up a ``-pi_i`` term
because singletons carry stationary mass here.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InfeasibleMarginals, InsufficientCoverage, NotReversible, TooManyStates
from .kernels import AcceptanceRule, ArbKernel
from .numerics import RandomStream, quadrature_1d, sym_eigen


# ---------------------------------------------------------------------------
# chains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteChain:
    pi: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    accept: np.ndarray
    rule: AcceptanceRule
    coords: Optional[np.ndarray] = None
    metadata: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.pi.size

    @property
    def accept_off(self) -> np.ndarray:
        """A_off(i) = sum_{j != i} a_ij q_ij, the probability of leaving i."""
        off = self.accept * self.Q
        return off.sum(axis=1) - np.diag(off)

    def detailed_balance_error(self) -> float:
        F = self.pi[:, None] * self.P
        return float(np.max(np.abs(F - F.T)))

    def stationarity_residual(self) -> float:
        return float(np.sum(np.abs(self.pi @ self.P - self.pi)))


def _as_rule(rule) -> AcceptanceRule:
    if isinstance(rule, AcceptanceRule):
        return rule
    return AcceptanceRule(str(rule))


def finite_acceptance(rule, pi: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Acceptance matrix a_ij for counting measure; a_ij = 1 where pi_i q_ij = 0."""
    rule = _as_rule(rule)
    fwd = pi[:, None] * Q
    bwd = fwd.T
    live = fwd > 0
    safe = np.where(live, fwd, 1.0)
    if rule.kind == "mh":
        a = np.minimum(1.0, bwd / safe)
    elif rule.kind in ("barker", "portkey"):
        a = bwd / (safe + bwd) / (1.0 + rule.delta)
    else:
        raise ValueError(f"rule {rule.kind!r} has no finite-state construction")
    return np.where(live, a, 1.0)


def build_finite_arb(pi, Q, rule="mh", coords=None, validate: bool = True) -> FiniteChain:
    """ARB chain on {0..m-1}: P_ij = a_ij Q_ij off the diagonal, rejections on it."""
    pi = np.asarray(pi, dtype=float)
    Q = np.asarray(Q, dtype=float)
    m = pi.size
    if pi.ndim != 1 or np.any(pi <= 0) or abs(pi.sum() - 1.0) > 1e-12:
        raise ValueError("pi must be a strictly positive probability vector")
    if Q.shape != (m, m) or np.any(Q < 0) or np.max(np.abs(Q.sum(axis=1) - 1.0)) > 1e-12:
        raise ValueError("Q must be an m x m stochastic matrix")
    pi = pi / pi.sum()
    rule = _as_rule(rule)
    a = finite_acceptance(rule, pi, Q)
    P = a * Q
    np.fill_diagonal(P, 0.0)
    np.fill_diagonal(P, 1.0 - P.sum(axis=1))
    chain = FiniteChain(pi, P, Q, a, rule, None if coords is None else np.asarray(coords, dtype=float))
    if validate:
        if np.any(P < -1e-15) or np.max(np.abs(P.sum(axis=1) - 1.0)) > 1e-12:
            raise AssertionError("constructed P is not stochastic")
        if chain.detailed_balance_error() > 1e-12:
            raise AssertionError("detailed balance violated")
        if chain.stationarity_residual() > 1e-12:
            raise AssertionError("pi is not stationary for P")
    return chain


def random_finite_chain(stream: RandomStream, m_max: int = 12, rule=None, m_min: int = 2) -> FiniteChain:
    """Random MH or Barker chain with random pi and a random sparse proposal."""
    m = int(stream.integers(m_min, m_max + 1))
    pi = stream.dirichlet(np.ones(m)) + 1e-3
    pi /= pi.sum()
    keep = stream.uniform(size=(m, m)) < 0.6
    keep[np.arange(m), stream.integers(0, m, size=m)] = True
    raw = stream.uniform(size=(m, m)) * keep
    Q = raw / raw.sum(axis=1, keepdims=True)
    if rule is None:
        rule = ("mh", "barker")[int(stream.integers(0, 2))]
    coords = stream.uniform(0.0, 3.0, size=(m, 1))
    return build_finite_arb(pi, Q, rule, coords=coords)


# ---------------------------------------------------------------------------
# total variation
# ---------------------------------------------------------------------------

def exact_tv_curve(chain: FiniteChain, start, T: int) -> np.ndarray:
    """||P^t(start, .) - pi||_TV for t = 1..T; ``start`` is a state or a distribution."""
    if T < 1:
        raise ValueError("T must be positive")
    if np.ndim(start) == 0:
        row = np.zeros(chain.m)
        row[int(start)] = 1.0
    else:
        row = np.asarray(start, dtype=float)
    out = np.empty(T)
    for t in range(T):
        row = row @ chain.P
        out[t] = 0.5 * np.sum(np.abs(row - chain.pi))
    return out


@dataclass(frozen=True)
class TVCheckReport:
    worst_margin: float
    worst_state: int
    worst_t: int
    checked: int
    violations: list


def finite_tv_theorem_check(chain: FiniteChain, T: int, tol: float = 1e-10, strict: bool = True) -> TVCheckReport:
    """Check TV(t) >= (1 - A_off(i))^t - pi_i for every start i and t <= T."""
    M = np.eye(chain.m)
    stay = 1.0 - chain.accept_off
    worst = (np.inf, -1, -1)
    violations = []
    for t in range(1, T + 1):
        M = M @ chain.P
        tv = 0.5 * np.sum(np.abs(M - chain.pi), axis=1)
        margin = tv - (stay ** t - chain.pi)
        i = int(np.argmin(margin))
        if margin[i] < worst[0]:
            worst = (float(margin[i]), i, t)
        for j in np.nonzero(margin < -tol)[0]:
            violations.append((int(j), t, float(margin[j])))
    report = TVCheckReport(worst[0], worst[1], worst[2], chain.m * T, violations)
    if strict and violations:
        i, t, mg = violations[0]
        raise AssertionError(f"finite TV bound violated at state {i}, t={t}: margin {mg:.3e}")
    return report


# ---------------------------------------------------------------------------
# spectral gap and conductance
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralGap:
    gap: float
    beta: float
    eigenvalues: np.ndarray


def spectral_gap(chain: FiniteChain, tol: float = 1e-10) -> SpectralGap:
    """1 - beta with beta the largest |eigenvalue| on mean-zero functions."""
    if chain.detailed_balance_error() > tol:
        raise NotReversible("spectral gap needs a reversible chain")
    root = np.sqrt(chain.pi)
    S = root[:, None] * chain.P / root[None, :]
    values, vectors = sym_eigen(0.5 * (S + S.T))
    top = int(np.argmax(np.abs(vectors.T @ root)))
    rest = np.delete(values, top)
    beta = float(np.max(np.abs(rest))) if rest.size else 0.0
    beta = min(beta, 1.0)
    return SpectralGap(1.0 - beta, beta, values)


def conductance(chain: FiniteChain, max_states: int = 20):
    """Exact k_P by enumerating all 2^{m-1} - 1 proper subsets.

    Stationary flow out of B equals flow into B, so k_P(B) = k_P(B^c) and only
    subsets avoiding the last state are visited.

    Returns ``(k_P, minimizing subset as a tuple of states)``.
    """
    m = chain.m
    if m > max_states:
        raise TooManyStates(f"{m} states exceeds the exhaustive limit of {max_states}")
    if m < 2:
        raise ValueError("conductance needs at least two states")
    pi, P = chain.pi, chain.P
    bits = np.arange(m - 1)
    best, best_mask = np.inf, 0
    total = 2 ** (m - 1)
    chunk = 1 << 15
    for lo in range(1, total, chunk):
        masks = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        inside = ((masks[:, None] >> bits) & 1).astype(float)
        inside = np.hstack([inside, np.zeros((masks.size, 1))])
        mass = inside @ pi
        flow = np.sum(((inside * pi) @ P) * (1.0 - inside), axis=1)
        k = flow / (mass * (1.0 - mass))
        j = int(np.argmin(k))
        if k[j] < best:
            best, best_mask = float(k[j]), int(masks[j])
    subset = tuple(i for i in range(m - 1) if best_mask >> i & 1)
    return best, subset


def singleton_conductance_bound(chain: FiniteChain) -> float:
    """min_i A_off(i) / (1 - pi_i), i.e. k_P over singleton sets."""
    return float(np.min(chain.accept_off / (1.0 - chain.pi)))


# ---------------------------------------------------------------------------
# exact optimal transport
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransportPlan:
    plan: np.ndarray
    cost: float
    row_duals: np.ndarray
    col_duals: np.ndarray
    duality_gap: float
    min_reduced_cost: float
    pivots: int

    @property
    def certified(self) -> bool:
        return self.duality_gap <= 1e-9 and self.min_reduced_cost >= -1e-9


def _least_cost_basis(mu, nu, C):
    """Matrix-minimum starting basis: m + n - 1 cells forming a spanning tree."""
    m, n = len(mu), len(nu)
    a, b = list(mu), list(nu)
    row_live, col_live = [True] * m, [True] * n
    rows_left, cols_left = m, n
    flows = {}
    for flat in np.argsort(C, axis=None, kind="stable").tolist():
        i, j = divmod(flat, n)
        if not (row_live[i] and col_live[j]):
            continue
        x = min(a[i], b[j])
        flows[(i, j)] = x
        a[i] -= x
        b[j] -= x
        if rows_left == 1 and cols_left == 1:
            break
        if (a[i] <= b[j] and rows_left > 1) or cols_left == 1:
            row_live[i] = False
            rows_left -= 1
        else:
            col_live[j] = False
            cols_left -= 1
    return flows


def _tree_duals(basis, C, m, n):
    adj = [[] for _ in range(m + n)]
    for i, j in basis:
        adj[i].append(m + j)
        adj[m + j].append(i)
    pot = [None] * (m + n)
    pot[0] = 0.0
    stack = [0]
    while stack:
        node = stack.pop()
        for nb in adj[node]:
            if pot[nb] is None:
                cost = C[node][nb - m] if node < m else C[nb][node - m]
                pot[nb] = cost - pot[node]
                stack.append(nb)
    return pot[:m], pot[m:], adj


def _tree_path(adj, src, dst):
    parent = {src: None}
    stack = [src]
    while stack:
        node = stack.pop()
        if node == dst:
            break
        for nb in adj[node]:
            if nb not in parent:
                parent[nb] = node
                stack.append(nb)
    path = [dst]
    while path[-1] != src:
        path.append(parent[path[-1]])
    return path[::-1]


def exact_w1(mu, nu, cost, max_pivots: int = 100_000) -> TransportPlan:
    """Optimal transport between two finite measures by the transportation simplex.

    Least-cost starting basis, Dantzig pricing, Bland's rule after a run of
    degenerate pivots. Optimality is certified by the dual potentials.
    """
    mu = np.asarray(mu, dtype=float).ravel()
    nu = np.asarray(nu, dtype=float).ravel()
    C = np.asarray(cost, dtype=float)
    m, n = mu.size, nu.size
    if C.shape != (m, n):
        raise ValueError(f"cost has shape {C.shape}, expected {(m, n)}")
    if np.any(mu < 0) or np.any(nu < 0) or abs(mu.sum() - 1.0) > 1e-9 or abs(nu.sum() - 1.0) > 1e-9:
        raise InfeasibleMarginals("marginals must be probability vectors")
    nu = nu * (mu.sum() / nu.sum())
    scale = max(1.0, float(np.max(np.abs(C))))
    eps = 1e-12 * scale
    Cl = C.tolist()

    flows = _least_cost_basis(mu.tolist(), nu.tolist(), C)
    pivots = 0
    degenerate_run = 0
    while True:
        u, v, adj = _tree_duals(flows, Cl, m, n)
        R = C - np.asarray(u)[:, None] - np.asarray(v)[None, :]
        bland = degenerate_run > 50
        if bland:
            neg = np.flatnonzero(R < -eps)
            if neg.size == 0:
                break
            ei, ej = divmod(int(neg[0]), n)
        else:
            flat = int(np.argmin(R))
            ei, ej = divmod(flat, n)
            if R[ei, ej] >= -eps:
                break
        if pivots >= max_pivots:
            raise RuntimeError("transportation simplex did not terminate")
        path = _tree_path(adj, ei, m + ej)
        edges = [(p, q - m) if p < m else (q, p - m) for p, q in zip(path[:-1], path[1:])]
        minus = edges[0::2]
        plus = edges[1::2]
        theta = min(flows[c] for c in minus)
        ties = [c for c in minus if flows[c] <= theta]
        leaving = min(ties) if bland else ties[0]
        theta = max(theta, 0.0)
        for c in minus:
            flows[c] -= theta
        for c in plus:
            flows[c] += theta
        del flows[leaving]
        flows[(ei, ej)] = theta
        degenerate_run = degenerate_run + 1 if theta <= 0.0 else 0
        pivots += 1

    X = np.zeros((m, n))
    for (i, j), x in flows.items():
        X[i, j] = max(x, 0.0)
    u, v = np.asarray(u), np.asarray(v)
    primal = float(np.sum(X * C))
    dual = float(u @ mu + v @ nu)
    return TransportPlan(
        plan=X,
        cost=primal,
        row_duals=u,
        col_duals=v,
        duality_gap=abs(primal - dual),
        min_reduced_cost=float(np.min(R)),
        pivots=pivots,
    )


def truncated_metric(coords: Optional[np.ndarray], m: int) -> np.ndarray:
    """Pairwise ``min(|x - y|, 1)``; the discrete metric when ``coords`` is None."""
    if coords is None:
        return 1.0 - np.eye(m)
    x = np.asarray(coords, dtype=float).reshape(m, -1)
    D = np.sqrt(np.sum((x[:, None, :] - x[None, :, :]) ** 2, axis=-1))
    return np.minimum(D, 1.0)


@dataclass(frozen=True)
class EquivReport:
    beta: float
    fitted_rate: float
    constant: float
    distances: np.ndarray      # (m, T): W_{d^1}(P^t(i, .), pi) for t = 1..T
    fit_times: np.ndarray
    fit_envelope: np.ndarray   # max_i W_{d^1}(P^t(i, .), pi) at ``fit_times``
    passed: bool


def _w_rows(M: np.ndarray, pi: np.ndarray, cost: np.ndarray) -> np.ndarray:
    # long products of P pick up rounding of order 1e-16; project back onto the simplex
    rows = np.clip(M, 0.0, None)
    rows /= rows.sum(axis=1, keepdims=True)
    return np.array([exact_w1(row, pi, cost).cost for row in rows])


def finite_equiv_illustration(chain: FiniteChain, T: int = 30, tol: float = 0.02,
                              floor: float = 1e-10, strict: bool = True,
                              max_horizon: int = 4000, fit_points: int = 16) -> EquivReport:
    """Exponential decay of W_{d^1}(P^t(i, .), pi) at a rate no worse than beta.

    The distances from every start are reported for t <= T. The rate is a
    log-linear fit to the worst-start envelope over a late window, which is
    pushed out to about 20 / (1 - beta) steps (capped at ``max_horizon``) so
    that slowly mixing chains are past their transient. W_{d^1} need not be
    monotone in t, so a short window can overstate the rate.
    """
    gap = spectral_gap(chain)
    cost = truncated_metric(chain.coords, chain.m)
    pi = chain.pi
    horizon = T
    if gap.gap > 0:
        horizon = int(min(max(T, np.ceil(20.0 / gap.gap)), max_horizon))
    else:
        horizon = max_horizon
    tail = np.unique(np.linspace(max(1, horizon // 2), horizon, fit_points).round().astype(int))
    wanted = set(range(1, T + 1)) | set(tail.tolist())

    W = np.empty((chain.m, T))
    envelope = {}
    M = np.eye(chain.m)
    for t in range(1, max(horizon, T) + 1):
        M = M @ chain.P
        if t not in wanted:
            continue
        w = _w_rows(M, pi, cost)
        if t <= T:
            W[:, t - 1] = w
        envelope[t] = float(np.max(w))

    ts = np.array(sorted(envelope))
    env = np.array([envelope[t] for t in ts])
    ok = env > floor
    if ok.sum() >= 2:
        tt, ll = ts[ok], np.log(env[ok])
        late = tt >= tail[0]
        if late.sum() < 2:
            keep = max(2, tt.size // 2)
            late = np.zeros(tt.size, dtype=bool)
            late[-keep:] = True
        fitted = float(np.exp(np.polyfit(tt[late], ll[late], 1)[0]))
    else:
        fitted = 0.0
    steps = np.arange(1, T + 1)
    if gap.beta > 0:
        constant = float(np.max(W / gap.beta ** steps[None, :]))
    else:
        constant = float(np.max(W))
    passed = fitted <= gap.beta + tol
    if strict and not passed:
        raise AssertionError(f"fitted W decay rate {fitted:.4f} exceeds beta {gap.beta:.4f} + {tol}")
    return EquivReport(gap.beta, fitted, constant, W, ts[ok] if ok.any() else ts, env, passed)


# ---------------------------------------------------------------------------
# discretization of a one-dimensional kernel
# ---------------------------------------------------------------------------

def discretize_kernel_1d(kernel: ArbKernel, a: float, b: float, m: int, coverage: float = 1e-8) -> FiniteChain:
    """Midpoint-grid version of a 1-D ARB kernel on ``[a, b]`` with ``m`` cells.

    Proposal rows are renormalized onto the grid and acceptance is recomputed
    from the discrete pi and Q, so the result is exactly reversible.
    """
    if kernel.target.dim != 1:
        raise ValueError("only one-dimensional kernels can be discretized")
    if not 2 <= m <= 400:
        raise ValueError("m must be between 2 and 400")
    target = kernel.target
    width = b - a

    def dens(x):
        return np.exp(target.log_pdf(np.asarray(x, dtype=float)[:, None]))

    inner = quadrature_1d(dens, a, b, panels=128)
    outer = inner + quadrature_1d(dens, a - 4 * width, a, 128) + quadrature_1d(dens, b, b + 4 * width, 128)
    missing = 1.0 - inner / outer
    if missing > coverage:
        raise InsufficientCoverage(f"grid misses {missing:.2e} of the target mass")

    h = width / m
    x = a + h * (np.arange(m) + 0.5)
    logq = kernel.proposal.log_q(x[:, None, None], x[None, :, None])
    Q = np.exp(logq - logq.max(axis=1, keepdims=True))
    Q /= Q.sum(axis=1, keepdims=True)
    logp = target.log_pdf(x[:, None])
    pi = np.exp(logp - logp.max())
    pi /= pi.sum()
    chain = build_finite_arb(pi, Q, kernel.rule, coords=x[:, None], validate=False)
    chain.metadata.update({"grid": x, "cell_width": h, "missing_mass": missing,
                           "stationarity_residual": chain.stationarity_residual()})
    return chain
