"""Simulation studies: logistic-regression scaling experiments, worked examples
and the finite-chain verification suite.

Every replication draws from its own stream keyed by (grid point,
replication), so results do not depend on worker count or scheduling and
CSV output is byte-identical for a fixed seed.
"""
from __future__ import annotations

import csv
import io
import json
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import bounds
from .errors import ConfigError, DivergenceSuspected, MaxIterExceeded
from .kernels import (
    AcceptanceRule,
    ArbKernel,
    RandomScanKernel,
    RSComponent,
    mc_acceptance,
    quadrature_acceptance,
    rs_component_acceptances,
)
from .numerics import RandomStream
from .oracle import (
    build_finite_arb,
    conductance,
    exact_tv_curve,
    finite_equiv_illustration,
    finite_tv_theorem_check,
    random_finite_chain,
    singleton_conductance_bound,
    spectral_gap,
)
from .proposals import make_crank_nicolson, make_rw_gaussian
from .targets import (
    LogisticData,
    conditional_1d,
    find_mode,
    make_gaussian,
    make_gaussian_mixture_2d,
    make_logistic_flat,
    make_logistic_zellner,
    make_subexponential_2d,
    smallest_hessian_eigenvalue,
)

EXPERIMENTS = ("zellner", "flat-logistic", "oracle-suite", "examples")
Y_MECHANISMS = ("logistic", "fair-coin")

ZELLNER_GRID = ((2, 8), (4, 16), (4, 24), (8, 32), (10, 40), (12, 48), (14, 56))
ZELLNER_RULES = ("opt_scale(5.6644)", "const(0.6)", "inv_dn(1)")
FLAT_GRID = ((10, 100), (10, 200), (10, 300), (10, 400))
FLAT_RULES = ("inv_n(5)", "inv_n(1)", "inv_n(0.1)", "const(0.1)")

ROW_HEADER = ("experiment", "replication", "d", "n", "h_rule", "h", "accept_mean", "accept_se",
              "log_accept", "rate_lb", "closed_form_ub", "flag")
SUMMARY_HEADER = ("experiment", "d", "n", "h_rule", "h", "replications", "mean_rate_lb", "sd_rate_lb",
                  "mean_log_accept", "sd_log_accept", "reference_ub")

EXAMPLE_MC_SAMPLES = 100_000
_MAX_REGENERATIONS = 20
_SEPARATION_NORM = 50.0


# ---------------------------------------------------------------------------
# step-size rules
# ---------------------------------------------------------------------------

_RULE_RE = re.compile(r"^\s*(const|opt_scale|inv_dn|inv_n)\s*\(\s*([^()\s]+)\s*\)\s*$")


@dataclass(frozen=True)
class HRule:
    """Named step-size rule: const(c) = c, opt_scale(c) = c/d, inv_dn(c) = c/(dn), inv_n(c) = c/n."""

    kind: str
    c: float
    text: str

    @classmethod
    def parse(cls, spec: str) -> "HRule":
        m = _RULE_RE.match(str(spec))
        if m is None:
            raise ConfigError(f"cannot parse h-rule {spec!r}; expected const(c), opt_scale(c), inv_dn(c) or inv_n(c)")
        try:
            c = float(m.group(2))
        except ValueError:
            raise ConfigError(f"h-rule {spec!r} has a non-numeric parameter") from None
        if not (np.isfinite(c) and c > 0):
            raise ConfigError(f"h-rule {spec!r} must have a positive finite parameter")
        return cls(m.group(1), c, f"{m.group(1)}({m.group(2)})")

    def __call__(self, d: int, n: int) -> float:
        if self.kind == "const":
            return self.c
        if self.kind == "opt_scale":
            return self.c / d
        if self.kind == "inv_dn":
            return self.c / (d * n)
        return self.c / n


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """Settings for one run.

    ``h_rules`` and ``grid`` default to the study's own when left as None;
    :meth:`resolved` fills them in so the stored config is self-describing.
    ``workers`` is further capped by the ARBLOBO_THREADS environment variable.
    """

    experiment: str
    seed: int = 0
    replications: int = 10
    mc_samples: int = 1000
    h_rules: Optional[Tuple[str, ...]] = None
    grid: Optional[Tuple[Tuple[int, int], ...]] = None
    g: float = 10.0
    y_mechanism: str = "logistic"
    output: Optional[str] = None
    workers: int = 1
    chains: int = 500
    max_states: int = 12
    horizon: int = 30

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.replications < 1:
            raise ConfigError("replications must be at least 1")
        if self.mc_samples < 2:
            raise ConfigError("mc_samples must be at least 2")
        if not self.g > 0:
            raise ConfigError("g must be positive")
        if self.y_mechanism not in Y_MECHANISMS:
            raise ConfigError(f"y_mechanism must be one of {Y_MECHANISMS}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.chains < 1 or not 2 <= self.max_states <= 20 or self.horizon < 1:
            raise ConfigError("need chains >= 1, 2 <= max_states <= 20 and horizon >= 1")
        if self.h_rules is not None:
            object.__setattr__(self, "h_rules", tuple(HRule.parse(r).text for r in self.h_rules))
        if self.grid is not None:
            grid = tuple((int(d), int(n)) for d, n in self.grid)
            for d, n in grid:
                if not n > d >= 1:
                    raise ConfigError(f"grid point (d={d}, n={n}) needs n > d >= 1")
            object.__setattr__(self, "grid", grid)
        for rule in self.rules():
            for d, n in self.grid_points():
                if not rule(d, n) > 0:
                    raise ConfigError(f"h-rule {rule.text} is not positive at (d={d}, n={n})")

    def grid_points(self) -> Tuple[Tuple[int, int], ...]:
        if self.grid is not None:
            return self.grid
        return FLAT_GRID if self.experiment == "flat-logistic" else ZELLNER_GRID

    def rules(self) -> List[HRule]:
        if self.h_rules is not None:
            names = self.h_rules
        else:
            names = FLAT_RULES if self.experiment == "flat-logistic" else ZELLNER_RULES
        return [HRule.parse(r) for r in names]

    def resolved(self) -> "ExperimentConfig":
        return ExperimentConfig(**{**asdict(self),
                                   "h_rules": tuple(r.text for r in self.rules()),
                                   "grid": self.grid_points()})

    def to_dict(self) -> dict:
        out = asdict(self)
        if out["h_rules"] is not None:
            out["h_rules"] = list(out["h_rules"])
        if out["grid"] is not None:
            out["grid"] = [list(p) for p in out["grid"]]
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        if "experiment" not in raw:
            raise ConfigError("config needs an 'experiment' key")
        kw = dict(raw)
        if kw.get("h_rules") is not None:
            kw["h_rules"] = tuple(kw["h_rules"])
        if kw.get("grid") is not None:
            try:
                kw["grid"] = tuple(tuple(p) for p in kw["grid"])
            except TypeError:
                raise ConfigError("grid must be a list of [d, n] pairs") from None
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def worker_count(requested: int) -> int:
    cap = os.environ.get("ARBLOBO_THREADS")
    if cap:
        try:
            return max(1, min(requested, int(cap)))
        except ValueError:
            raise ConfigError("ARBLOBO_THREADS must be an integer") from None
    return max(1, requested)


def _map(fn: Callable, jobs: Sequence, workers: int) -> list:
    workers = worker_count(workers)
    if workers == 1 or len(jobs) < 2:
        return [fn(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


# ---------------------------------------------------------------------------
# data
# ---------------------------------------------------------------------------

def generate_logistic_data(stream: RandomStream, n: int, d: int, mechanism: str = "logistic",
                           beta_true=None) -> LogisticData:
    """X_ij ~ Unif(-1, 1); Y from a logistic model or a fair coin.

    The logistic mechanism defaults to beta_true = (1, ..., 1) / sqrt(d).
    """
    if not n > d >= 1:
        raise ValueError("need n > d >= 1")
    if mechanism not in Y_MECHANISMS:
        raise ValueError(f"mechanism must be one of {Y_MECHANISMS}")
    X = stream.uniform(-1.0, 1.0, size=(n, d))
    u = stream.uniform(size=n)
    if mechanism == "fair-coin":
        p = np.full(n, 0.5)
    else:
        beta = np.full(d, 1.0 / np.sqrt(d)) if beta_true is None else np.asarray(beta_true, dtype=float)
        p = 1.0 / (1.0 + np.exp(-(X @ beta)))
    return LogisticData(X, (u < p).astype(float))


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentRow:
    experiment: str
    replication: int
    d: int
    n: int
    h_rule: str
    h: float
    accept_mean: float
    accept_se: float
    log_accept: float
    rate_lb: float
    closed_form_ub: float
    flag: str = ""
    iterations: int = 0

    def csv_fields(self):
        return [self.experiment, self.replication, self.d, self.n, self.h_rule, _fmt(self.h),
                _fmt(self.accept_mean), _fmt(self.accept_se), _fmt(self.log_accept),
                _fmt(self.rate_lb), _fmt(self.closed_form_ub), self.flag]


@dataclass(frozen=True)
class SummaryRow:
    experiment: str
    d: int
    n: int
    h_rule: str
    h: float
    replications: int
    mean_rate_lb: float
    sd_rate_lb: float
    mean_log_accept: float
    sd_log_accept: float
    reference_ub: float

    def csv_fields(self):
        return [self.experiment, self.d, self.n, self.h_rule, _fmt(self.h), self.replications,
                _fmt(self.mean_rate_lb), _fmt(self.sd_rate_lb), _fmt(self.mean_log_accept),
                _fmt(self.sd_log_accept), _fmt(self.reference_ub)]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: List[ExperimentRow]
    summary: List[SummaryRow]
    metadata: dict = field(default_factory=dict)

    def rows_csv(self) -> str:
        return _csv_text(ROW_HEADER, [r.csv_fields() for r in self.rows])

    def summary_csv(self) -> str:
        return _csv_text(SUMMARY_HEADER, [r.csv_fields() for r in self.summary])

    def write(self, path) -> List[Path]:
        """Write rows to ``path`` plus ``.summary.csv`` and ``.meta.json`` siblings."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        stem = path.with_suffix("")
        targets = [path, Path(f"{stem}.summary.csv"), Path(f"{stem}.meta.json")]
        targets[0].write_text(self.rows_csv(), encoding="utf-8")
        targets[1].write_text(self.summary_csv(), encoding="utf-8")
        meta = {"config": self.config.resolved().to_dict(), **self.metadata}
        targets[2].write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return targets


def _fmt(x) -> str:
    return repr(float(x))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _summarize(rows: Sequence[ExperimentRow], reference: Callable[[int, int, float, list], float]) -> List[SummaryRow]:
    groups = {}
    for r in rows:
        groups.setdefault((r.d, r.n, r.h_rule), []).append(r)
    out = []
    for (d, n, rule), members in groups.items():
        rates = np.array([m.rate_lb for m in members])
        logs = np.array([m.log_accept for m in members])
        ddof = 1 if len(members) > 1 else 0
        h = members[0].h
        out.append(SummaryRow(
            members[0].experiment, d, n, rule, h, len(members),
            float(rates.mean()), float(rates.std(ddof=ddof)),
            float(logs.mean()), float(logs.std(ddof=ddof)),
            float(reference(d, n, h, members)),
        ))
    return out


def _row(experiment, rep, d, n, rule, h, est, closed, flag, iterations) -> ExperimentRow:
    mean = min(max(est.mean, 0.0), 1.0)
    return ExperimentRow(experiment, rep, d, n, rule.text, h, mean, est.std_err, est.log_mean,
                         1.0 - mean, closed, flag, iterations)


# ---------------------------------------------------------------------------
# Zellner g-prior study
# ---------------------------------------------------------------------------

_EXPERIMENT_KEYS = {"zellner": 1, "flat-logistic": 2, "oracle-suite": 3, "examples": 4}


def run_zellner(config: ExperimentConfig) -> ExperimentResult:
    """RWMH acceptance at the posterior mode under Zellner's g-prior as d and n grow."""
    if config.experiment != "zellner":
        config = ExperimentConfig(**{**asdict(config), "experiment": "zellner"})
    root = RandomStream(config.seed).substream(_EXPERIMENT_KEYS["zellner"])
    rules = config.rules()
    grid = config.grid_points()
    jobs = [(gi, d, n, rep) for gi, (d, n) in enumerate(grid) for rep in range(config.replications)]

    def job(spec):
        gi, d, n, rep = spec
        stream = root.substream(gi, rep)
        data = generate_logistic_data(stream.substream(0), n, d, config.y_mechanism)
        target = make_logistic_zellner(data, config.g)
        flag = ""
        try:
            opt = find_mode(target, tolerance=1e-8)
        except MaxIterExceeded as exc:
            opt, flag = exc.result, "optimizer-failed"
        lam_min = target.params["gram_min_eig"]
        rows = []
        for k, rule in enumerate(rules):
            h = rule(d, n)
            kernel = ArbKernel(target, make_rw_gaussian(h, dim=d))
            est = mc_acceptance(kernel, opt.minimizer, config.mc_samples, stream.substream(1, k))
            closed = bounds.zellner_empirical_accept_ub(h, lam_min, config.g, d)
            rows.append(_row("zellner", rep, d, n, rule, h, est, closed, flag, opt.iterations))
        return rows

    rows = [r for chunk in _map(job, jobs, config.workers) for r in chunk]

    def reference(d, n, h, members):
        return bounds.zellner_accept_ub(h, n, d / n, config.g, d)

    meta = {
        "y_mechanism": config.y_mechanism,
        "beta_true": "ones/sqrt(d)" if config.y_mechanism == "logistic" else None,
        "x_distribution": "Unif(-1,1)",
        "closed_form_ub": "(1 + h lambda_min(X^T X) / g)^(-d/2)",
        "reference_ub": "(h n (1 - sqrt(d/n))^2 / (2 g) + 1)^(-d/2)",
        "flagged_rows": sum(1 for r in rows if r.flag),
    }
    return ExperimentResult(config, rows, _summarize(rows, reference), meta)


# ---------------------------------------------------------------------------
# flat-prior logistic study
# ---------------------------------------------------------------------------

def run_flat_logistic(config: ExperimentConfig) -> ExperimentResult:
    """RWMH acceptance at the MLE of a flat-prior logistic posterior as n grows."""
    if config.experiment != "flat-logistic":
        config = ExperimentConfig(**{**asdict(config), "experiment": "flat-logistic"})
    root = RandomStream(config.seed).substream(_EXPERIMENT_KEYS["flat-logistic"])
    rules = config.rules()
    grid = config.grid_points()
    jobs = [(gi, d, n, rep) for gi, (d, n) in enumerate(grid) for rep in range(config.replications)]

    def job(spec):
        gi, d, n, rep = spec
        stream = root.substream(gi, rep)
        flag = ""
        for attempt in range(_MAX_REGENERATIONS):
            data = generate_logistic_data(stream.substream(0, attempt), n, d, config.y_mechanism)
            try:
                target = make_logistic_flat(data)
                opt = find_mode(target, tolerance=1e-8, max_norm=_SEPARATION_NORM)
            except DivergenceSuspected:
                continue
            except MaxIterExceeded as exc:
                opt, flag = exc.result, "optimizer-failed"
            except ValueError:
                continue
            if np.linalg.norm(opt.minimizer) > _SEPARATION_NORM:
                continue
            break
        else:
            raise DivergenceSuspected(f"no non-separated data set in {_MAX_REGENERATIONS} draws at d={d}, n={n}")
        if attempt:
            flag = ";".join(filter(None, [flag, f"regenerated={attempt}"]))
        lam_min = smallest_hessian_eigenvalue(target, opt.minimizer)
        lambda0 = n / lam_min
        rows = []
        for k, rule in enumerate(rules):
            h = rule(d, n)
            kernel = ArbKernel(target, make_rw_gaussian(h, dim=d))
            est = mc_acceptance(kernel, opt.minimizer, config.mc_samples, stream.substream(1, k))
            closed = bounds.flat_logistic_accept_ub(lambda0, n, h, d)
            rows.append(_row("flat-logistic", rep, d, n, rule, h, est, closed, flag, opt.iterations))
        return rows

    rows = [r for chunk in _map(job, jobs, config.workers) for r in chunk]

    def reference(d, n, h, members):
        return float(np.mean([m.closed_form_ub for m in members]))

    meta = {
        "y_mechanism": config.y_mechanism,
        "beta_true": "ones/sqrt(d)" if config.y_mechanism == "logistic" else None,
        "x_distribution": "Unif(-1,1)",
        "closed_form_ub": "2 (lambda0 / (n h))^(d/2), lambda0 = n / lambda_min(Hessian at MLE)",
        "reference_ub": "mean of closed_form_ub over replications",
        "regenerated_rows": sum(1 for r in rows if "regenerated" in r.flag),
        "flagged_rows": sum(1 for r in rows if r.flag),
    }
    return ExperimentResult(config, rows, _summarize(rows, reference), meta)


# ---------------------------------------------------------------------------
# worked examples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExampleCheck:
    name: str
    value: float
    bound: float
    std_err: float
    method: str
    passed: bool

    def __post_init__(self):
        for key in ("value", "bound", "std_err"):
            object.__setattr__(self, key, float(getattr(self, key)))
        object.__setattr__(self, "passed", bool(self.passed))


EXAMPLE_HEADER = ("name", "value", "bound", "std_err", "method", "passed")


def examples_csv(checks: Sequence[ExampleCheck]) -> str:
    return _csv_text(EXAMPLE_HEADER, [[c.name, _fmt(c.value), _fmt(c.bound), _fmt(c.std_err),
                                       c.method, int(c.passed)] for c in checks])


def run_examples(config: Optional[ExperimentConfig] = None) -> List[ExampleCheck]:
    """Evaluate the worked-example acceptance inequalities."""
    seed = 0 if config is None else config.seed
    root = RandomStream(seed).substream(_EXPERIMENT_KEYS["examples"])
    checks = []

    # non-reversible Crank-Nicolson against MH on N(0, 4), d = 1
    sigma2, h, theta = 4.0, 0.5, np.array([1.0])
    target = make_gaussian(sigma2, 1)
    cn = make_crank_nicolson(h, 1)
    a_nr = quadrature_acceptance(ArbKernel(target, cn, AcceptanceRule.nonreversible_cn(sigma2)), theta)
    a_mh = quadrature_acceptance(ArbKernel(target, cn, AcceptanceRule.mh()), theta)
    bound = 2.0 ** -1 + a_mh
    checks.append(ExampleCheck("cn-nonreversible", a_nr, bound, 0.0, "quadrature", a_nr <= bound + 1e-8))

    # two-component Gaussian mixture, b = 2, h = 1, at the origin
    b, h = 2.0, 1.0
    kernel = ArbKernel(make_gaussian_mixture_2d(b), make_rw_gaussian(h, dim=2))
    est = mc_acceptance(kernel, np.zeros(2), EXAMPLE_MC_SAMPLES, root.substream(2))
    bound = bounds.mixture_accept_ub(b, h, 0.0, 0.0)
    checks.append(ExampleCheck("mixture-origin", est.mean, bound, est.std_err, "monte-carlo",
                               est.mean <= bound + 3 * est.std_err))

    # random-scan random-walk MH on the sub-exponential target, h = 2, at the origin
    h = 2.0
    target = make_subexponential_2d()
    comps = [
        RSComponent((0,), make_rw_gaussian(h, dim=1), conditional=lambda th: conditional_1d(target, 2, th[1])),
        RSComponent((1,), make_rw_gaussian(h, dim=1), conditional=lambda th: conditional_1d(target, 1, th[0])),
    ]
    rs = RandomScanKernel(target, comps, (0.5, 0.5))
    estimates, combined = rs_component_acceptances(rs, np.zeros(2), EXAMPLE_MC_SAMPLES, root.substream(3))
    se = float(np.sqrt(sum((0.5 * e.std_err) ** 2 for e in estimates)))
    bound = 1.0 / np.sqrt(2.0 * h)
    checks.append(ExampleCheck("random-scan-hybrid", combined, bound, se, "monte-carlo",
                               combined <= bound + 3 * se))

    # portkey Barker never accepts more than MH with the same proposal
    target = make_gaussian(1.0, 1)
    prop = make_rw_gaussian(1.0, dim=1)
    a_pb = quadrature_acceptance(ArbKernel(target, prop, AcceptanceRule.portkey(0.5)), np.array([0.7]))
    a_mh = quadrature_acceptance(ArbKernel(target, prop, AcceptanceRule.mh()), np.array([0.7]))
    checks.append(ExampleCheck("portkey-vs-mh", a_pb, a_mh, 0.0, "quadrature", a_pb <= a_mh + 1e-12))
    return checks


# ---------------------------------------------------------------------------
# finite-chain verification suite
# ---------------------------------------------------------------------------

ORACLE_HEADER = ("chain", "m", "rule", "worst_tv_margin", "spectral_gap", "conductance",
                 "singleton_bound", "beta", "fitted_w_rate")


@dataclass
class OracleSuiteReport:
    chains: int
    rows: list
    violations: list
    worked_examples: dict

    @property
    def ok(self) -> bool:
        return not self.violations

    def csv(self) -> str:
        return _csv_text(ORACLE_HEADER, [[r[0], r[1], r[2], *map(_fmt, r[3:])] for r in self.rows])


def _two_state_checks() -> dict:
    mh = build_finite_arb([2 / 3, 1 / 3], [[0.5, 0.5], [0.5, 0.5]], "mh")
    barker = build_finite_arb([2 / 3, 1 / 3], [[0.5, 0.5], [0.5, 0.5]], "barker")
    return {
        "mh_P": mh.P.tolist(),
        "mh_accept_off_0": float(mh.accept_off[0]),
        "barker_P01": float(barker.P[0, 1]),
        "tv_t1": float(exact_tv_curve(mh, 0, 1)[0]),
        "gap": spectral_gap(mh).gap,
    }


def run_oracle_suite(config: ExperimentConfig) -> OracleSuiteReport:
    """Finite TV bound, Lawler-Sokal, singleton conductance and W-rate checks on random chains."""
    root = RandomStream(config.seed).substream(_EXPERIMENT_KEYS["oracle-suite"])
    T = config.horizon

    def job(k):
        chain = random_finite_chain(root.substream(k), m_max=config.max_states)
        bad = []
        tv = finite_tv_theorem_check(chain, T, strict=False)
        if tv.violations:
            bad.append((k, "tv-bound", tv.violations[0]))
        gap = spectral_gap(chain)
        kp, _ = conductance(chain)
        single = singleton_conductance_bound(chain)
        if gap.gap > kp + 1e-10:
            bad.append((k, "lawler-sokal", (gap.gap, kp)))
        if kp > single + 1e-10:
            bad.append((k, "singleton-conductance", (kp, single)))
        eq = finite_equiv_illustration(chain, T, strict=False)
        if not eq.passed:
            bad.append((k, "w-rate", (eq.fitted_rate, eq.beta)))
        row = (k, chain.m, chain.rule.kind, tv.worst_margin, gap.gap, kp, single, gap.beta, eq.fitted_rate)
        return row, bad

    results = _map(job, list(range(config.chains)), config.workers)
    rows = [r for r, _ in results]
    violations = [v for _, bad in results for v in bad]
    worked = _two_state_checks()
    expected = {"mh_accept_off_0": 0.25, "barker_P01": 1 / 6, "tv_t1": 1 / 12, "gap": 0.75}
    for key, value in expected.items():
        if abs(worked[key] - value) > 1e-12:
            violations.append((-1, f"two-state-{key}", (worked[key], value)))
    return OracleSuiteReport(config.chains, rows, violations, worked)


RUNNERS = {
    "zellner": run_zellner,
    "flat-logistic": run_flat_logistic,
}
