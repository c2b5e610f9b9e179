"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 a verification
check failed. Results go to standard output (CSV or JSON) or to files;
diagnostics go to standard error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import bounds
from .errors import ArbloboError, ConfigError
from .experiments import (
    ExperimentConfig,
    RUNNERS,
    examples_csv,
    generate_logistic_data,
    run_examples,
    run_oracle_suite,
)
from .kernels import AcceptanceRule, ArbKernel, mc_acceptance, quadrature_acceptance
from .numerics import RandomStream
from .proposals import make_crank_nicolson, make_mala, make_rw_gaussian
from .targets import make_gaussian, make_gaussian_mixture_2d, make_subexponential_2d

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def load_config(path) -> ExperimentConfig:
    """Read and validate a JSON experiment config; unknown keys are rejected."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        line = text.splitlines()[exc.lineno - 1] if text.splitlines() else ""
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}\n    {line}") from None
    return ExperimentConfig.from_dict(raw)


def _floats(text: str):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _emit_csv(text: str, output: Optional[str]):
    if output:
        Path(output).parent.mkdir(parents=True, exist_ok=True)
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _build_kernel(args) -> ArbKernel:
    if args.target == "gaussian":
        target = make_gaussian(args.sigma2, args.d)
    elif args.target == "mixture":
        target = make_gaussian_mixture_2d(args.b)
    else:
        target = make_subexponential_2d()
    d = target.dim
    if args.proposal == "rw":
        prop = make_rw_gaussian(args.h, dim=d)
    elif args.proposal == "mala":
        prop = make_mala(target, args.h)
    else:
        prop = make_crank_nicolson(args.h, d)
    if args.rule == "portkey":
        rule = AcceptanceRule.portkey(args.delta)
    elif args.rule == "nonreversible-cn":
        rule = AcceptanceRule.nonreversible_cn(args.sigma2)
    else:
        rule = AcceptanceRule(args.rule)
    return ArbKernel(target, prop, rule)


def cmd_estimate_accept(args) -> int:
    kernel = _build_kernel(args)
    at = np.asarray(_floats(args.at))
    d = kernel.target.dim
    if at.size == 1:
        at = np.full(d, at[0])
    if at.size != d:
        raise UsageError(f"--at needs 1 or {d} values")
    stream = RandomStream(args.seed)
    if args.method == "quadrature":
        value = quadrature_acceptance(kernel, at)
        out = {"method": "quadrature", "mean": value, "at": at.tolist()}
    else:
        est = mc_acceptance(kernel, at, args.n, stream)
        out = {"method": "monte-carlo", **asdict(est), "at": at.tolist()}
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


def cmd_bound_curve(args) -> int:
    if args.kind == "tv":
        curve = bounds.tv_lower_curve(args.accept, args.horizon)
    else:
        if args.constant is not None:
            constant = args.constant
        elif args.sup_density is not None:
            c0 = bounds.norm_equivalence_constant(args.norm, args.d)
            constant = bounds.wasserstein_constant(c0, args.d, args.sup_density)
        else:
            raise UsageError("wasserstein curves need --constant or --sup-density")
        curve = bounds.wasserstein_lower_curve(args.accept, args.horizon, args.d, constant)
    lines = ["t,bound"] + [f"{t},{v!r}" for t, v in curve.rows()]
    _emit_csv("\n".join(lines) + "\n", args.output)
    return EXIT_OK


_OVERRIDES = {
    "seed": "seed",
    "replications": "replications",
    "mc_samples": "mc_samples",
    "g": "g",
    "y_mechanism": "y_mechanism",
    "workers": "workers",
    "output": "output",
    "h_rule": "h_rules",
    "chains": "chains",
}


def cmd_experiment(args) -> int:
    if args.config:
        raw = load_config(args.config).to_dict()
    elif args.name:
        raw = {"experiment": args.name}
    else:
        raise UsageError("experiment needs --config or --name")
    if args.name:
        raw["experiment"] = args.name
    for flag, key in _OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            raw[key] = value
    if args.grid:
        try:
            raw["grid"] = [[int(v) for v in p.split("x")] for p in args.grid]
        except ValueError:
            raise UsageError("--grid entries look like DxN, e.g. 10x100") from None
    config = ExperimentConfig.from_dict(raw).resolved()
    if args.print_config:
        print(json.dumps(config.to_dict(), indent=2, sort_keys=True))
        return EXIT_OK
    if config.experiment == "oracle-suite":
        return _report_oracle(run_oracle_suite(config), config.output)
    if config.experiment == "examples":
        return _report_examples(run_examples(config), config.output)
    result = RUNNERS[config.experiment](config)
    if config.output:
        for path in result.write(config.output):
            print(path, file=sys.stderr)
    else:
        sys.stdout.write(result.rows_csv())
    return EXIT_OK


def _report_oracle(report, output) -> int:
    if output:
        _emit_csv(report.csv(), output)
    summary = {
        "chains": report.chains,
        "violations": len(report.violations),
        "worst_tv_margin": min(r[3] for r in report.rows),
        "two_state": report.worked_examples,
    }
    print(json.dumps(summary, sort_keys=True))
    for v in report.violations:
        print(f"violation: chain {v[0]} {v[1]} {v[2]}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_VIOLATION


def _report_examples(checks, output) -> int:
    _emit_csv(examples_csv(checks), output)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VIOLATION


def cmd_oracle(args) -> int:
    config = ExperimentConfig("oracle-suite", seed=args.seed, chains=args.chains, max_states=args.max_states,
                              horizon=args.horizon, workers=args.workers)
    return _report_oracle(run_oracle_suite(config), args.output)


def cmd_examples(args) -> int:
    return _report_examples(run_examples(ExperimentConfig("examples", seed=args.seed)), args.output)


def cmd_generate_data(args) -> int:
    data = generate_logistic_data(RandomStream(args.seed), args.n, args.d, args.mechanism)
    header = ",".join([f"x{j + 1}" for j in range(args.d)] + ["y"])
    lines = [header] + [",".join([*(repr(float(v)) for v in x), str(int(y))]) for x, y in zip(data.X, data.Y)]
    _emit_csv("\n".join(lines) + "\n", args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="arblobo", description="Acceptance-based convergence lower bounds for ARB chains.",
                     formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("estimate-accept", help="estimate A(theta) for a built-in target", formatter_class=fmt)
    p.add_argument("--target", choices=("gaussian", "mixture", "subexponential"), default="gaussian",
                   help="target density")
    p.add_argument("--sigma2", type=float, default=1.0, help="Gaussian target variance")
    p.add_argument("--d", type=int, default=1, help="Gaussian target dimension")
    p.add_argument("--b", type=float, default=2.0, help="mixture parameter b > 1")
    p.add_argument("--proposal", choices=("rw", "mala", "cn"), default="rw", help="proposal family")
    p.add_argument("--h", type=float, required=True, help="proposal step size")
    p.add_argument("--rule", choices=("mh", "barker", "portkey", "nonreversible-cn"), default="mh",
                   help="acceptance rule")
    p.add_argument("--delta", type=float, default=0.0, help="portkey delta")
    p.add_argument("--at", default="0", help="state theta, comma-separated (one value is broadcast)")
    p.add_argument("--n", type=int, default=10_000, help="Monte Carlo sample size")
    p.add_argument("--method", choices=("mc", "quadrature"), default="mc",
                   help="Monte Carlo or 1-D quadrature")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.set_defaults(func=cmd_estimate_accept)

    p = sub.add_parser("bound-curve", help="TV or Wasserstein lower-bound curve as CSV", formatter_class=fmt)
    p.add_argument("--kind", choices=("tv", "wasserstein"), default="tv", help="distance")
    p.add_argument("--accept", type=float, required=True, help="acceptance probability A in [0, 1]")
    p.add_argument("--horizon", type=int, default=10, help="last step t")
    p.add_argument("--d", type=int, default=1, help="dimension (wasserstein)")
    p.add_argument("--sup-density", type=float, default=None, help="bound s on the target density (wasserstein)")
    p.add_argument("--norm", choices=("l1", "l2", "linf"), default="l2", help="norm defining the cost (wasserstein)")
    p.add_argument("--constant", type=float, default=None, help="explicit Wasserstein constant, overrides --sup-density")
    p.add_argument("--output", default=None, help="CSV path (default: standard output)")
    p.set_defaults(func=cmd_bound_curve)

    p = sub.add_parser("experiment", help="run a simulation study from a JSON config",
                       formatter_class=argparse.RawDescriptionHelpFormatter,
                       description="Flags override values from --config.\n"
                                   "Defaults: replications 10, mc-samples 1000, g 10, y-mechanism logistic,\n"
                                   "workers 1 (capped by ARBLOBO_THREADS), seed 0; grid and h-rules are the\n"
                                   "study's own unless given.")
    p.add_argument("--config", default=None, help="JSON config file (default: none)")
    p.add_argument("--name", choices=("zellner", "flat-logistic", "oracle-suite", "examples"), default=None,
                   help="experiment id, overrides the config (default: from config)")
    p.add_argument("--seed", type=int, default=None, help="random seed (default: 0)")
    p.add_argument("--replications", type=int, default=None, help="replications per grid point (default: 10)")
    p.add_argument("--mc-samples", type=int, default=None, help="Monte Carlo samples per estimate (default: 1000)")
    p.add_argument("--g", type=float, default=None, help="Zellner g (default: 10)")
    p.add_argument("--y-mechanism", choices=("logistic", "fair-coin"), default=None,
                   help="response mechanism (default: logistic)")
    p.add_argument("--h-rule", action="append", default=None,
                   help="step rule const(c), opt_scale(c), inv_dn(c) or inv_n(c); repeatable (default: study rules)")
    p.add_argument("--grid", nargs="+", default=None, help="grid points as DxN (default: study grid)")
    p.add_argument("--chains", type=int, default=None, help="random chains for oracle-suite (default: 500)")
    p.add_argument("--workers", type=int, default=None, help="worker threads (default: 1)")
    p.add_argument("--output", default=None, help="rows CSV path; summary and metadata go next to it (default: stdout)")
    p.add_argument("--print-config", action="store_true", help="print the resolved config as JSON and exit (default: off)")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("oracle", help="finite-chain verification suite", formatter_class=fmt)
    p.add_argument("--chains", type=int, default=500, help="number of random chains")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--max-states", type=int, default=12, help="largest chain size")
    p.add_argument("--horizon", type=int, default=30, help="steps checked")
    p.add_argument("--workers", type=int, default=1, help="worker threads (capped by ARBLOBO_THREADS)")
    p.add_argument("--output", default=None, help="per-chain CSV path")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("examples", help="worked-example inequality checks", formatter_class=fmt)
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--output", default=None, help="CSV path (default: standard output)")
    p.set_defaults(func=cmd_examples)

    p = sub.add_parser("generate-data", help="synthetic logistic-regression data as CSV", formatter_class=fmt)
    p.add_argument("--n", type=int, required=True, help="observations")
    p.add_argument("--d", type=int, required=True, help="covariates")
    p.add_argument("--mechanism", choices=("logistic", "fair-coin"), default="logistic", help="response mechanism")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--output", default=None, help="CSV path (default: standard output)")
    p.set_defaults(func=cmd_generate_data)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArbloboError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
