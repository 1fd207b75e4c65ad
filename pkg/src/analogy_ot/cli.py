"""Command-line interface: ``analogy-ot <command> ...``.

Exit codes: 0 verified / all checks pass, 1 not verified / a check fails,
2 invalid input or any other error.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import BENCH_DEFAULTS, SIMULATE_DEFAULTS, ConfigError, RunConfig
from .data import DatasetError, load_dataset, write_report
from .metric import SolverCapExceeded
from .pipeline import (
    EXIT_ERROR,
    PipelineError,
    load_inputs,
    run_bench,
    run_check,
    run_estimate,
    run_hoare,
    run_simulate,
    run_wasserstein,
)
from .transformers import TransformerProtocolError

_D = RunConfig()


def _x0(text: str):
    if text == "barycenter":
        return text
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("x0 must be 'barycenter' or comma-separated coordinates") from None


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("seed must be an integer") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2**64)")
    return value


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("run options (flags override the config file)")
    g.add_argument("--config", metavar="JSON", help="run configuration file")
    g.add_argument("--p", type=float, help=f"order of W_p (default: {_D.p})")
    g.add_argument("--alpha", type=float, help=f"significance level for eps and eta (default: {_D.alpha})")
    g.add_argument("--beta", type=float, help=f"quantile level for gamma (default: {_D.beta})")
    g.add_argument("--bootstrap", dest="B", type=int, metavar="B", help=f"bootstrap replicates (default: {_D.B})")
    g.add_argument("--estimator", choices=["exact", "sliced"], help=f"distance estimator (default: {_D.estimator})")
    g.add_argument("--n-proj", dest="n_proj", type=int, help=f"projections for the sliced estimator (default: {_D.n_proj})")
    g.add_argument("--seed", type=_seed, help="master seed; required by every stochastic command (default: none)")
    g.add_argument("--eps-method", dest="eps_method", choices=["normal", "quantile"], help=f"eps construction (default: {_D.eps_method})")
    g.add_argument("--x0", type=_x0, help=f"reference point: 'barycenter' or comma list (default: {_D.x0})")
    g.add_argument("--epsilon", type=float, help="use this eps instead of the bootstrap estimate (default: estimated)")
    g.add_argument("--delta", type=float, help="use this delta instead of estimating it from labels (default: estimated)")
    g.add_argument("--gamma", type=float, help="use this gamma instead of estimating it (default: estimated)")
    g.add_argument("--label-column", dest="label_column", type=int, help=f"label column of the source file (default: {_D.label_column})")
    g.add_argument("--classes", dest="classes_path", metavar="CSV", help="labelled class file for delta, label in the last column (default: none)")
    g.add_argument("--header", dest="has_header", action="store_const", const=True, help="input files start with a header row")
    g.add_argument("--semantics", choices=["demonic", "angelic", "both"], help=f"nondeterministic triple reading (default: {_D.semantics})")
    g.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker threads for the bootstrap (default: available CPUs)")
    g.add_argument("--out", metavar="JSON", help="write the JSON report here")
    g.add_argument("--plot-data", dest="plot_data", metavar="CSV", help="write bootstrap replicates as plot-ready CSV")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="analogy-ot",
        description="Wasserstein-based admissibility checks for transfer between data domains.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    common = _common()

    p = sub.add_parser("wasserstein", parents=[common], help="distance between two samples")
    p.add_argument("source")
    p.add_argument("target")
    p = sub.add_parser("estimate", parents=[common], help="bootstrap the analogy parameters")
    p.add_argument("source")
    p.add_argument("target")
    p = sub.add_parser("check", parents=[common], help="full analogy verification")
    p.add_argument("source")
    p.add_argument("target")
    p = sub.add_parser("hoare", parents=[common], help="runtime checks of the program triples")
    p.add_argument("states")
    sub.add_parser("simulate", parents=[common], help="generate model data and run the full check")
    sub.add_parser("bench", parents=[common], help="timing table for the exact and sliced estimators")
    return parser


_OVERRIDES = (
    "p", "alpha", "beta", "B", "estimator", "n_proj", "seed", "eps_method", "x0", "epsilon",
    "delta", "gamma", "label_column", "classes_path", "has_header", "semantics", "threads", "plot_data",
)


def make_config(args) -> RunConfig:
    base = {"simulate": SIMULATE_DEFAULTS, "bench": {"bench": BENCH_DEFAULTS}}.get(args.command)
    cfg = RunConfig.load(args.config, base) if args.config else RunConfig.from_dict({}, base)
    cfg = cfg.replace(**{k: getattr(args, k) for k in _OVERRIDES})
    cfg.validate()
    stochastic = args.command != "wasserstein" or cfg.estimator == "sliced"
    if stochastic and cfg.seed is None:
        raise ConfigError(f"'{args.command}' is stochastic here: --seed is required")
    if args.command == "simulate" and not args.out:
        raise ConfigError("simulate needs --out (generated CSVs are written beside the report)")
    return cfg


def _fmt(x) -> str:
    return "n/a" if x is None else f"{x:.6g}"


def summarize(report: dict) -> str:
    lines = []
    w = report.get("wasserstein")
    if w:
        lines.append(f"W_{w['p']:g} ({w['estimator']}): {w['estimate']!r}")
    b = report.get("bootstrap")
    if b:
        lines.append(f"bootstrap: B={b['B']} mean={_fmt(b['mean'])} sd={_fmt(b['sd'])}")
    prm = report.get("parameters")
    if prm and report["run"] != "hoare":
        lines.append(
            "parameters: "
            + " ".join(f"{k}={_fmt(prm[k])}" for k in ("epsilon", "eta", "gamma", "xi", "delta"))
        )
    v = report.get("verdict")
    if v and v["verified"] is not None:
        lines.append(f"verdict: {v['status']} (threshold {_fmt(min(v['threshold_eq46'], v['threshold_table']))}, margin {_fmt(v['margin'])})")
    for t in report.get("hoare") or []:
        if "skipped" in t:
            lines.append(f"{t['triple_id']:<12} skipped: {t['skipped']}")
            continue
        state = "holds" if t["holds"] else f"FAILS ({t['n_counterexamples']} counterexamples)"
        vac = " [vacuous]" if t["vacuous"] else ""
        lines.append(f"{t['triple_id']:<12} {state}{vac}, verified on {t['total']} states")
        if not t["holds"] and t["counterexamples"]:
            shown = ", ".join(str(c) for c in t["counterexamples"][:10])
            lines.append(f"{'':<12} counterexamples: {shown}")
    er = report.get("effective_region")
    if er:
        lines.append(f"effective region: eps'={_fmt(er['eps_prime'])} delta'={_fmt(er['delta_prime'])} valid={er['valid']}")
    bench = report.get("bench")
    if bench:
        lines.append("estimator,n,n_proj,wall_ms,distance")
        for r in bench["rows"]:
            lines.append(f"{r['estimator']},{r['n']},{r['n_proj'] or ''},{_fmt(r['wall_ms'])},{_fmt(r['distance'])}")
    return "\n".join(lines)


def dispatch(args, cfg: RunConfig):
    cmd = args.command
    if cmd == "wasserstein":
        X, Y, _ = load_inputs(cfg, args.source, args.target)
        return run_wasserstein(X, Y, cfg)
    if cmd in ("estimate", "check"):
        X, Y, classes = load_inputs(cfg, args.source, args.target)
        return (run_estimate if cmd == "estimate" else run_check)(X, Y, classes, cfg)
    if cmd == "hoare":
        S = load_dataset(args.states, cfg.has_header)
        return run_hoare(S, cfg)
    if cmd == "simulate":
        return run_simulate(cfg, os.path.dirname(os.path.abspath(args.out)))
    return run_bench(cfg)


def _simulate_out(out: str) -> str:
    # A directory (existing or with a trailing slash) gets report.json inside it.
    if out.endswith(("/", os.sep)) or os.path.isdir(out):
        os.makedirs(out, exist_ok=True)
        return os.path.join(out, "report.json")
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "simulate" and args.out:
        args.out = _simulate_out(args.out)
    try:
        cfg = make_config(args)
        report, code = dispatch(args, cfg)
        if args.out:
            write_report(report, args.out)
    except (ConfigError, DatasetError, PipelineError, TransformerProtocolError, SolverCapExceeded, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.command == "wasserstein" and not args.out:
        print(repr(report["wasserstein"]["estimate"]))
    else:
        print(summarize(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
