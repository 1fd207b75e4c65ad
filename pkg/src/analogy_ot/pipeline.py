"""End-to-end runs behind the command-line interface.

Each ``run_*`` function returns ``(report, exit_code)`` where ``report`` follows
the fixed JSON layout: config_echo, wasserstein, bootstrap, parameters,
verdict, regularity, hoare, fol, timings_ms (plus a few run-specific keys).
Everything except ``timings_ms`` is a deterministic function of the config,
the input data and the seed.
"""

from __future__ import annotations

import dataclasses
import statistics
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import estimation, hoare, streams
from .analogy import (
    AnalogyParameters,
    audit_regularity,
    check_analogy,
    check_fol_statements,
)
from .config import ConfigError, RunConfig, predicate_from_spec
from .data import generate_class_blobs, generate_gaussian, load_dataset, save_dataset, write_plot_data
from .estimation import LabeledSample
from .metric import SolverCapExceeded, projection_directions, sliced_wasserstein, wasserstein_exact
from .transformers import from_spec

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2
MAX_LISTED = 100  # counterexample indices kept per triple in the report


class PipelineError(ValueError):
    pass


class _Timer:
    def __init__(self):
        self.ms: dict[str, float] = {}

    @contextmanager
    def __call__(self, name: str):
        t0 = time.perf_counter()
        yield
        self.ms[name] = (time.perf_counter() - t0) * 1e3


def _skeleton(cfg: RunConfig, kind: str) -> dict:
    echo = cfg.to_dict()
    echo.pop("threads")  # worker count never changes results
    return {
        "run": kind,
        "config_echo": echo,
        "wasserstein": None,
        "bootstrap": None,
        "parameters": None,
        "verdict": {
            "verified": None,
            "status": "not evaluated",
            "threshold_eq46": None,
            "threshold_table": None,
            "margin": None,
            "violation_bound_eq49": None,
            "violation_bound_eq51": None,
        },
        "regularity": None,
        "hoare": None,
        "fol": None,
    }


def _need_seed(cfg: RunConfig, what: str) -> int:
    if cfg.seed is None:
        raise PipelineError(f"{what} is stochastic: pass --seed (or set 'seed' in the config)")
    return cfg.seed


def _threads(cfg: RunConfig) -> int:
    import os

    return cfg.threads or os.cpu_count() or 1


def load_inputs(cfg: RunConfig, source, target=None):
    """Read the source (labelled when ``label_column`` is set) and target samples."""
    src = load_dataset(source, cfg.has_header, cfg.label_column)
    tgt = None
    if target is not None:
        tgt = load_dataset(target, cfg.has_header)  # labels belong to the source only
    classes = None
    if isinstance(src, LabeledSample):
        classes, src = src, src.points
    if cfg.classes_path is not None:
        classes = load_dataset(cfg.classes_path, cfg.has_header, cfg.classes_label_column)
    return src, tgt, classes


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------


def _wasserstein_block(X, Y, cfg: RunConfig, seed: int | None) -> dict:
    if cfg.estimator == "sliced":
        value = sliced_wasserstein(X, Y, cfg.p, cfg.n_proj, _need_seed(cfg, "the sliced estimator"))
    else:
        value = wasserstein_exact(X, Y, cfg.p)[0]
    return {
        "estimate": value,
        "estimator": cfg.estimator,
        "p": float(cfg.p),
        "n_proj": cfg.n_proj if cfg.estimator == "sliced" else None,
        "n": len(X),
        "m": len(Y),
        "d": X.shape[1],
    }


def _bootstrap_block(summary: estimation.BootstrapSummary) -> dict:
    return {
        "mean": summary.mean,
        "sd": summary.sd,
        "q": {k: summary.quantile(float(k)) for k in ("0.025", "0.05", "0.95", "0.975")},
        "B": summary.B,
    }


def _displacements(X, T) -> np.ndarray:
    """Largest move of each state over its successors."""
    succ = T.successors(X)
    return np.array([float(np.max(np.sqrt(((s - x) ** 2).sum(axis=1)))) for x, s in zip(X, succ)])


def _triple_dict(rep: hoare.TripleReport) -> dict:
    d = dataclasses.asdict(rep)
    d["n_counterexamples"] = len(rep.counterexamples)
    d["counterexamples"] = [list(c) if isinstance(c, (tuple, list)) else c for c in rep.counterexamples[:MAX_LISTED]]
    d["verified_on"] = f"verified on {rep.total} states"
    return d


def _skipped(triple_id: str, reason: str) -> dict:
    return {"triple_id": triple_id, "skipped": reason}


def hoare_suite(X, T, x0, eps, delta, gamma, F, L, cfg: RunConfig) -> tuple[list[dict], dict | None, bool]:
    """Run every triple the supplied parameters allow.

    Returns ``(entries, effective_region, all_hold)`` where ``all_hold``
    ignores vacuous and skipped entries.
    """
    entries: list[dict] = []
    reports: list[hoare.TripleReport] = []

    def add(rep):
        reports.append(rep)
        entries.append(_triple_dict(rep))

    c1 = hoare.check_c1(X, T, gamma)
    if cfg.gamma is None:
        note = f"gamma is the {1 - cfg.beta:g} displacement quantile; up to a {cfg.beta:g} fraction of states may exceed it"
        c1 = dataclasses.replace(c1, note=note)
    add(c1)
    if F is not None:
        add(hoare.check_c2(X, T, F))
    if F is not None and L is not None and eps is not None:
        if eps > gamma:
            add(hoare.check_u4(X, T, x0, eps, gamma, F, L))
        else:
            entries.append(_skipped("U4", "needs eps > gamma"))
        add(hoare.check_u5(X, T, x0, eps, gamma, F, L))
    if F is not None and delta is not None:
        if delta > 2 * gamma:
            A, B, idx = hoare.default_pairs(X, cfg.pair_budget, cfg.seed or 0, radius=delta - 2 * gamma)
            rep = hoare.check_u6(A, B, T, delta, gamma, F)
            rep = dataclasses.replace(rep, counterexamples=[tuple(int(v) for v in idx[k]) for k in rep.counterexamples])
            add(rep)
        else:
            entries.append(_skipped("U6", "needs delta > 2 gamma"))
    if not T.deterministic and F is not None and L is not None and eps is not None and delta is not None:
        modes = ["demonic", "angelic"] if cfg.semantics == "both" else [cfg.semantics]
        for mode in modes:
            if delta > 2 * gamma:
                add(hoare.check_u2_nondet(X, T, x0, eps, delta, gamma, F, L, mode))
            else:
                entries.append(_skipped(f"U2-{mode}", "needs delta > 2 gamma"))

    region = None
    ok = all(r.holds for r in reports if not r.vacuous)
    if eps is not None and delta is not None and min(eps, delta) >= 0:
        er = hoare.effective_region(eps, delta, gamma)
        region = {"eps_prime": er.eps_prime, "delta_prime": er.delta_prime, "valid": er.valid}
        ok = ok and er.valid
    return entries, region, ok


def _predicates(cfg: RunConfig):
    F = predicate_from_spec(cfg.F, "F") if cfg.F is not None else None
    L = predicate_from_spec(cfg.L, "L") if cfg.L is not None else None
    return F, L


def _estimate(X, Y, classes, cfg: RunConfig, report: dict, timer: _Timer, require_delta: bool):
    seed = _need_seed(cfg, "parameter estimation")
    with timer("wasserstein"):
        report["wasserstein"] = _wasserstein_block(X, Y, cfg, seed)
    with timer("bootstrap"):
        summary = estimation.bootstrap_wasserstein(
            X, Y, cfg.p, cfg.B, seed, cfg.estimator, cfg.n_proj, threads=_threads(cfg)
        )
    report["bootstrap"] = _bootstrap_block(summary)
    if cfg.plot_data:
        write_plot_data(summary.replicates, cfg.plot_data)

    eps_est = estimation.estimate_epsilon(summary, cfg.alpha, cfg.eps_method)
    eps = eps_est if cfg.epsilon is None else float(cfg.epsilon)
    eta = estimation.estimate_eta(summary, cfg.alpha)

    with timer("transformer"):
        T = from_spec(cfg.transformer, seed)
        disp = _displacements(X, T)
    gamma_est = estimation.estimate_gamma(disp, cfg.beta)
    gamma = gamma_est if cfg.gamma is None else float(cfg.gamma)
    xi = estimation.estimate_xi(disp)

    delta_est = geometry = None
    if classes is not None:
        with timer("class_geometry"):
            geometry = estimation.class_geometry(classes, cfg.p, cfg.delta_estimator, cfg.n_proj, seed)
            delta_est = estimation.estimate_delta(geometry)
    if cfg.delta is not None:
        delta = float(cfg.delta)
    elif delta_est is not None:
        delta = delta_est.value
    elif require_delta:
        raise PipelineError("δ requires labels or explicit value (label_column, classes_path or --delta)")
    else:
        delta = None

    report["parameters"] = {
        "epsilon": eps,
        "eta": eta,
        "gamma": gamma,
        "xi": xi,
        "delta": delta,
        "separable": None if delta is None else bool(delta > 0),
        "alpha": float(cfg.alpha),
        "beta": float(cfg.beta),
        "epsilon_estimated": eps_est,
        "epsilon_method": cfg.eps_method,
        "epsilon_source": "estimated" if cfg.epsilon is None else "config",
        "epsilon_covers_observed": bool(report["wasserstein"]["estimate"] <= eps),
        "eta_convention": "z_{1-alpha/2} * sd",
        "epsilon_convention": "z_{1-alpha} * sd" if cfg.eps_method == "normal" else "Q_{1-alpha}",
        "gamma_estimated": gamma_est,
        "gamma_source": "estimated" if cfg.gamma is None else "config",
        "delta_estimated": None if delta_est is None else delta_est.value,
        "delta_source": "config" if cfg.delta is not None else ("classes" if delta_est else None),
        "delta_pair": None if delta_est is None else list(delta_est.pair),
        "class_distance_matrix": None if geometry is None else geometry.distance_matrix,
        "class_radii": None if geometry is None else geometry.radii,
        "transformer": T.name,
        "convergence_rate_source": estimation.convergence_rate(len(X), X.shape[1], cfg.p),
        "convergence_rate_target": estimation.convergence_rate(len(Y), Y.shape[1], cfg.p),
    }
    return summary, T, eps, eta, gamma, xi, delta


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def run_wasserstein(X, Y, cfg: RunConfig):
    report = _skeleton(cfg, "wasserstein")
    timer = _Timer()
    with timer("wasserstein"):
        report["wasserstein"] = _wasserstein_block(X, Y, cfg, cfg.seed)
    report["timings_ms"] = timer.ms
    return report, EXIT_OK


def run_estimate(X, Y, classes, cfg: RunConfig):
    report = _skeleton(cfg, "estimate")
    timer = _Timer()
    _estimate(X, Y, classes, cfg, report, timer, require_delta=False)
    report["timings_ms"] = timer.ms
    return report, EXIT_OK


def run_check(X, Y, classes, cfg: RunConfig):
    report = _skeleton(cfg, "check")
    timer = _Timer()
    _, T, eps, eta, gamma, xi, delta = _estimate(X, Y, classes, cfg, report, timer, require_delta=True)
    params = AnalogyParameters(eps, eta, gamma, xi, delta, cfg.alpha, cfg.beta)
    verdict = check_analogy(params)
    report["verdict"] = {
        "verified": verdict.verified,
        "status": verdict.status,
        "threshold_eq46": verdict.threshold_eq46,
        "threshold_table": verdict.threshold_table,
        "margin": verdict.margin,
        "violation_bound_eq49": verdict.violation_bound_eq49,
        "violation_bound_eq51": verdict.violation_bound_eq51,
    }

    F, L = _predicates(cfg)
    x0 = cfg.reference_point(X)
    report["x0"] = x0
    if F is not None and L is not None:
        with timer("fol"):
            fol = check_fol_statements(X, x0, eps, F, L)
        report["fol"] = {
            "stmt3_holds": fol.stmt3_holds,
            "stmt3_counterexamples": fol.stmt3_counterexamples[:MAX_LISTED],
            "stmt3_n_counterexamples": len(fol.stmt3_counterexamples),
            "stmt4_witness": fol.stmt4_witness,
            "stmt4": "witness found in sample" if fol.stmt4_found else "witness not found in sample",
            "in_ball": fol.in_ball,
            "n": fol.n,
        }
        if delta > 0:
            with timer("regularity"):
                reg = audit_regularity(X, x0, delta, F, L, cfg.pair_budget, cfg.seed)
            report["regularity"] = dataclasses.asdict(reg)
    with timer("hoare"):
        entries, region, _ = hoare_suite(X, T, x0, eps, delta, gamma, F, L, cfg)
    report["hoare"] = entries
    report["effective_region"] = region
    report["timings_ms"] = timer.ms
    return report, EXIT_OK if verdict.verified else EXIT_FAIL


def run_hoare(S, cfg: RunConfig):
    report = _skeleton(cfg, "hoare")
    timer = _Timer()
    seed = _need_seed(cfg, "the hoare command")
    F, L = _predicates(cfg)
    T = from_spec(cfg.transformer, seed)
    x0 = cfg.reference_point(S)
    with timer("transformer"):
        disp = _displacements(S, T)
    gamma = estimation.estimate_gamma(disp, cfg.beta) if cfg.gamma is None else float(cfg.gamma)
    report["parameters"] = {
        "epsilon": cfg.epsilon,
        "delta": cfg.delta,
        "gamma": gamma,
        "gamma_source": "estimated" if cfg.gamma is None else "config",
        "transformer": T.name,
        "deterministic": T.deterministic,
    }
    report["x0"] = x0
    with timer("hoare"):
        entries, region, ok = hoare_suite(S, T, x0, cfg.epsilon, cfg.delta, gamma, F, L, cfg)
    report["hoare"] = entries
    report["effective_region"] = region
    report["timings_ms"] = timer.ms
    return report, EXIT_OK if ok else EXIT_FAIL


def simulate_data(cfg: RunConfig):
    """Generate source, target and class data from ``cfg.generator``."""
    seed = _need_seed(cfg, "simulate")
    gen = cfg.generator
    if not isinstance(gen, dict) or "source" not in gen or "target" not in gen:
        raise ConfigError("generator needs 'source' and 'target' entries")

    def sample(spec, k):
        try:
            return generate_gaussian(
                int(spec["n"]),
                int(spec["d"]),
                spec.get("mean"),
                spec.get("scale", 1.0),
                streams.SeededStream(seed, (streams.GAUSSIAN, k)),
            )
        except KeyError as exc:
            raise ConfigError(f"generator entry is missing {exc}") from None

    X = sample(gen["source"], 0)
    Y = sample(gen["target"], 1)
    classes = generate_class_blobs(gen["classes"], seed) if gen.get("classes") else None
    return X, Y, classes


def run_simulate(cfg: RunConfig, outdir):
    X, Y, classes = simulate_data(cfg)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    save_dataset(outdir / "source.csv", X)
    save_dataset(outdir / "target.csv", Y)
    files = {"source": "source.csv", "target": "target.csv", "classes": None}
    if classes is not None:
        save_dataset(outdir / "classes.csv", classes.points, classes.labels)
        files["classes"] = "classes.csv"
    report, code = run_check(X, Y, classes, cfg)
    report["run"] = "simulate"
    report["generated"] = files
    return report, code


def run_bench(cfg: RunConfig):
    """Median wall time of exact and sliced W_p on a size sweep."""
    seed = _need_seed(cfg, "bench")
    b = cfg.bench or {}
    sizes = b.get("sizes", [250, 500, 1000, 2000])
    d = int(b.get("d", 16))
    proj = b.get("n_proj", [cfg.n_proj])
    repeats = max(int(b.get("repeats", 5)), 5)
    rows = []
    for n in sizes:
        n = int(n)
        X = generate_gaussian(n, d, stream=streams.SeededStream(seed, (streams.GAUSSIAN, 0)))
        Y = generate_gaussian(n, d, stream=streams.SeededStream(seed, (streams.GAUSSIAN, 1)))
        times, value = [], None
        try:
            for _ in range(repeats):
                t0 = time.perf_counter()
                value = wasserstein_exact(X, Y, cfg.p)[0]
                times.append((time.perf_counter() - t0) * 1e3)
            rows.append({"estimator": "exact", "n": n, "n_proj": None, "wall_ms": statistics.median(times), "distance": value})
        except SolverCapExceeded:
            rows.append({"estimator": "exact", "n": n, "n_proj": None, "wall_ms": None, "distance": None})
        for k in proj:
            times = []
            for _ in range(repeats):
                projection_directions.cache_clear()
                t0 = time.perf_counter()
                value = sliced_wasserstein(X, Y, cfg.p, int(k), seed)
                times.append((time.perf_counter() - t0) * 1e3)
            rows.append({"estimator": "sliced", "n": n, "n_proj": int(k), "wall_ms": statistics.median(times), "distance": value})
    report = _skeleton(cfg, "bench")
    report["bench"] = {"d": d, "repeats": repeats, "rows": rows}
    report["timings_ms"] = {"total": sum(r["wall_ms"] or 0.0 for r in rows) * repeats}
    return report, EXIT_OK
