"""Monte-Carlo experiment runner behind the ``sweep`` and ``diagnose`` commands."""
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from . import io as spoc_io
from .estimator import align_columns, align_to_truth, relative_error, spoc, spoc_oracle
from .metrics import (
    compute_diagnostics,
    concentration_check,
    spearman_quality,
    theorem2_check,
)
from .model import simulate, trial_seed

logger = logging.getLogger(__name__)

DIAGNOSTIC_FIELDS = (
    "scenario",
    "sweep_value",
    "seed",
    "spec_norm_gap",
    "lambda_K_P",
    "kappa_P",
    "beta",
    "lambda_K_Theta",
    "lambda_max_Theta",
    "theorem2_rhs",
    "err_B",
    "err_Theta",
    "ratio_B",
    "ratio_Theta",
    "concentration_lhs",
    "concentration_rhs",
    "concentration_ratio",
    "status",
    "message",
)


def point_config(cfg, value):
    """Simulation parameters for one sweep point."""
    base = cfg.base
    s = cfg.scenario
    if s == "vary_n":
        return replace(base, n=int(value))
    if s == "skew_B":
        return replace(base, B=np.diag([0.5 - value, 0.5, 0.5 + value]))
    if s == "vary_alpha":
        return replace(base, dirichlet_alpha=(float(value),) * base.K)
    if s == "offdiag_B":
        B = np.diag(np.diag(base.B_array))
        B[~np.eye(base.K, dtype=bool)] = value
        return replace(base, B=B)
    return base


def sweep_points(cfg):
    if cfg.scenario in ("single", "real_graph"):
        return list(cfg.sweep) or [0.0]
    return list(cfg.sweep)


def _n_workers():
    try:
        return max(1, int(os.environ.get("SPOC_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, jobs):
    workers = _n_workers()
    if workers == 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def _estimate(cfg, A, P, K):
    if cfg.oracle:
        return spoc_oracle(P, K, clip=cfg.clip, precondition=cfg.precondition)
    return spoc(A, K, clip=cfg.clip, precondition=cfg.precondition)


def run_trial(cfg, value, trial_index):
    """Sample, estimate, align and score one trial; failures become rows."""
    seed = trial_seed(cfg.base.seed, trial_index)
    t0 = time.perf_counter()
    try:
        sim_cfg = replace(point_config(cfg, value), seed=seed)
        Theta, B, P, A = simulate(sim_cfg)
        est = _estimate(cfg, A, P, sim_cfg.K)
        al = align_to_truth(est, Theta, B)
        rho = spearman_quality(est.Theta_hat, Theta, al.perm)
        beta = compute_diagnostics(P if cfg.oracle else A, P, Theta, B).beta if cfg.diagnostics else None
    except Exception as exc:  # noqa: BLE001 - a failed trial must not abort the sweep
        logger.warning("trial %s/%s (seed %d) failed: %s", cfg.scenario, value, seed, exc)
        return spoc_io.ResultsRow(cfg.scenario, float(value), seed, status="failed", message=f"{type(exc).__name__}: {exc}")
    wall = (time.perf_counter() - t0) * 1e3 if cfg.timing else None
    return spoc_io.ResultsRow(
        cfg.scenario, float(value), seed, al.aligned_error_B, al.aligned_error_Theta, rho, beta, wall
    )


def run_real_graph(cfg):
    """Estimate on an edge list and score against reference memberships."""
    t0 = time.perf_counter()
    K = cfg.base.K
    try:
        A = spoc_io.read_edge_list(cfg.graph)
        Theta = spoc_io.read_membership_csv(cfg.membership)
        if Theta.shape != (A.shape[0], K):
            raise ValueError(f"membership shape {Theta.shape} does not match graph with n={A.shape[0]}, K={K}")
        est = spoc(A, K, clip=cfg.clip, precondition=cfg.precondition)
        perm, _ = align_columns(est.Theta_hat, Theta)
        err_theta = relative_error(est.Theta_hat, Theta[:, perm])
        rho = spearman_quality(est.Theta_hat, Theta, perm)
    except Exception as exc:  # noqa: BLE001
        return [spoc_io.ResultsRow("real_graph", 0.0, cfg.base.seed, status="failed", message=f"{type(exc).__name__}: {exc}")]
    wall = (time.perf_counter() - t0) * 1e3 if cfg.timing else None
    return [spoc_io.ResultsRow("real_graph", 0.0, cfg.base.seed, None, err_theta, rho, None, wall)]


def run_sweep(cfg, out_path=None):
    """Run every (sweep point, trial) pair and write the results CSV.

    Returns the rows in output order.
    """
    if cfg.scenario == "real_graph":
        rows = run_real_graph(cfg)
    else:
        jobs = [(cfg, v, t) for v in sweep_points(cfg) for t in range(cfg.trials)]
        rows = _map(run_trial, jobs)
    rows = sorted(rows, key=lambda r: (r.sweep_value, r.seed))
    spoc_io.write_results_csv(rows, out_path or cfg.output_path)
    return rows


def _diagnose_trial(cfg, value, trial_index):
    seed = trial_seed(cfg.base.seed, trial_index)
    row = dict.fromkeys(DIAGNOSTIC_FIELDS)
    row.update(scenario=cfg.scenario, sweep_value=float(value), seed=seed, status="ok", message="")
    try:
        sim_cfg = replace(point_config(cfg, value), seed=seed)
        Theta, B, P, A = simulate(sim_cfg)
        if cfg.oracle:
            A = P
        est = _estimate(cfg, A, P, sim_cfg.K)
        al = align_to_truth(est, Theta, B)
        diag = compute_diagnostics(A, P, Theta, B)
        ratios = theorem2_check(diag, al.aligned_error_B, al.aligned_error_Theta)
        conc = concentration_check(A, P)
    except Exception as exc:  # noqa: BLE001
        row.update(status="failed", message=f"{type(exc).__name__}: {exc}")
        return row
    row.update(
        spec_norm_gap=diag.spec_norm_gap,
        lambda_K_P=diag.lambda_K_P,
        kappa_P=diag.kappa_P,
        beta=diag.beta,
        lambda_K_Theta=diag.lambda_bounds_Theta[0],
        lambda_max_Theta=diag.lambda_bounds_Theta[1],
        theorem2_rhs=diag.theorem2_rhs,
        err_B=al.aligned_error_B,
        err_Theta=al.aligned_error_Theta,
        ratio_B=ratios.ratio_B,
        ratio_Theta=ratios.ratio_Theta,
        concentration_lhs=conc.lhs,
        concentration_rhs=conc.rhs_scale,
        concentration_ratio=conc.ratio,
    )
    return row


def run_diagnose(cfg, out_path=None):
    """Per-trial perturbation diagnostics written as CSV; returns the rows."""
    jobs = [(cfg, v, t) for v in sweep_points(cfg) for t in range(cfg.trials)]
    rows = _map(_diagnose_trial, jobs)
    rows = sorted(rows, key=lambda r: (r["sweep_value"], r["seed"]))
    spoc_io.write_rows_csv(rows, out_path or cfg.output_path, DIAGNOSTIC_FIELDS)
    return rows


def summarize(rows, metrics=("err_B", "err_Theta", "spearman")):
    """Mean and standard error per sweep value over successful trials."""
    out = []
    for value in sorted({r.sweep_value for r in rows}):
        group = [r for r in rows if r.sweep_value == value]
        ok = [r for r in group if r.status == "ok"]
        rec = {"sweep_value": value, "trials": len(group), "failed": len(group) - len(ok)}
        for m in metrics:
            vals = np.array([getattr(r, m) for r in ok if getattr(r, m) is not None], dtype=float)
            rec[f"{m}_mean"] = float(vals.mean()) if vals.size else float("nan")
            rec[f"{m}_stderr"] = float(vals.std(ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else float("nan")
        out.append(rec)
    return out


def format_summary(summary):
    lines = [f"{'value':>10} {'trials':>6} {'failed':>6} {'err_B':>22} {'err_Theta':>22} {'spearman':>22}"]
    for rec in summary:
        cells = [
            f"{rec[m + '_mean']:.4g} +- {rec[m + '_stderr']:.2g}" for m in ("err_B", "err_Theta", "spearman")
        ]
        lines.append(
            f"{rec['sweep_value']:>10.4g} {rec['trials']:>6d} {rec['failed']:>6d} "
            + " ".join(f"{c:>22}" for c in cells)
        )
    return "\n".join(lines)
