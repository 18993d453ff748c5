"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""
import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io as spoc_io
from .estimator import spoc, threshold_communities
from .exceptions import DataFormatError, NumericalError
from .experiments import format_summary, run_diagnose, run_sweep, summarize
from .model import simulate

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 2, 3, 4

logger = logging.getLogger("spoc")


class UsageError(Exception):
    pass


def _add_estimation_flags(p):
    p.add_argument("--clip", action=argparse.BooleanOptionalAction, default=None,
                   help="truncate estimates into [0, 1] (default: on)")
    p.add_argument("--precondition", action=argparse.BooleanOptionalAction, default=None,
                   help="ellipsoid-rounded SPA")


def _load_config(args):
    if args.config:
        cfg = spoc_io.read_config(args.config)
    else:
        cfg = spoc_io.config_from_dict({})
    base = cfg.base
    if getattr(args, "seed", None) is not None:
        base = replace(base, seed=args.seed)
    cfg = replace(cfg, base=base)
    return cfg.with_overrides(
        trials=getattr(args, "trials", None),
        clip=getattr(args, "clip", None),
        precondition=getattr(args, "precondition", None),
        output_path=getattr(args, "out", None),
    )


def cmd_estimate(args):
    A = spoc_io.read_edge_list(args.graph)
    n = A.shape[0]
    if not 1 <= args.k <= n:
        raise UsageError(f"--k must lie in [1, n={n}], got {args.k}")
    clip = True if args.clip is None else args.clip
    res = spoc(A, args.k, clip=clip, precondition=bool(args.precondition))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spoc_io.write_matrix_csv(res.B_hat, out / "B_hat.csv")
    spoc_io.write_matrix_csv(res.Theta_hat, out / "Theta_hat.csv")
    if args.tau is not None:
        spoc_io.write_matrix_csv(threshold_communities(res.Theta_hat, args.tau), out / "communities.csv")
    emb = res.embedding
    print(f"nodes: {n}  communities: {args.k}")
    print(f"eigenvalues: {' '.join(f'{v:.6g}' for v in emb.eigvals)}")
    print(f"eigengap |lambda_K| - |lambda_K+1|: {emb.eigengap:.6g}{'  (degenerate)' if emb.degenerate else ''}")
    print(f"smallest singular value of F F^T: {res.gram_min_singular_value:.6g}")
    print(f"pure nodes: {' '.join(str(j) for j in res.J)}")
    return EXIT_OK


def cmd_simulate(args):
    cfg = _load_config(args)
    base = cfg.base
    if args.n is not None:
        base = replace(base, n=args.n)
    Theta, B, P, A = simulate(base)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spoc_io.write_edge_list(A, out / "graph.tsv")
    spoc_io.write_membership_csv(Theta, out / "membership.csv")
    spoc_io.write_matrix_csv(B, out / "B.csv")
    print(f"wrote n={base.n}, K={base.K}, edges={int(A.sum() // 2)} to {out}")
    return EXIT_OK


def cmd_sweep(args):
    cfg = _load_config(args)
    rows = run_sweep(cfg)
    print(format_summary(summarize(rows)))
    failed = sum(r.status != "ok" for r in rows)
    print(f"{len(rows)} rows ({failed} failed) written to {cfg.output_path}")
    return EXIT_OK


def cmd_diagnose(args):
    cfg = _load_config(args)
    rows = run_diagnose(cfg)
    failed = sum(r["status"] != "ok" for r in rows)
    print(f"{len(rows)} rows ({failed} failed) written to {cfg.output_path}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="spoc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate B and Theta from an edge list")
    p.add_argument("graph", help="edge list file")
    p.add_argument("--k", type=int, required=True, help="number of communities")
    p.add_argument("--tau", type=float, default=None, help="write thresholded communities at this level")
    p.add_argument("--out", default=".", help="output directory")
    _add_estimation_flags(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="sample an MMSB graph")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    for name, func, help_ in (
        ("sweep", cmd_sweep, "run a Monte-Carlo parameter sweep"),
        ("diagnose", cmd_diagnose, "per-trial perturbation diagnostics"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--out", help="output CSV path")
        _add_estimation_flags(p)
        p.set_defaults(func=func)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if getattr(args, "tau", None) is not None and not 0 < args.tau < 1:
        parser.error("--tau must lie in (0, 1)")
    if getattr(args, "trials", None) is not None and args.trials < 1:
        parser.error("--trials must be >= 1")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"spoc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFormatError, OSError) as exc:
        print(f"spoc: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"spoc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"spoc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
