"""File formats: edge lists, membership CSV, experiment config JSON, results CSV.

Edge list
    One edge per line, two non-negative integer node ids separated by
    whitespace (tab or spaces). Lines starting with ``#`` and blank lines are
    skipped. The graph is undirected; duplicates collapse, self-loops are
    dropped.

Membership CSV
    n rows of K comma-separated reals, no header.

Results CSV
    Header plus one line per trial, columns as in :data:`RESULT_FIELDS`,
    numbers printed with 12 significant digits, rows sorted by
    ``(sweep_value, seed)``.
"""
import csv
import json
import logging
import warnings
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np
import scipy.sparse as sp

from .exceptions import DataFormatError
from .model import (
    DEFAULT_ALPHA,
    DEFAULT_B,
    DEFAULT_K,
    DEFAULT_N,
    DEFAULT_PURE_PER_COMMUNITY,
    SimulationConfig,
)

logger = logging.getLogger(__name__)

ROW_SUM_TOL = 1e-6
ROUNDOFF_TOL = 1e-12


class SelfLoopWarning(UserWarning):
    def __init__(self, count):
        super().__init__(f"dropped {count} self-loop(s)")
        self.count = count


def read_edge_list(path, n_nodes=None):
    """Read an undirected edge list into a CSR adjacency matrix.

    The node count is ``max id + 1`` unless ``n_nodes`` is given.
    """
    rows, cols = [], []
    self_loops = 0
    max_id = -1
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                raise DataFormatError(f"{path}:{lineno}: expected two node ids, got {len(parts)} field(s)")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: node ids must be integers") from None
            if u < 0 or v < 0:
                raise DataFormatError(f"{path}:{lineno}: negative node id")
            max_id = max(max_id, u, v)
            if u == v:
                self_loops += 1
                continue
            rows.append(u)
            cols.append(v)
    if self_loops:
        logger.warning("%s: dropped %d self-loop(s)", path, self_loops)
        warnings.warn(SelfLoopWarning(self_loops), stacklevel=2)
    n = max_id + 1 if n_nodes is None else int(n_nodes)
    if max_id >= n:
        raise DataFormatError(f"node id {max_id} out of range for n_nodes={n}")
    r = np.array(rows + cols, dtype=np.int64)
    c = np.array(cols + rows, dtype=np.int64)
    A = sp.coo_matrix((np.ones(r.size), (r, c)), shape=(n, n)).tocsr()
    A.data[:] = 1.0  # duplicates were summed
    A.sort_indices()
    return A


def write_edge_list(A, path):
    """Write each undirected edge once as ``u<TAB>v`` with ``u < v``, sorted."""
    A = sp.triu(sp.csr_matrix(A), k=1).tocoo()
    order = np.lexsort((A.col, A.row))
    with open(path, "w") as fh:
        for u, v in zip(A.row[order], A.col[order]):
            fh.write(f"{u}\t{v}\n")


def read_membership_csv(path):
    """Read an n x K membership matrix.

    Rows must sum to 1 within 1e-6; rows off by more than roundoff are renormalized.
    """
    data = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                data.append([float(cell) for cell in row])
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: non-numeric cell") from None
    if not data:
        raise DataFormatError(f"{path}: empty membership file")
    widths = {len(r) for r in data}
    if len(widths) != 1:
        raise DataFormatError(f"{path}: rows have differing lengths {sorted(widths)}")
    Theta = np.array(data)
    if not np.all(np.isfinite(Theta)) or Theta.min() < 0:
        raise DataFormatError(f"{path}: entries must be finite and nonnegative")
    sums = Theta.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
    if bad.size:
        i = bad[0]
        raise DataFormatError(f"{path}:{i + 1}: row sums to {sums[i]:.9g}, expected 1")
    # Rows already summing to 1 up to roundoff are kept bit-for-bit.
    drift = np.abs(sums - 1.0) > ROUNDOFF_TOL
    Theta[drift] /= sums[drift, None]
    return Theta


def write_matrix_csv(X, path):
    """Write a real matrix as CSV using shortest round-trip float formatting."""
    X = np.atleast_2d(np.asarray(X))
    with open(path, "w") as fh:
        for row in X:
            fh.write(",".join(repr(float(x)) if X.dtype != bool else str(int(x)) for x in row) + "\n")


def read_matrix_csv(path):
    return np.loadtxt(path, delimiter=",", ndmin=2)


write_membership_csv = write_matrix_csv


# ---------------------------------------------------------------- results


@dataclass(frozen=True)
class ResultsRow:
    scenario: str
    sweep_value: float
    seed: int
    err_B: Optional[float] = None
    err_Theta: Optional[float] = None
    spearman: Optional[float] = None
    beta: Optional[float] = None
    wall_time_ms: Optional[float] = None
    status: str = "ok"
    message: str = ""

    def __post_init__(self):
        for name in ("err_B", "err_Theta"):
            v = getattr(self, name)
            if v is not None and not v >= 0:
                raise ValueError(f"{name} must be nonnegative, got {v}")
        if self.spearman is not None and not -1.0 <= self.spearman <= 1.0:
            raise ValueError(f"spearman must lie in [-1, 1], got {self.spearman}")


RESULT_FIELDS = tuple(f.name for f in fields(ResultsRow))


def format_number(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _sort_key(row):
    return (float(row["sweep_value"]), int(row["seed"]))


def write_rows_csv(rows, path, fieldnames):
    """Write dict rows in fixed column order, sorted by ``(sweep_value, seed)``."""
    rows = sorted(rows, key=_sort_key)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fieldnames)
        for row in rows:
            w.writerow([v if isinstance(v, str) else format_number(v) for v in (row[f] for f in fieldnames)])


def write_results_csv(rows, path):
    write_rows_csv([asdict(r) for r in rows], path, RESULT_FIELDS)


def read_results_csv(path):
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RESULT_FIELDS:
            raise DataFormatError(f"{path}: unexpected header {reader.fieldnames}")
        for rec in reader:
            vals = {}
            for f in fields(ResultsRow):
                s = rec[f.name]
                if f.name in ("scenario", "status", "message"):
                    vals[f.name] = s
                elif f.name == "seed":
                    vals[f.name] = int(s)
                else:
                    vals[f.name] = None if s == "" else float(s)
            out.append(ResultsRow(**vals))
    return out


# ---------------------------------------------------------------- config

SCENARIOS = ("vary_n", "skew_B", "vary_alpha", "offdiag_B", "single", "real_graph")
SWEEP_SCENARIOS = ("vary_n", "skew_B", "vary_alpha", "offdiag_B")

DEFAULT_TRIALS = 10
DEFAULT_SWEEPS = {
    "vary_n": [1000, 2000, 3000, 4000, 5000],
    "skew_B": [0.05, 0.15, 0.25, 0.35, 0.45],
    "vary_alpha": [0.5, 1.0, 2.0, 3.0, 4.0],
    "offdiag_B": [0.0, 0.1, 0.2, 0.3, 0.4],
}

_number = {"type": "number"}
CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "scenario": {"enum": list(SCENARIOS)},
        "n": {"type": "integer", "minimum": 1},
        "K": {"type": "integer", "minimum": 1},
        "alpha": {
            "oneOf": [
                {"type": "number", "exclusiveMinimum": 0},
                {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
            ]
        },
        "B": {"type": "array", "items": {"type": "array", "items": _number}},
        "pure_per_community": {"type": "integer", "minimum": 0},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "sweep": {"type": "array", "items": _number},
        "trials": {"type": "integer", "minimum": 1},
        "output_path": {"type": "string"},
        "clip": {"type": "boolean"},
        "precondition": {"type": "boolean"},
        "oracle": {"type": "boolean"},
        "diagnostics": {"type": "boolean"},
        "timing": {"type": "boolean"},
        "graph": {"type": "string"},
        "membership": {"type": "string"},
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment description.

    ``oracle`` runs the estimator on P instead of a sampled A; ``diagnostics``
    adds the beta column to result rows; ``timing`` records wall time (which
    makes output bytes run-dependent).
    """

    scenario: str = "single"
    base: SimulationConfig = SimulationConfig()
    sweep: tuple = ()
    trials: int = DEFAULT_TRIALS
    output_path: str = "results.csv"
    clip: bool = True
    precondition: bool = False
    oracle: bool = False
    diagnostics: bool = False
    timing: bool = False
    graph: Optional[str] = None
    membership: Optional[str] = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    def with_overrides(self, **kwargs):
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


def _path(err):
    return "$" + "".join(f"[{p!r}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)


def config_from_dict(doc):
    """Validate a config mapping and fill defaults."""
    validator = jsonschema.Draft7Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise DataFormatError(f"config error at {_path(e)}: {e.message}")

    K = doc.get("K", DEFAULT_K)
    scenario = doc.get("scenario", "single")
    if "B" in doc:
        B = doc["B"]
    elif K == DEFAULT_K:
        B = DEFAULT_B
    else:
        raise DataFormatError(f"config error at $.B: required when K={K} (default B is {DEFAULT_K}x{DEFAULT_K})")
    alpha = doc.get("alpha", DEFAULT_ALPHA)
    if np.ndim(alpha) == 0:
        alpha = [alpha] * K
    try:
        base = SimulationConfig(
            n=doc.get("n", DEFAULT_N),
            K=K,
            dirichlet_alpha=tuple(alpha),
            B=B,
            pure_per_community=doc.get("pure_per_community", DEFAULT_PURE_PER_COMMUNITY),
            seed=doc.get("seed", 0),
        )
    except (ValueError, DataFormatError) as exc:
        raise DataFormatError(f"config error: {exc}") from exc

    if "sweep" in doc:
        sweep = tuple(doc["sweep"])
        if scenario in SWEEP_SCENARIOS and not sweep:
            raise DataFormatError("config error at $.sweep: must be nonempty for sweep scenarios")
    else:
        sweep = tuple(DEFAULT_SWEEPS.get(scenario, ()))
    if scenario == "skew_B" and K != 3:
        raise DataFormatError("config error at $.K: skew_B scenario requires K=3")
    if scenario == "real_graph" and not ("graph" in doc and "membership" in doc):
        raise DataFormatError("config error: real_graph scenario requires 'graph' and 'membership'")
    return ExperimentConfig(
        scenario=scenario,
        base=base,
        sweep=sweep,
        trials=doc.get("trials", DEFAULT_TRIALS),
        output_path=doc.get("output_path", "results.csv"),
        clip=doc.get("clip", True),
        precondition=doc.get("precondition", False),
        oracle=doc.get("oracle", False),
        diagnostics=doc.get("diagnostics", False),
        timing=doc.get("timing", False),
        graph=doc.get("graph"),
        membership=doc.get("membership"),
    )


def read_config(path):
    """Read and validate an experiment config JSON file."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise DataFormatError(f"{path}: top-level JSON value must be an object")
    return config_from_dict(doc)

