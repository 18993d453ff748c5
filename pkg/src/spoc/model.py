"""Mixed membership stochastic block model: parameters, checks and sampling.

The model draws an undirected graph with edge probabilities

    P = Theta @ B @ Theta.T

where ``Theta`` (n x K) has rows on the probability simplex and ``B`` (K x K)
is a symmetric matrix of community-to-community edge probabilities.
"""
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .exceptions import DimensionError
from .validation import check_connectivity, check_membership_connectivity

DEFAULT_RANK_TOL = 1e-8

# Default simulation setting: 1000 nodes, three communities, one pure node each.
DEFAULT_N = 1000
DEFAULT_K = 3
DEFAULT_ALPHA = 0.5
DEFAULT_B = ((0.3, 0.0, 0.0), (0.0, 0.5, 0.0), (0.0, 0.0, 0.7))
DEFAULT_PURE_PER_COMMUNITY = 1


def make_rng(seed):
    """Seeded PCG64 generator; ``seed`` may be an int or a sequence of ints."""
    return np.random.Generator(np.random.PCG64(seed))


def trial_seed(seed, trial_index):
    """Per-trial seed, reproducible independently of the other trials."""
    return int(seed) ^ int(trial_index)


@dataclass(frozen=True)
class SimulationConfig:
    """Parameters of one synthetic MMSB instance.

    ``sampler`` replaces the Dirichlet draw for the non-pure rows; it is called
    as ``sampler(rng, n_rows, K)`` and must return an ``(n_rows, K)`` array of
    row-stochastic vectors.
    """

    n: int = DEFAULT_N
    K: int = DEFAULT_K
    dirichlet_alpha: tuple = DEFAULT_ALPHA
    B: tuple = DEFAULT_B
    pure_per_community: int = DEFAULT_PURE_PER_COMMUNITY
    seed: int = 0
    sampler: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        alpha = np.atleast_1d(np.asarray(self.dirichlet_alpha, dtype=np.float64))
        if alpha.size == 1:
            alpha = np.full(self.K, alpha[0])
        object.__setattr__(self, "dirichlet_alpha", tuple(float(a) for a in alpha))
        B = np.asarray(self.B, dtype=np.float64)
        object.__setattr__(self, "B", tuple(tuple(float(x) for x in row) for row in B))
        if not (self.n >= self.K >= 1):
            raise ValueError(f"need n >= K >= 1, got n={self.n}, K={self.K}")
        if alpha.size != self.K:
            raise DimensionError(f"dirichlet_alpha has {alpha.size} entries, expected K={self.K}")
        if np.any(alpha <= 0):
            raise ValueError("all Dirichlet parameters must be positive")
        if B.shape != (self.K, self.K):
            raise DimensionError(f"B has shape {B.shape}, expected ({self.K}, {self.K})")
        check_connectivity(B)
        if self.pure_per_community < 0:
            raise ValueError("pure_per_community must be nonnegative")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def B_array(self):
        return np.array(self.B, dtype=np.float64)

    @property
    def alpha_array(self):
        return np.array(self.dirichlet_alpha, dtype=np.float64)


class IdentifiabilityReport(NamedTuple):
    has_pure_node_per_community: bool
    B_full_rank: bool
    rows_normalized: bool

    @property
    def identifiable(self):
        return all(self)


def check_identifiability(Theta, B, rank_tol=DEFAULT_RANK_TOL):
    """Check the separability, rank and normalization conditions.

    Parameters
    ----------
    Theta : array of shape (n, K)
    B : array of shape (K, K)
    rank_tol : float
        A node counts as pure for community k if ``Theta[i, k] >= 1 - rank_tol``;
        B is full rank if its smallest singular value exceeds ``rank_tol``.

    Returns
    -------
    IdentifiabilityReport
    """
    Theta = np.asarray(Theta, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if Theta.ndim != 2 or B.ndim != 2 or B.shape != (Theta.shape[1], Theta.shape[1]):
        raise DimensionError(f"incompatible shapes Theta {Theta.shape} and B {B.shape}")
    has_pure = bool(np.all((Theta >= 1.0 - rank_tol).any(axis=0)))
    full_rank = bool(np.linalg.svd(B, compute_uv=False).min() > rank_tol)
    rows_ok = bool(
        np.all(Theta >= 0) and np.all(Theta <= 1) and np.allclose(Theta.sum(axis=1), 1.0, rtol=0, atol=1e-12)
    )
    return IdentifiabilityReport(has_pure, full_rank, rows_ok)


def _dirichlet_rows(rng, alpha, size):
    rows = rng.dirichlet(alpha, size=size)
    # Renormalize so every row sums to 1 to machine precision.
    return rows / rows.sum(axis=1, keepdims=True)


def sample_membership(cfg):
    """Draw the membership matrix for ``cfg``.

    The first ``K * pure_per_community`` rows are pure: row
    ``k * pure_per_community + j`` equals ``e_k``. The remaining rows are i.i.d.
    Dirichlet(alpha) draws (or come from ``cfg.sampler``).
    """
    K, p = cfg.K, cfg.pure_per_community
    n_pure = K * p
    if cfg.n < n_pure:
        raise ValueError(f"n={cfg.n} is smaller than the {n_pure} requested pure nodes")
    rng = make_rng(cfg.seed)
    pure = np.repeat(np.eye(K), p, axis=0)
    n_rest = cfg.n - n_pure
    if cfg.sampler is not None:
        rest = np.asarray(cfg.sampler(rng, n_rest, K), dtype=np.float64).reshape(n_rest, K)
    else:
        rest = _dirichlet_rows(rng, cfg.alpha_array, n_rest)
    return np.vstack([pure, rest])


def edge_probabilities(Theta, B):
    """Return ``P = Theta B Theta^T`` including the diagonal.

    The diagonal is kept so that P is exactly of rank at most K; adjacency
    sampling ignores it.
    """
    Theta, B = check_membership_connectivity(Theta, B)
    P = Theta @ B @ Theta.T
    P = 0.5 * (P + P.T)
    return np.clip(P, 0.0, 1.0)


def sample_adjacency(P, seed):
    """Draw a symmetric Bernoulli(P) adjacency matrix with an empty diagonal."""
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise DimensionError(f"P must be square, got shape {P.shape}")
    if P.size and (P.min() < 0 or P.max() > 1):
        raise ValueError("edge probabilities must lie in [0, 1]")
    n = P.shape[0]
    rng = make_rng(seed)
    A = np.zeros((n, n), dtype=np.float64)
    # Row-by-row upper triangle keeps memory at O(n^2) only for A itself.
    for i in range(n - 1):
        A[i, i + 1:] = rng.random(n - i - 1) < P[i, i + 1:]
    A += A.T
    return A


def simulate(cfg, adjacency_seed=None):
    """Sample ``(Theta, B, P, A)`` for ``cfg``.

    The adjacency draw uses a stream derived from ``cfg.seed`` unless
    ``adjacency_seed`` is given.
    """
    Theta = sample_membership(cfg)
    B = cfg.B_array
    P = edge_probabilities(Theta, B)
    if adjacency_seed is None:
        adjacency_seed = [int(cfg.seed), 1]
    A = sample_adjacency(P, adjacency_seed)
    return Theta, B, P, A
