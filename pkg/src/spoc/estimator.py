"""SPOC: spectral embedding followed by successive projections.

Pipeline for an adjacency matrix ``A`` and community count ``K``:

1. ``A ~ U_hat diag(lambda_hat) U_hat^T`` (top-K by absolute eigenvalue);
2. ``J = spa(U_hat^T, K)`` locates one (nearly) pure node per community;
3. ``F_hat = U_hat[J]``;
4. ``B_hat = F_hat diag(lambda_hat) F_hat^T``;
5. ``Theta_hat = U_hat F_hat^T (F_hat F_hat^T)^{-1}``.
"""
import itertools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linear_sum_assignment
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import DimensionError, RankDeficiencyError, SingularFactorError
from .spa import spa
from .spectral import SpectralEmbedding, top_k_eigen
from .validation import check_adjacency, check_symmetric

MAX_GRAM_CONDITION = 1e12
EIGENVALUE_RANK_TOL = 1e-10
EXHAUSTIVE_ALIGN_MAX_K = 8
ALIGN_MAX_K = 20


@dataclass(frozen=True)
class EstimationResult:
    B_hat: np.ndarray
    Theta_hat: np.ndarray
    J: np.ndarray
    embedding: SpectralEmbedding
    clipped: bool
    gram_min_singular_value: float

    @property
    def K(self):
        return self.B_hat.shape[0]


class PermutationAlignment(NamedTuple):
    """``perm[k]`` is the true community matched to estimated column ``k``."""

    perm: np.ndarray
    aligned_error_B: float
    aligned_error_Theta: float
    method: str


def clip_unit(X):
    """Truncate entries into [0, 1]."""
    return np.clip(X, 0.0, 1.0)


def _factor_from_embedding(emb, precondition):
    U, lam = emb.eigvecs, emb.eigvals
    K = U.shape[1]
    if abs(lam[-1]) <= EIGENVALUE_RANK_TOL * abs(lam[0]):
        raise RankDeficiencyError(
            f"input has numerical rank below K={K}: |lambda_K| = {abs(lam[-1]):.3e}, |lambda_1| = {abs(lam[0]):.3e}"
        )
    J = spa(U.T, K, precondition=precondition).indices
    F = U[J]
    gram = F @ F.T
    sv = np.linalg.svd(gram, compute_uv=False)
    if sv[-1] <= 0 or sv[0] / sv[-1] > MAX_GRAM_CONDITION:
        raise SingularFactorError(
            f"F F^T is numerically singular (smallest singular value {sv[-1]:.3e})",
            smallest_singular_value=float(sv[-1]),
        )
    return J, F, gram, float(sv[-1])


def _estimate(M, K, clip, precondition, tol):
    emb = top_k_eigen(M, K, tol=tol)
    J, F, gram, smin = _factor_from_embedding(emb, precondition)
    B_hat = (F * emb.eigvals) @ F.T
    B_hat = 0.5 * (B_hat + B_hat.T)
    # gram is symmetric, so solve(gram, F U^T)^T = U F^T gram^{-1}.
    Theta_hat = np.linalg.solve(gram, F @ emb.eigvecs.T).T
    # Rows J equal F F^T (F F^T)^{-1} = I exactly; drop the solve's roundoff there.
    Theta_hat[J] = np.eye(K)
    if clip:
        B_hat, Theta_hat = clip_unit(B_hat), clip_unit(Theta_hat)
    return EstimationResult(B_hat, Theta_hat, J, emb, bool(clip), smin)


def spoc(A, K, clip=True, precondition=False, tol=1e-8):
    """Estimate ``(B, Theta)`` from a symmetric binary adjacency matrix.

    Parameters
    ----------
    A : array_like or sparse matrix of shape (n, n)
    K : int
        Number of communities.
    clip : bool
        Truncate the entries of both estimates into [0, 1]. Rows of
        ``Theta_hat`` are never renormalized.
    precondition : bool
        Use ellipsoid-rounded SPA.

    Returns
    -------
    EstimationResult
    """
    A = check_adjacency(A)
    return _estimate(A, int(K), clip, precondition, tol)


def spoc_oracle(P, K, clip=False, precondition=False, tol=1e-8):
    """Run the SPOC pipeline on a known edge-probability matrix instead of ``A``."""
    P = check_symmetric(P, tol=1e-10)
    return _estimate(P, int(K), clip, precondition, tol)


def relative_error(X_hat, X):
    return float(np.linalg.norm(X_hat - X) / np.linalg.norm(X))


def align_columns(Theta_hat, Theta):
    """Permutation ``perm`` minimizing ``||Theta_hat - Theta[:, perm]||_F``.

    Exhaustive over all ``K!`` permutations for ``K <= 8``; optimal linear
    assignment (Hungarian method) on the same column cost for ``8 < K <= 20``.
    Returns ``(perm, method)``.
    """
    Theta_hat = np.asarray(Theta_hat, dtype=np.float64)
    Theta = np.asarray(Theta, dtype=np.float64)
    if Theta_hat.shape != Theta.shape:
        raise DimensionError(f"shapes differ: {Theta_hat.shape} vs {Theta.shape}")
    K = Theta.shape[1]
    if K > ALIGN_MAX_K:
        raise ValueError(f"alignment supports K <= {ALIGN_MAX_K}, got K={K}")
    # cost[k, l] = ||Theta_hat[:, k] - Theta[:, l]||^2
    cost = (
        (Theta_hat**2).sum(axis=0)[:, None]
        + (Theta**2).sum(axis=0)[None, :]
        - 2.0 * Theta_hat.T @ Theta
    )
    if K <= EXHAUSTIVE_ALIGN_MAX_K:
        rows = np.arange(K)
        best, best_cost = None, np.inf
        for p in itertools.permutations(range(K)):
            c = cost[rows, p].sum()
            if c < best_cost:
                best, best_cost = p, c
        return np.array(best), "exhaustive"
    _, perm = linear_sum_assignment(cost)
    return perm, "hungarian"


def align_to_truth(est, Theta, B):
    """Resolve the community label ambiguity against ground truth.

    The permutation is chosen on memberships (see :func:`align_columns`) and
    the same permutation is applied to both reported relative errors.
    """
    Theta_hat = np.asarray(est.Theta_hat, dtype=np.float64)
    B_hat = np.asarray(est.B_hat, dtype=np.float64)
    Theta = np.asarray(Theta, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    K = Theta.shape[1]
    if B.shape != (K, K) or B_hat.shape != (K, K):
        raise DimensionError("estimate and truth dimensions disagree")
    perm, method = align_columns(Theta_hat, Theta)
    err_theta = relative_error(Theta_hat, Theta[:, perm])
    err_b = relative_error(B_hat, B[np.ix_(perm, perm)])
    return PermutationAlignment(perm, err_b, err_theta, method)


def threshold_communities(Theta_hat, tau=None):
    """Boolean community assignment: node i is in community k iff ``Theta_hat[i, k] > tau``.

    ``tau`` defaults to ``1 / K``.
    """
    Theta_hat = np.asarray(Theta_hat, dtype=np.float64)
    if tau is None:
        tau = 1.0 / Theta_hat.shape[1]
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    return Theta_hat > tau


class SPOC(TransformerMixin, BaseEstimator):
    """Successive projection overlapping clustering.

    Parameters
    ----------
    n_communities : int, default=3
    clip : bool, default=True
        Truncate estimates into [0, 1].
    precondition : bool, default=False
        Ellipsoid-rounded SPA.
    threshold : float or None, default=None
        Membership threshold used by :meth:`predict`; ``None`` means ``1/K``.
    tol : float, default=1e-8
        Eigensolver residual tolerance.

    Attributes
    ----------
    B_ : ndarray of shape (K, K)
        Estimated community connectivity.
    theta_ : ndarray of shape (n, K)
        Estimated memberships of the training nodes.
    pure_nodes_ : ndarray of shape (K,)
        Indices selected by SPA.
    eigenvalues_, eigenvectors_ :
        Spectral embedding of the training adjacency.
    result_ : EstimationResult

    Examples
    --------
    >>> from spoc import SPOC, SimulationConfig, simulate
    >>> Theta, B, P, A = simulate(SimulationConfig(n=300, seed=1))
    >>> est = SPOC(n_communities=3).fit(A)
    >>> est.theta_.shape
    (300, 3)
    """

    def __init__(self, n_communities=3, clip=True, precondition=False, threshold=None, tol=1e-8):
        self.n_communities = n_communities
        self.clip = clip
        self.precondition = precondition
        self.threshold = threshold
        self.tol = tol

    def fit(self, X, y=None):
        """Fit on a symmetric binary adjacency matrix ``X``."""
        X = check_adjacency(X)
        if not 1 <= self.n_communities <= X.shape[0]:
            raise ValueError(f"n_communities={self.n_communities} must lie in [1, {X.shape[0]}]")
        res = _estimate(X, int(self.n_communities), self.clip, self.precondition, self.tol)
        self.result_ = res
        self.B_ = res.B_hat
        self.theta_ = res.Theta_hat
        self.pure_nodes_ = res.J
        self.eigenvalues_ = res.embedding.eigvals
        self.eigenvectors_ = res.embedding.eigvecs
        self.n_features_in_ = X.shape[1]
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).theta_

    def transform(self, X):
        """Memberships for nodes given their adjacency rows to the training nodes.

        Rows are embedded as ``X U_hat diag(lambda_hat)^{-1}``, which reproduces
        the training embedding exactly when ``X`` is the training adjacency.
        """
        check_is_fitted(self, "theta_")
        if sp.issparse(X):
            X = sp.csr_matrix(X, dtype=np.float64)
        else:
            X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features_in_:
            raise DimensionError(f"X has {X.shape[1]} columns, expected {self.n_features_in_}")
        emb = np.asarray(X @ self.eigenvectors_) / self.eigenvalues_
        F = self.eigenvectors_[self.pure_nodes_]
        Theta = np.linalg.solve(F @ F.T, F @ emb.T).T
        return clip_unit(Theta) if self.clip else Theta

    def predict(self, X):
        """Boolean overlapping community assignment for the rows of ``X``."""
        return threshold_communities(self.transform(X), self.threshold)
