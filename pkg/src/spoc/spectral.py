"""Rank-K symmetric eigendecomposition and spectral-norm utilities."""
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .exceptions import DimensionError, EigenSolverError
from .validation import check_symmetric

DENSE_MAX_N = 2000
DEFAULT_EIG_TOL = 1e-8
# Dense input below this fill fraction is converted to CSR for Lanczos matvecs.
SPARSE_DENSITY = 0.4


@dataclass(frozen=True)
class SpectralEmbedding:
    """Top-K eigenpairs ordered by decreasing absolute eigenvalue.

    Attributes
    ----------
    eigvecs : ndarray of shape (n, K)
        Orthonormal columns; in each column the entry of largest magnitude is
        positive.
    eigvals : ndarray of shape (K,)
    eigengap : float
        ``|lambda_K| - |lambda_{K+1}|``; ``inf`` when K == n.
    degenerate : bool
        True when ``|lambda_K|`` ties with ``|lambda_{K+1}|`` to solver accuracy,
        in which case the K-th eigenvector is not uniquely defined.
    """

    eigvecs: np.ndarray
    eigvals: np.ndarray
    eigengap: float = np.inf
    degenerate: bool = False
    method: str = "dense"

    @property
    def n(self):
        return self.eigvecs.shape[0]

    @property
    def K(self):
        return self.eigvecs.shape[1]

    def reconstruct(self):
        return (self.eigvecs * self.eigvals) @ self.eigvecs.T


def _fix_signs(vecs):
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def _order_by_magnitude(vals, vecs):
    # Stable sort on -|lambda|: ties keep the solver's (ascending) order.
    order = np.argsort(-np.abs(vals), kind="stable")
    return vals[order], vecs[:, order]


def top_k_eigen(M, K, tol=DEFAULT_EIG_TOL, method="auto"):
    """Return the K eigenpairs of ``M`` with the largest absolute eigenvalues.

    Parameters
    ----------
    M : array_like or sparse matrix of shape (n, n)
        Symmetric matrix.
    K : int
        Number of eigenpairs, ``1 <= K <= n``.
    tol : float
        Symmetry tolerance and residual contract: each pair satisfies
        ``||M v - lambda v|| <= tol * ||M||``.
    method : {"auto", "dense", "lanczos"}
        ``auto`` uses a dense LAPACK solve for ``n <= 2000`` and ARPACK's
        implicitly restarted Lanczos above.

    Returns
    -------
    SpectralEmbedding
    """
    M = check_symmetric(M, tol=tol)
    n = M.shape[0]
    if not 1 <= K <= n:
        raise DimensionError(f"need 1 <= K <= n, got K={K}, n={n}")
    if method == "auto":
        method = "dense" if n <= DENSE_MAX_N else "lanczos"
    # Lanczos needs k < n - 1; one extra pair is requested to measure the gap.
    if method == "lanczos" and K + 1 >= n - 1:
        method = "dense"

    n_want = min(K + 1, n)
    if method == "dense":
        dense = M.toarray() if sp.issparse(M) else M
        if 2 * n_want < n:
            # The n_want largest |lambda| lie among the n_want smallest and largest.
            lo_vals, lo_vecs = sla.eigh(dense, subset_by_index=[0, n_want - 1])
            hi_vals, hi_vecs = sla.eigh(dense, subset_by_index=[n - n_want, n - 1])
            vals = np.concatenate([lo_vals, hi_vals])
            vecs = np.hstack([lo_vecs, hi_vecs])
        else:
            vals, vecs = sla.eigh(dense)
        vals, vecs = _order_by_magnitude(vals, vecs)
        vals, vecs = vals[:n_want], vecs[:, :n_want]
        iterations = None
    elif method == "lanczos":
        op = M
        if not sp.issparse(M) and np.count_nonzero(M) < SPARSE_DENSITY * M.size:
            op = sp.csr_matrix(M)
        v0 = np.ones(n) / np.sqrt(n)
        maxiter = max(1000, 20 * n)
        try:
            vals, vecs = spla.eigsh(op, k=n_want, which="LM", tol=1e-2 * tol, v0=v0, maxiter=maxiter)
        except spla.ArpackNoConvergence as exc:
            raise EigenSolverError(
                f"Lanczos eigensolver did not converge within {maxiter} iterations "
                f"({len(exc.eigenvalues)} of {n_want} pairs converged)",
                iterations=maxiter,
            ) from exc
        vals, vecs = _order_by_magnitude(vals, vecs)
        iterations = maxiter
    else:
        raise ValueError(f"unknown method {method!r}")

    top_vals = vals[:K].copy()
    top_vecs = _fix_signs(np.ascontiguousarray(vecs[:, :K]))
    norm_M = abs(vals[0]) if vals.size else 0.0

    resid = np.linalg.norm(M @ top_vecs - top_vecs * top_vals, axis=0)
    if norm_M > 0 and resid.max() > tol * norm_M:
        raise EigenSolverError(
            f"eigenpair residual {resid.max():.3e} exceeds {tol:.1e} * ||M|| ({method} solver)",
            iterations=iterations,
        )

    if n_want > K:
        gap = float(abs(vals[K - 1]) - abs(vals[K]))
        degenerate = gap <= max(tol * norm_M, np.finfo(float).eps * n * norm_M)
    else:
        gap, degenerate = np.inf, False
    return SpectralEmbedding(top_vecs, top_vals, gap, bool(degenerate), method)


def spectral_norm(M, tol=1e-6, max_iter=100_000, seed=0):
    """Largest absolute eigenvalue of a symmetric matrix by power iteration.

    The iterate converges to the dominant eigenspace of ``M^2``, so a pair of
    eigenvalues ``+lambda, -lambda`` does not stall convergence. Iteration
    stops once the estimate changes by less than ``tol / 100`` relatively,
    which keeps the final error below ``tol`` for moderate spectral gaps.
    """
    M = check_symmetric(M, tol=1e-10)
    n = M.shape[0]
    if n == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    est = 0.0
    for it in range(1, max_iter + 1):
        w = M @ v
        new = float(np.linalg.norm(w))
        if new == 0.0:
            return 0.0
        v = w / new
        if abs(new - est) <= 1e-2 * tol * new:
            return new
        est = new
    raise EigenSolverError(f"power iteration did not converge in {max_iter} iterations", iterations=max_iter)


def procrustes_rotation(U, U_hat):
    """Orthogonal ``O`` minimizing ``||U_hat - U O||_F`` (polar factor of ``U^T U_hat``)."""
    W, _, Vt = np.linalg.svd(U.T @ U_hat)
    return W @ Vt


def subspace_distance(U, U_hat):
    """``min_O ||U_hat - U O||_F`` over orthogonal ``O``."""
    O = procrustes_rotation(U, U_hat)
    return float(np.linalg.norm(U_hat - U @ O))


def davis_kahan_bound(perturbation_norm, lambda_K, K):
    """Upper bound ``2 sqrt(2K) ||E|| / lambda_K`` on the eigenvector perturbation."""
    if lambda_K <= 0:
        raise ValueError("lambda_K must be positive")
    return 2.0 * np.sqrt(2.0 * K) * perturbation_norm / lambda_K
