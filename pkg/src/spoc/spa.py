"""Successive projection algorithm for separable matrix factorization.

Given ``G = F W`` where ``W = (I, M) Pi`` has simplex columns, the columns of G
lie in the convex hull of the columns of F and every column of F appears
among the columns of G. SPA recovers their positions greedily: pick the
column of largest norm, project everything onto its orthogonal complement,
repeat.
"""
from typing import NamedTuple

import numpy as np

from .exceptions import ConvergenceError, DimensionError, RankDeficiencyError

# Relative pivot norm below which the residual is treated as zero.
ZERO_RESIDUAL_TOL = 1e-12


class SpaResult(NamedTuple):
    indices: np.ndarray
    residual_norms: np.ndarray
    transform: np.ndarray = None


def spa(G, r=None, precondition=False, *, mvee_tol=1e-6, mvee_max_iter=None):
    """Select ``r`` columns of ``G`` that are vertices of its convex hull.

    Parameters
    ----------
    G : array_like of shape (K, n)
    r : int, optional
        Number of columns to select, defaults to K.
    precondition : bool
        Round the point cloud with its minimum-volume enclosing ellipsoid
        before selecting (see :func:`precondition_mvee`).

    Returns
    -------
    SpaResult
        ``indices`` in selection order and the residual norm of each pivot.

    Raises
    ------
    RankDeficiencyError
        If the residual vanishes before ``r`` columns are selected.
    """
    G = np.asarray(G, dtype=np.float64)
    if G.ndim != 2:
        raise DimensionError(f"G must be 2-d, got shape {G.shape}")
    K, n = G.shape
    r = K if r is None else int(r)
    if not 1 <= r <= K <= n:
        raise DimensionError(f"need 1 <= r <= K <= n, got r={r}, K={K}, n={n}")
    if not np.all(np.isfinite(G)):
        raise ValueError("G contains non-finite entries")

    transform = None
    if precondition:
        transform, G = precondition_mvee(G, tol=mvee_tol, max_iter=mvee_max_iter)

    R = G.copy()
    scale = np.sqrt((G**2).sum(axis=0).max())
    basis = np.zeros((K, r))
    indices = np.empty(r, dtype=np.intp)
    pivots = np.empty(r)
    for t in range(r):
        norms = (R**2).sum(axis=0)
        j = int(np.argmax(norms))
        pivot = np.sqrt(norms[j])
        if pivot <= ZERO_RESIDUAL_TOL * max(scale, np.finfo(float).tiny):
            raise RankDeficiencyError(f"residual vanished after {t} of {r} selections")
        u = R[:, j] / pivot
        # Re-orthogonalize against earlier directions to limit drift.
        u -= basis[:, :t] @ (basis[:, :t].T @ u)
        u /= np.linalg.norm(u)
        basis[:, t] = u
        R -= np.outer(u, u @ R)
        R -= np.outer(u, u @ R)
        indices[t] = j
        pivots[t] = pivot
    return SpaResult(indices, pivots, transform)


def precondition_mvee(G, tol=1e-6, max_iter=None):
    """Linear map that rounds the columns of ``G`` to the unit ball.

    Computes the origin-centred minimum-volume enclosing ellipsoid
    ``{x : x^T H x <= 1}`` of the columns of ``G`` (equivalently of the
    symmetric set ``+-g_i``) by Khachiyan's barycentric coordinate ascent with
    Todd-Yildirim away steps, then returns ``L = H^{1/2}`` and ``L @ G``.

    Parameters
    ----------
    G : array_like of shape (K, n)
    tol : float
        Stop when ``max_i g_i^T X(u)^{-1} g_i <= K (1 + tol)``.
    max_iter : int, optional
        Defaults to ``10 * K * n``.

    Returns
    -------
    transform : ndarray of shape (K, K)
    conditioned : ndarray of shape (K, n)
    """
    G = np.asarray(G, dtype=np.float64)
    K, n = G.shape
    if max_iter is None:
        max_iter = 10 * K * n
    sv = np.linalg.svd(G, compute_uv=False)
    if sv.size < K or sv[-1] <= ZERO_RESIDUAL_TOL * sv[0]:
        raise RankDeficiencyError(f"preconditioning needs rank {K} input")

    d = float(K)
    u = np.full(n, 1.0 / n)
    for it in range(max_iter):
        X = (G * u) @ G.T
        Xinv_G = np.linalg.solve(X, G)
        kappa = np.einsum("ij,ij->j", G, Xinv_G)
        j = int(np.argmax(kappa))
        kmax = kappa[j]
        if kmax <= d * (1.0 + tol):
            break
        support = np.flatnonzero(u > 0)
        a = support[np.argmin(kappa[support])]
        kmin = kappa[a]
        if kmax - d >= d - kmin or u[a] >= 1.0:
            step = (kmax / d - 1.0) / (kmax - 1.0)
            u *= 1.0 - step
            u[j] += step
        else:
            step = (1.0 - kmin / d) / (kmin - 1.0) if kmin > 1.0 else np.inf
            step = min(step, u[a] / (1.0 - u[a]))
            u *= 1.0 + step
            u[a] -= step
            u[a] = max(u[a], 0.0)
    else:
        raise ConvergenceError(f"MVEE did not reach tol={tol} in {max_iter} iterations", iterations=max_iter)

    H = np.linalg.inv(X) / d
    w, V = np.linalg.eigh(0.5 * (H + H.T))
    L = (V * np.sqrt(w)) @ V.T
    return L, L @ G


def condition_number(F):
    """Ratio of the extreme singular values of ``F``."""
    sv = np.linalg.svd(np.asarray(F, dtype=np.float64), compute_uv=False)
    if sv[-1] <= 0 or sv[-1] <= np.finfo(float).eps * sv[0]:
        raise RankDeficiencyError("matrix is singular")
    return float(sv[0] / sv[-1])


def spa_error_bound(F, eps):
    """Worst-case distance ``(432 kappa(F) + 4) eps`` of a selected column to its vertex."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return (432.0 * condition_number(F) + 4.0) * eps


def spa_noise_admissible(F, eps, r=None):
    """Whether column noise of norm ``eps`` is small enough for the SPA bound to apply."""
    F = np.asarray(F, dtype=np.float64)
    r = F.shape[0] if r is None else r
    smin = np.linalg.svd(F, compute_uv=False)[-1]
    return bool(eps <= smin / (1225.0 * np.sqrt(r)))
