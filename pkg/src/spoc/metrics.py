"""Error metrics, rank-correlation quality and perturbation diagnostics."""
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import rankdata

from .exceptions import DimensionError
from .spectral import spectral_norm, top_k_eigen

# Leading constant of the row-wise eigenvector perturbation bound.
ROW_BOUND_CONSTANT = 23.0


def relative_frobenius_error(X_hat, X_target):
    """``||X_hat - X_target||_F / ||X_target||_F``."""
    X_hat = np.asarray(X_hat, dtype=np.float64)
    X_target = np.asarray(X_target, dtype=np.float64)
    if X_hat.shape != X_target.shape:
        raise DimensionError(f"shapes differ: {X_hat.shape} vs {X_target.shape}")
    denom = np.linalg.norm(X_target)
    if denom == 0:
        raise ValueError("target has zero Frobenius norm")
    return float(np.linalg.norm(X_hat - X_target) / denom)


def _dense(M):
    return M.toarray() if hasattr(M, "toarray") else np.asarray(M, dtype=np.float64)


class PopulationSpectrum(NamedTuple):
    U: np.ndarray
    lambda_K: float
    kappa: float


def population_spectrum(P, K):
    """Top-K eigenvectors of P with ``lambda_K(P)`` and ``kappa(P) = |lambda_1| / |lambda_K|``."""
    emb = top_k_eigen(P, K)
    lam = np.abs(emb.eigvals)
    if lam[-1] == 0:
        raise ValueError("lambda_K(P) is zero")
    return PopulationSpectrum(emb.eigvecs, float(lam[-1]), float(lam[0] / lam[-1]))


def beta_rows(A, P, U, *, gap_norm=None, lambda_K=None, kappa=None):
    """Row-wise eigenvector perturbation bound for every node.

    For node i::

        beta_i = 23 sqrt(K) kappa(P) ||A_i|| ||A - P|| / lambda_K(P)^2
                 + ||(A - P)_i U|| / lambda_K(P)

    ``gap_norm``, ``lambda_K`` and ``kappa`` are computed from the inputs when
    not supplied.
    """
    A = _dense(A)
    P = np.asarray(P, dtype=np.float64)
    U = np.asarray(U, dtype=np.float64)
    if A.shape != P.shape or U.shape[0] != P.shape[0]:
        raise DimensionError("A, P and U dimensions disagree")
    K = U.shape[1]
    E = A - P
    if lambda_K is None or kappa is None:
        lam = np.abs(np.linalg.eigvalsh(P))
        lam = np.sort(lam)[::-1][:K]
        lambda_K = lam[-1] if lambda_K is None else lambda_K
        kappa = lam[0] / lam[-1] if kappa is None else kappa
    if lambda_K <= 0:
        raise ValueError("lambda_K(P) must be positive")
    if gap_norm is None:
        gap_norm = spectral_norm(E)
    row_norms_A = np.linalg.norm(A, axis=1)
    first = ROW_BOUND_CONSTANT * np.sqrt(K) * kappa * row_norms_A * gap_norm / lambda_K**2
    second = np.linalg.norm(E @ U, axis=1) / lambda_K
    return first + second


def beta_row(A, P, U, i, **kwargs):
    """Perturbation bound for node ``i`` alone (see :func:`beta_rows`)."""
    return float(beta_rows(A, P, U, **kwargs)[i])


def beta(A, P, U, **kwargs):
    """Maximum over nodes of :func:`beta_rows`."""
    return float(beta_rows(A, P, U, **kwargs).max())


def membership_singular_values(Theta):
    """``(lambda_K(Theta), lambda_max(Theta))``: extreme singular values."""
    sv = np.linalg.svd(np.asarray(Theta, dtype=np.float64), compute_uv=False)
    return float(sv[-1]), float(sv[0])


def theorem2_rate(n, K, rho):
    """Rate ``K sqrt(log n / (rho^2 n))`` governing both relative estimation errors."""
    return float(K * np.sqrt(np.log(n) / (rho**2 * n)))


@dataclass(frozen=True)
class DiagnosticsBundle:
    spec_norm_gap: float
    lambda_K_P: float
    kappa_P: float
    beta: float
    beta_rows: np.ndarray
    lambda_bounds_Theta: tuple
    theorem2_rhs: float


def compute_diagnostics(A, P, Theta, B):
    """Perturbation quantities for one simulated instance with known ``P``."""
    A = _dense(A)
    P = np.asarray(P, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    n, K = np.shape(Theta)
    U, lam_K, kappa = population_spectrum(P, K)
    gap = spectral_norm(A - P)
    rows = beta_rows(A, P, U, gap_norm=gap, lambda_K=lam_K, kappa=kappa)
    return DiagnosticsBundle(
        spec_norm_gap=gap,
        lambda_K_P=lam_K,
        kappa_P=kappa,
        beta=float(rows.max()),
        beta_rows=rows,
        lambda_bounds_Theta=membership_singular_values(Theta),
        theorem2_rhs=theorem2_rate(n, K, float(B.max())),
    )


class Theorem2Ratios(NamedTuple):
    ratio_B: float
    ratio_Theta: float


def theorem2_check(diag, err_B, err_Theta):
    """Observed errors divided by the theoretical rate (no constant is asserted)."""
    rhs = diag.theorem2_rhs if isinstance(diag, DiagnosticsBundle) else float(diag)
    return Theorem2Ratios(err_B / rhs, err_Theta / rhs)


class ConcentrationReport(NamedTuple):
    lhs: float
    rhs_scale: float

    @property
    def ratio(self):
        return self.lhs / self.rhs_scale


def concentration_check(A, P):
    """Compare ``||A - P||`` with ``sqrt(max(n rho, log n))``, ``rho = max P``."""
    A = _dense(A)
    P = np.asarray(P, dtype=np.float64)
    n = P.shape[0]
    rho = float(P.max()) if P.size else 0.0
    lhs = spectral_norm(A - P)
    return ConcentrationReport(lhs, float(np.sqrt(max(n * rho, np.log(n)))))


def spearman_scores(Theta_hat, Theta, perm=None):
    """Per-community Spearman correlation after column alignment.

    Ties get average ranks. Returns ``(scores, undefined)`` where ``undefined``
    marks columns that are constant on either side; their score is 0.
    """
    Theta_hat = np.asarray(Theta_hat, dtype=np.float64)
    Theta = np.asarray(Theta, dtype=np.float64)
    if Theta_hat.shape != Theta.shape:
        raise DimensionError(f"shapes differ: {Theta_hat.shape} vs {Theta.shape}")
    K = Theta.shape[1]
    perm = np.arange(K) if perm is None else np.asarray(perm)
    truth = Theta[:, perm]
    scores = np.zeros(K)
    undefined = np.zeros(K, dtype=bool)
    for k in range(K):
        x = rankdata(truth[:, k])
        y = rankdata(Theta_hat[:, k])
        x -= x.mean()
        y -= y.mean()
        denom = np.sqrt((x @ x) * (y @ y))
        if denom == 0:
            undefined[k] = True
            continue
        scores[k] = np.clip((x @ y) / denom, -1.0, 1.0)
    return scores, undefined


def spearman_quality(Theta_hat, Theta, perm=None):
    """Mean per-community Spearman correlation between estimated and true memberships."""
    scores, undefined = spearman_scores(Theta_hat, Theta, perm)
    if undefined.any():
        warnings.warn(
            f"Spearman correlation undefined for constant column(s) {np.flatnonzero(undefined).tolist()}; scored as 0",
            RuntimeWarning,
            stacklevel=2,
        )
    return float(scores.mean())
