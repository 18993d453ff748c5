"""Input validation helpers for membership, connectivity and adjacency matrices.

All checkers return a float64 ``numpy`` array (or a CSR matrix for sparse
adjacency input) so callers can use the result directly.
"""
import numpy as np
import scipy.sparse as sp

from .exceptions import DataFormatError, DimensionError

MEMBERSHIP_ROW_TOL = 1e-12
SYMMETRY_TOL = 1e-12


def check_membership(Theta, *, row_tol=MEMBERSHIP_ROW_TOL):
    """Validate a row-stochastic n x K membership matrix."""
    Theta = np.asarray(Theta, dtype=np.float64)
    if Theta.ndim != 2 or Theta.shape[1] < 1:
        raise DimensionError(f"membership matrix must be 2-d with K >= 1, got shape {Theta.shape}")
    if not np.all(np.isfinite(Theta)):
        raise DataFormatError("membership matrix contains non-finite entries")
    if Theta.min(initial=0.0) < 0.0 or Theta.max(initial=0.0) > 1.0:
        raise DataFormatError("membership entries must lie in [0, 1]")
    dev = np.abs(Theta.sum(axis=1) - 1.0)
    if dev.size and dev.max() > row_tol:
        bad = int(np.argmax(dev))
        raise DataFormatError(f"row {bad} of membership matrix sums to {Theta[bad].sum():.15g}, not 1")
    return Theta


def check_connectivity(B, *, sym_tol=SYMMETRY_TOL):
    """Validate a symmetric K x K matrix of edge probabilities."""
    B = np.asarray(B, dtype=np.float64)
    if B.ndim != 2 or B.shape[0] != B.shape[1] or B.shape[0] < 1:
        raise DimensionError(f"connectivity matrix must be square, got shape {B.shape}")
    if not np.all(np.isfinite(B)):
        raise DataFormatError("connectivity matrix contains non-finite entries")
    if np.abs(B - B.T).max() > sym_tol:
        raise DataFormatError("connectivity matrix is not symmetric")
    if B.min() < 0.0 or B.max() > 1.0:
        raise DataFormatError("connectivity entries must lie in [0, 1]")
    return B


def check_membership_connectivity(Theta, B):
    Theta = check_membership(Theta)
    B = check_connectivity(B)
    if Theta.shape[1] != B.shape[0]:
        raise DimensionError(
            f"membership has K={Theta.shape[1]} columns but connectivity is {B.shape[0]}x{B.shape[0]}"
        )
    return Theta, B


def check_symmetric(M, tol=1e-10):
    """Return ``M`` as a float64 dense array or CSR matrix, requiring symmetry.

    ``tol`` is relative to the largest absolute entry.
    """
    if sp.issparse(M):
        M = sp.csr_matrix(M, dtype=np.float64)
        if M.shape[0] != M.shape[1]:
            raise DimensionError(f"matrix must be square, got shape {M.shape}")
        diff = abs(M - M.T)
        scale = abs(M).max() if M.nnz else 0.0
        if diff.nnz and diff.max() > tol * max(scale, 1.0):
            raise DataFormatError("matrix is not symmetric")
        return M
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"matrix must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DataFormatError("matrix contains non-finite entries")
    scale = np.abs(M).max(initial=0.0)
    if np.abs(M - M.T).max(initial=0.0) > tol * max(scale, 1.0):
        raise DataFormatError("matrix is not symmetric")
    return M


def check_adjacency(A):
    """Validate a symmetric binary adjacency matrix with empty diagonal."""
    A = check_symmetric(A, tol=0.0)
    if sp.issparse(A):
        values = A.data
        diag = A.diagonal()
    else:
        values = A.ravel()
        diag = np.diag(A)
    if not np.all((values == 0.0) | (values == 1.0)):
        raise DataFormatError("adjacency matrix must be binary")
    if np.any(diag != 0.0):
        raise DataFormatError("adjacency matrix must have a zero diagonal")
    return A
