"""
Small dense Hermitian helpers shared by the channel and estimator services.
"""

from typing import Optional

import numpy as np
from scipy import linalg

from ..errors import CorrelationError, DimensionError

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
MAX_DIMENSION = 64


def validate_correlation(R, size: Optional[int] = None) -> np.ndarray:
    """
    Check that R is a Hermitian PSD matrix (up to round-off) and return it as a
    complex array with an exactly real diagonal.
    """
    matrix = np.array(R, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise CorrelationError(f"Correlation matrix must be square, got shape {matrix.shape}")
    if matrix.shape[0] < 1 or matrix.shape[0] > MAX_DIMENSION:
        raise DimensionError(f"Matrix dimension must be in [1, {MAX_DIMENSION}], got {matrix.shape[0]}")
    if size is not None and matrix.shape[0] != size:
        raise DimensionError(f"Expected a {size}x{size} matrix, got {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise CorrelationError("Correlation matrix has non-finite entries")
    if np.max(np.abs(matrix - matrix.conj().T)) > HERMITIAN_TOL:
        raise CorrelationError("Correlation matrix is not Hermitian")
    if np.max(np.abs(np.diag(matrix).imag)) > HERMITIAN_TOL:
        raise CorrelationError("Correlation matrix has a complex diagonal")

    matrix = 0.5 * (matrix + matrix.conj().T)
    eigenvalues = np.linalg.eigvalsh(matrix)
    if eigenvalues[0] < -PSD_TOL:
        raise CorrelationError(
            f"Correlation matrix is not PSD (smallest eigenvalue {eigenvalues[0]:.3e})"
        )
    return matrix


def psd_factor(R: np.ndarray) -> np.ndarray:
    """Return L with L @ L^H == R using the eigen-decomposition of a PSD matrix."""
    eigenvalues, eigenvectors = np.linalg.eigh(R)
    scale = max(1.0, float(np.max(np.abs(eigenvalues))))
    if eigenvalues[0] < -PSD_TOL * scale:
        raise CorrelationError(
            f"Cannot factor a non-PSD matrix (smallest eigenvalue {eigenvalues[0]:.3e})"
        )
    # round-off eigenvalues of rank-deficient matrices are treated as exact zeros
    eigenvalues = np.where(eigenvalues > PSD_TOL * scale, eigenvalues, 0.0)
    return eigenvectors * np.sqrt(eigenvalues)


def shifted_factor(R: np.ndarray, gamma: float):
    """Cholesky factor of I + R/gamma, which is Hermitian positive definite."""
    size = R.shape[0]
    try:
        return linalg.cho_factor(np.eye(size) + R / gamma, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError) as e:
        raise CorrelationError(f"Cholesky factorization of I + R/gamma failed: {e}") from e


def factor_solve(factor, b: np.ndarray) -> np.ndarray:
    """
    Solve (I + R/gamma) x = b for vectors b of shape (K,) or (..., K).

    Batched right-hand sides keep the subcarrier index on the last axis.
    """
    size = factor[0].shape[0]
    b = np.asarray(b)
    if b.shape[-1] != size:
        raise DimensionError(f"Right-hand side has length {b.shape[-1]}, expected {size}")
    if b.ndim <= 1:
        return linalg.cho_solve(factor, b)
    flat = b.reshape(-1, size)
    return linalg.cho_solve(factor, flat.T).T.reshape(b.shape)


def factor_solve_matrix(factor, B: np.ndarray) -> np.ndarray:
    """Solve (I + R/gamma) X = B for a K x K right-hand side."""
    return linalg.cho_solve(factor, np.asarray(B))
