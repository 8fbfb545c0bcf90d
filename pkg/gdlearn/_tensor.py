"""Numeric primitives shared by the learners."""

import numpy as np
from numpy.typing import NDArray

from gdlearn.errors import DimensionMismatchError, ZeroColumnError
from gdlearn.model import DenseMatrix, SparseCoeffMatrix

ZERO_NORM = 1e-12


def frobenius_norm_sq(M: DenseMatrix) -> float:
    return float(np.vdot(M, M))


def normalize_columns(M: DenseMatrix) -> DenseMatrix:
    """Scale every column to unit l2 norm.

    Raises:
        ZeroColumnError: for the first column with norm below 1e-12.
    """
    norms = column_norms(M)
    if (bad := np.flatnonzero(norms < ZERO_NORM)).size:
        raise ZeroColumnError(int(bad[0]))
    return M / norms


def coeff_nnz_per_column(A: SparseCoeffMatrix) -> list[int]:
    return A.nnz_per_column().tolist()


def coeff_nnz_per_row(A: SparseCoeffMatrix) -> list[int]:
    return A.nnz_per_row().tolist()


def dense_product(D: DenseMatrix, A: SparseCoeffMatrix) -> DenseMatrix:
    """D·A without densifying A."""
    if D.shape[1] != A.shape[0]:
        raise DimensionMismatchError(
            f"Dictionary has {D.shape[1]} atoms, coefficients have {A.shape[0]} rows"
        )
    return np.asarray(A.csc.T @ D.T, dtype=np.float64).T


def residual(X: DenseMatrix, D: DenseMatrix, A: SparseCoeffMatrix) -> DenseMatrix:
    """X − D·A as a fresh array."""
    if X.shape[0] != D.shape[0] or X.shape[1] != A.shape[1]:
        raise DimensionMismatchError(
            f"X is {X.shape}, D is {D.shape}, A is {A.shape}"
        )
    return X - dense_product(D, A)


def column_norms(M: DenseMatrix) -> NDArray[np.float64]:
    return np.linalg.norm(M, axis=0)
