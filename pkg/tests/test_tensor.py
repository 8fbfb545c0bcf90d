import numpy as np
import pytest

from gdlearn._tensor import (
    coeff_nnz_per_column,
    coeff_nnz_per_row,
    dense_product,
    frobenius_norm_sq,
    normalize_columns,
    residual,
)
from gdlearn.errors import DimensionMismatchError, ZeroColumnError
from gdlearn.model import SparseCoeffMatrix
from tests.fixtures.instances import random_coefficients, rng, unit_dictionary


def test_normalize_columns_gives_unit_norms():
    D = normalize_columns(rng(1).standard_normal((7, 5)))

    assert np.allclose(np.linalg.norm(D, axis=0), 1.0, atol=1e-12)


def test_normalize_columns_names_the_first_zero_column():
    M = np.ones((3, 4))
    M[:, 2] = 0.0
    M[:, 3] = 0.0

    with pytest.raises(ZeroColumnError) as e:
        normalize_columns(M)

    assert e.value.column == 2


def test_dense_product_matches_dense_matmul():
    gen = rng(2)
    D = gen.standard_normal((6, 9))
    A = random_coefficients(gen, 9, 12, 20)

    assert np.allclose(dense_product(D, A), D @ A.to_dense(), atol=1e-12)


def test_residual_checks_dimensions():
    D = unit_dictionary(rng(), 4, 3)
    A = SparseCoeffMatrix.empty(3, 5, 0)

    with pytest.raises(DimensionMismatchError):
        residual(np.zeros((4, 6)), D, A)
    assert np.array_equal(residual(np.ones((4, 5)), D, A), np.ones((4, 5)))


def test_frobenius_norm_sq():
    assert frobenius_norm_sq(np.array([[1.0, 2.0], [2.0, 4.0]])) == 25.0


def test_row_and_column_counts_sum_to_nnz():
    A = random_coefficients(rng(3), 8, 30, 57)

    assert sum(coeff_nnz_per_column(A)) == sum(coeff_nnz_per_row(A)) == A.nnz == 57


def test_residual_energy_matches_its_expansion():
    gen = rng(6)
    X = gen.standard_normal((7, 25))
    D = unit_dictionary(gen, 7, 12)
    A = random_coefficients(gen, 12, 25, 60)
    X_hat = dense_product(D, A)

    cross = float(np.sum(X * X_hat))
    expanded = frobenius_norm_sq(X) - 2.0 * cross + frobenius_norm_sq(X_hat)

    assert frobenius_norm_sq(residual(X, D, A)) == pytest.approx(expanded, rel=1e-10)
