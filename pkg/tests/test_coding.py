# pyright: reportPrivateUsage=false

import numpy as np
import pytest

from gdlearn._coding import (
    OmpConfig,
    _least_squares,
    _refit_previous,
    column_stage_code,
    exact_sparse_oracle,
    omp,
    omp_path,
    sparse_objective,
)
from gdlearn._tensor import normalize_columns
from gdlearn.errors import (
    BudgetExceededError,
    InvalidParameterError,
    NonUnitDictionaryError,
    TooLargeError,
)
from gdlearn.model import SparseCoeffMatrix, SparseVector
from tests.fixtures.instances import (
    random_coefficients,
    random_sparse_vector,
    rng,
    unit_dictionary,
)


class TestOmp:
    def test_recovers_sparse_signal_over_orthonormal_dictionary(self):
        Q, _ = np.linalg.qr(rng(1).standard_normal((8, 8)))
        x = 2.0 * Q[:, 1] - 0.5 * Q[:, 6]

        alpha = omp(Q, x, 2)

        assert alpha.indices.tolist() == [1, 6]
        assert np.allclose(alpha.values, [2.0, -0.5], atol=1e-12)

    def test_recovers_three_atoms_of_a_random_dictionary(self):
        D = unit_dictionary(rng(14), 20, 50)
        x = 2.0 * D[:, 3] - D[:, 17] + 0.5 * D[:, 42]

        alpha = omp(D, x, 3)

        assert alpha.indices.tolist() == [3, 17, 42]
        assert np.allclose(alpha.values, [2.0, -1.0, 0.5], atol=1e-10)

    def test_k_zero_gives_empty_code(self):
        D = unit_dictionary(rng(), 5, 7)

        assert omp(D, np.ones(5), 0).nnz == 0

    def test_stops_early_on_exact_fit(self):
        D = unit_dictionary(rng(2), 6, 10)
        x = 3.0 * D[:, 4]

        alpha = omp(D, x, 5)

        assert alpha.indices.tolist() == [4]
        assert sparse_objective(D, x, alpha) < 1e-20

    def test_zero_signal_gives_empty_code(self):
        D = unit_dictionary(rng(), 5, 7)

        assert omp(D, np.zeros(5), 3).nnz == 0

    def test_rejects_non_unit_atoms(self):
        with pytest.raises(NonUnitDictionaryError):
            omp(2.0 * np.eye(3), np.ones(3), 1)

    def test_rejects_sparsity_above_atom_count(self):
        with pytest.raises(InvalidParameterError):
            omp(np.eye(3), np.ones(3), 4)

    def test_residual_tolerance_stops_the_path(self):
        Q, _ = np.linalg.qr(rng(3).standard_normal((6, 6)))
        x = Q @ np.array([10.0, 5.0, 1.0, 0.1, 0.0, 0.0])

        alpha = omp(Q, x, 6, OmpConfig(residual_tol=1.05))

        assert alpha.indices.size == 2

    def test_max_atoms_caps_the_sparsity(self):
        D = unit_dictionary(rng(4), 6, 10)

        assert omp(D, rng(5).standard_normal(6), 4, OmpConfig(max_atoms=2)).nnz == 2

    @pytest.mark.parametrize("cfg", [{"swap_passes": -1}, {"branches": 0}])
    def test_config_rejects_bad_search_settings(self, cfg: dict[str, int]):
        with pytest.raises(InvalidParameterError):
            OmpConfig(**cfg)

    @pytest.mark.filterwarnings("error")
    def test_nearly_duplicate_atoms_fall_back_to_the_ridge(self):
        a = rng(15).standard_normal(6)
        b = a + 1e-8 * np.eye(6)[0]
        D_s = normalize_columns(np.stack([a, b], axis=1))
        x = 2.0 * D_s[:, 0]

        coef = _least_squares(D_s, x)

        assert np.all(np.isfinite(coef))
        assert np.linalg.norm(D_s @ coef - x) < 1e-6


class TestOmpPath:
    def test_residual_norms_never_increase(self):
        gen = rng(6)
        D = unit_dictionary(gen, 10, 25)
        x = gen.standard_normal(10)

        path = omp_path(D, x, 8)

        norms = [step.residual_norm for step in path]
        assert path[0].support.size == 0
        assert norms[0] == pytest.approx(np.linalg.norm(x))
        assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))

    def test_prefixes_extend_each_other(self):
        gen = rng(7)
        D = unit_dictionary(gen, 10, 25)

        path = omp_path(D, gen.standard_normal(10), 5)

        for prev, step in zip(path, path[1:]):
            assert step.support[:-1].tolist() == prev.support.tolist()

    def test_residual_is_orthogonal_to_the_support(self):
        gen = rng(8)
        D = unit_dictionary(gen, 10, 25)
        x = gen.standard_normal(10)

        step = omp_path(D, x, 4)[-1]

        r = x - D[:, step.support] @ step.coefficients
        assert np.allclose(D[:, step.support].T @ r, 0.0, atol=1e-10)


class TestExactSparseOracle:
    def test_never_worse_than_omp(self):
        gen = rng(9)
        for _ in range(100):
            D = unit_dictionary(gen, 6, 8)
            x = gen.standard_normal(6)

            best = sparse_objective(D, x, exact_sparse_oracle(D, x, 2))
            greedy = sparse_objective(D, x, omp(D, x, 2))

            assert best <= greedy + 1e-10

    def test_branching_omp_is_close_to_the_oracle_on_almost_all_instances(self):
        gen = rng(10)
        cfg = OmpConfig(branches=8)
        close = 0
        for _ in range(100):
            D = unit_dictionary(gen, 6, 8)
            x = gen.standard_normal(6)

            best = sparse_objective(D, x, exact_sparse_oracle(D, x, 2))
            found = sparse_objective(D, x, omp(D, x, 2, cfg))
            close += found <= 1.1 * best + 1e-12

        assert close >= 95

    def test_branching_omp_matches_the_oracle_on_exactly_sparse_signals(self):
        gen = rng(16)
        cfg = OmpConfig(branches=8)
        for _ in range(100):
            D = unit_dictionary(gen, 6, 8)
            x = D @ random_sparse_vector(gen, 8, 2).to_dense()

            best = sparse_objective(D, x, exact_sparse_oracle(D, x, 2))
            found = sparse_objective(D, x, omp(D, x, 2, cfg))

            assert found == pytest.approx(best, abs=1e-8)
            assert found < 1e-8

    def test_exchanges_never_do_worse_than_plain_greedy(self):
        gen = rng(17)
        plain = OmpConfig(swap_passes=0)
        for _ in range(100):
            D = unit_dictionary(gen, 6, 8)
            x = gen.standard_normal(6)

            refined = sparse_objective(D, x, omp(D, x, 2))

            assert refined <= sparse_objective(D, x, omp(D, x, 2, plain)) + 1e-12

    def test_single_atom_omp_is_optimal(self):
        gen = rng(11)
        for _ in range(50):
            D = unit_dictionary(gen, 6, 8)
            x = gen.standard_normal(6)

            assert sparse_objective(D, x, omp(D, x, 1)) == pytest.approx(
                sparse_objective(D, x, exact_sparse_oracle(D, x, 1)), rel=1e-10
            )

    def test_refuses_too_many_supports(self):
        D = unit_dictionary(rng(), 4, 30)

        with pytest.raises(TooLargeError):
            exact_sparse_oracle(D, np.ones(4), 3, cap=1000)


class TestColumnStageCode:
    def test_respects_per_column_budgets(self):
        gen = rng(12)
        D = unit_dictionary(gen, 8, 12)
        X = gen.standard_normal((8, 5))

        A = column_stage_code(D, X, [0, 1, 2, 3, 0], budget=10)

        assert A.nnz_per_column().tolist() == [0, 1, 2, 3, 0]
        assert A.budget == 10

    def test_rejects_budgets_summing_above_k(self):
        D = unit_dictionary(rng(), 4, 6)

        with pytest.raises(BudgetExceededError):
            column_stage_code(D, np.ones((4, 2)), [2, 2], budget=3)

    def test_never_worse_than_refitting_the_previous_support(self):
        gen = rng(13)
        D = unit_dictionary(gen, 6, 15)
        X = gen.standard_normal((6, 40))
        previous = random_coefficients(gen, 15, 40, 80)

        A = column_stage_code(
            D, X, previous.nnz_per_column(), budget=80, previous=previous
        )

        for j in range(40):
            x = X[:, j]
            refit = _refit_previous(D, x, previous, j, previous.column(j).nnz)
            if refit is None:
                continue
            assert sparse_objective(D, x, A.column(j)) <= refit.residual_norm**2 + 1e-10

    def test_keeps_the_previous_support_when_omp_does_worse(self):
        # OMP picks atom 0 first (largest correlation), but atoms 1 and 2
        # together represent x exactly.
        a1 = np.array([1.0, 0.0, 0.0])
        a2 = np.array([0.0, 1.0, 0.0])
        a0 = np.array([1.0, 1.0, 0.2]) / np.linalg.norm([1.0, 1.0, 0.2])
        D = np.stack([a0, a1, a2], axis=1)
        x = np.array([1.0, 1.0, 0.0])
        previous = SparseCoeffMatrix.from_columns(
            3, [SparseVector.from_support(3, [1, 2], [0.5, 0.5])], 2
        )

        A = column_stage_code(
            D, x[:, None], [2], OmpConfig(swap_passes=0), previous=previous
        )

        assert A.column(0).indices.tolist() == [1, 2]
        assert sparse_objective(D, x, A.column(0)) < 1e-20
