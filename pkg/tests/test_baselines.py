import numpy as np
import pytest

from gdlearn._baselines import (
    BaselineConfig,
    ksvd_atom_update,
    ksvd_pk_learn,
    ksvd_pk_sweep,
    leading_singular_pair,
    mod_dictionary_update,
    mod_learn,
    overcomplete_dct_dictionary,
)
from gdlearn._coding import column_stage_code
from gdlearn._data import SyntheticSpec, gen_synthetic
from gdlearn._gdl import GroundTruth, objective
from gdlearn._tensor import frobenius_norm_sq
from gdlearn.errors import InvalidParameterError, SingularGramError
from gdlearn.model import PerColumnSparsity, SparseCoeffMatrix
from tests.fixtures.instances import random_coefficients, rng, unit_dictionary


class TestBaselineConfig:
    def test_rejects_zero_atoms_per_signal(self):
        with pytest.raises(InvalidParameterError):
            BaselineConfig(m=10, k_per_column=0)

    def test_rejects_more_atoms_per_signal_than_atoms(self):
        with pytest.raises(InvalidParameterError):
            BaselineConfig(m=3, k_per_column=4)

    def test_rejects_negative_ridge(self):
        with pytest.raises(InvalidParameterError):
            BaselineConfig(m=3, k_per_column=1, ridge=-1.0)


class TestKsvd:
    def test_leading_singular_pair_matches_the_svd(self):
        gen = rng(1)
        U, _ = np.linalg.qr(gen.standard_normal((6, 3)))
        V, _ = np.linalg.qr(gen.standard_normal((9, 3)))
        E = U @ np.diag([4.0, 2.0, 1.0]) @ V.T

        u, v = leading_singular_pair(E, gen.standard_normal(6))

        assert np.linalg.norm(u) == pytest.approx(1.0)
        assert np.linalg.norm(v) == pytest.approx(4.0, rel=1e-9)
        assert abs(u @ U[:, 0]) == pytest.approx(1.0, rel=1e-9)

    def test_atom_update_keeps_supports_and_never_increases_the_objective(self):
        gen = rng(2)
        X = gen.standard_normal((8, 60))
        D = unit_dictionary(gen, 8, 12)
        A = random_coefficients(gen, 12, 60, 120)

        D_new, A_new = ksvd_atom_update(X, D, A)

        assert objective(X, D_new, A_new) <= objective(X, D, A) + 1e-9
        dense, new_dense = A.to_dense(), A_new.to_dense()
        assert np.all((new_dense != 0) <= (dense != 0))
        assert np.allclose(np.linalg.norm(D_new, axis=0), 1.0)

    def test_every_signal_uses_at_most_k_atoms(self):
        X = rng(3).standard_normal((8, 80))

        _, A, history = ksvd_pk_learn(
            X, BaselineConfig(m=16, k_per_column=3, max_iters=5, seed=1)
        )

        assert A.nnz_per_column().max() <= 3
        assert A.nnz <= 3 * 80
        assert len(history) == 5

    def test_objective_never_increases(self):
        X = rng(4).standard_normal((8, 80))

        _, _, history = ksvd_pk_learn(
            X, BaselineConfig(m=16, k_per_column=2, max_iters=8, seed=2)
        )

        stages = history.stage_objectives()
        assert all(b <= a + 1e-9 * a for a, b in zip(stages, stages[1:]))

    def test_sweep_picks_one_of_the_candidates(self):
        X = rng(5).standard_normal((6, 40))
        cfg = BaselineConfig(m=10, k_per_column=1, max_iters=3)

        k, D, A, history = ksvd_pk_sweep(X, cfg, [1, 3])

        assert k == 3
        assert A.nnz_per_column().max() <= k
        assert D.shape == (6, 10)
        assert len(history) == 3

    def test_sweep_needs_candidates(self):
        cfg = BaselineConfig(m=2, k_per_column=1)

        with pytest.raises(InvalidParameterError):
            ksvd_pk_sweep(np.ones((2, 3)), cfg, [])

    def test_exact_factorization_is_a_fixed_point(self):
        data = gen_synthetic(SyntheticSpec(), seed=5)
        X = data.X_clean

        A = column_stage_code(
            data.D_true, X, data.A_true.nnz_per_column(), previous=data.A_true
        )
        D, A = ksvd_atom_update(X, data.D_true, A)

        assert objective(X, D, A) < 1e-6 * frobenius_norm_sq(X)

    @pytest.mark.slow
    def test_noiseless_run_recovers_most_atoms(self):
        data = gen_synthetic(SyntheticSpec(), seed=1)

        _, _, history = ksvd_pk_learn(
            data.X_clean,
            BaselineConfig(m=50, k_per_column=3, max_iters=100, seed=1),
            GroundTruth(data.D_true, data.X_clean),
        )

        assert history.last.dr is not None and history.last.dr >= 0.80


class TestMod:
    def test_closed_form_with_invertible_coefficients(self):
        gen = rng(6)
        D_true = gen.standard_normal((5, 4))
        A_dense = gen.standard_normal((4, 4)) + 4.0 * np.eye(4)
        X = D_true @ A_dense

        D = mod_dictionary_update(X, SparseCoeffMatrix.from_dense(A_dense), ridge=0.0)

        assert np.allclose(D, D_true, atol=1e-10)

    def test_ridge_tolerates_unused_atoms(self):
        A = SparseCoeffMatrix.from_dense([[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]])

        D = mod_dictionary_update(np.ones((3, 2)), A, ridge=1e-8)

        assert np.all(np.isfinite(D))
        assert np.allclose(D[:, 2], 0.0)

    def test_zero_ridge_rejects_unused_atoms(self):
        A = SparseCoeffMatrix.from_dense([[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]])

        with pytest.raises(SingularGramError):
            mod_dictionary_update(np.ones((3, 2)), A, ridge=0.0)

    def test_learner_keeps_unit_atoms_and_k_per_signal(self):
        X = rng(7).standard_normal((8, 60))

        D, A, history = mod_learn(
            X, BaselineConfig(m=12, k_per_column=2, max_iters=4, seed=3)
        )

        assert np.allclose(np.linalg.norm(D, axis=0), 1.0)
        assert A.nnz_per_column().max() <= 2
        assert history.last.objective == pytest.approx(objective(X, D, A))

    def test_objective_rarely_increases_on_noiseless_signals(self):
        spec = SyntheticSpec(d=8, m=16, n=200, sparsity=PerColumnSparsity(2))
        X = gen_synthetic(spec, seed=4).X_clean

        _, _, history = mod_learn(
            X, BaselineConfig(m=16, k_per_column=2, max_iters=40, seed=4)
        )

        objectives = history.objectives()
        slack = 1e-9 * frobenius_norm_sq(X)
        steps = list(zip(objectives, objectives[1:]))
        rises = sum(b > a + slack for a, b in steps)
        assert rises <= 0.05 * len(steps)


class TestOvercompleteDct:
    def test_default_shape_and_unit_atoms(self):
        D = overcomplete_dct_dictionary()

        assert D.shape == (64, 256)
        assert np.allclose(np.linalg.norm(D, axis=0), 1.0)

    def test_first_atom_is_constant(self):
        D = overcomplete_dct_dictionary(8, 16)

        assert np.allclose(D[:, 0], 1.0 / 8.0)

    def test_custom_sizes(self):
        assert overcomplete_dct_dictionary(4, 6).shape == (16, 36)

    def test_single_pixel_patches_take_the_single_constant_atom(self):
        assert np.array_equal(overcomplete_dct_dictionary(1, 1), [[1.0]])

    @pytest.mark.parametrize(("p", "q"), [(0, 4), (8, 4), (1, 3)])
    def test_rejects_bad_sizes(self, p: int, q: int):
        with pytest.raises(InvalidParameterError, match="patch_side"):
            overcomplete_dct_dictionary(p, q)
