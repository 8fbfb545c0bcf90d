"""Comparison learners under a per-signal sparsity k, and the fixed DCT dictionary.

Both learners share GDL's initialization and alternation loop, so runs with
the same seed start from the same dictionary.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from gdlearn._coding import OmpConfig, column_stage_code
from gdlearn._gdl import AtomReseeder, GroundTruth, alternate, init_dictionary
from gdlearn._random import Stream, seeded_rng
from gdlearn._tensor import ZERO_NORM, normalize_columns, residual
from gdlearn.errors import (
    DimensionMismatchError,
    InvalidParameterError,
    SingularGramError,
)
from gdlearn.model import DenseMatrix, RunHistory, SparseCoeffMatrix, SparseVector

_logger = logging.getLogger(__name__)

_POWER_TOL = 1e-12
_POWER_MAX_ITERS = 200


@dataclass(frozen=True)
class BaselineConfig:
    m: int
    k_per_column: int
    max_iters: int = 100
    seed: int = 0
    ridge: float = 1e-8
    """Tikhonov term of the MOD update."""
    omp_cfg: OmpConfig = field(default_factory=OmpConfig)

    def __post_init__(self) -> None:
        if self.m < 1:
            raise InvalidParameterError("m must be >= 1")
        if not 1 <= self.k_per_column <= self.m:
            raise InvalidParameterError(f"k_per_column must lie in [1, {self.m}]")
        if self.max_iters < 1:
            raise InvalidParameterError("max_iters must be >= 1")
        if self.ridge < 0:
            raise InvalidParameterError("ridge must be >= 0")


def _init(
    X: DenseMatrix, cfg: BaselineConfig
) -> tuple[DenseMatrix, SparseCoeffMatrix]:
    D = init_dictionary(X, cfg.m, seeded_rng(cfg.seed, Stream.INIT))
    n = X.shape[1]
    return D, SparseCoeffMatrix.empty(cfg.m, n, cfg.k_per_column * n)


def _code_fixed_k(
    X: DenseMatrix, D: DenseMatrix, A: SparseCoeffMatrix, cfg: BaselineConfig
) -> SparseCoeffMatrix:
    budgets = np.full(X.shape[1], cfg.k_per_column, dtype=np.intp)
    return column_stage_code(D, X, budgets, cfg.omp_cfg, budget=A.budget, previous=A)


def leading_singular_pair(
    E: DenseMatrix, u0: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """(u, v) with unit u and v = Eᵀu, by power iteration on EEᵀ from `u0`."""
    u = u0 / np.linalg.norm(u0)
    prev = -1.0
    for _ in range(_POWER_MAX_ITERS):
        v = E.T @ u
        Ev = E @ v
        s = float(np.linalg.norm(Ev))
        if s <= ZERO_NORM:
            break
        u = Ev / s
        if abs(s - prev) <= _POWER_TOL * s:
            break
        prev = s
    return u, E.T @ u


def ksvd_atom_update(
    X: DenseMatrix, D: DenseMatrix, A: SparseCoeffMatrix
) -> tuple[DenseMatrix, SparseCoeffMatrix]:
    """Refit every atom on the signals that use it; supports never grow."""
    R = residual(X, D, A)
    D = D.copy()
    rows = A.rows()
    reseeder = AtomReseeder()

    for i, row in enumerate(rows):
        if row.nnz == 0:
            reseeder.reseed(D, i, R)
            continue
        omega = row.indices
        E = R[:, omega] + np.outer(D[:, i], row.values)
        u, v = leading_singular_pair(E, D[:, i])
        # Keep the old pair unless the new one fits E better.
        old = float(np.sum((E - np.outer(D[:, i], row.values)) ** 2))
        new = float(np.sum((E - np.outer(u, v)) ** 2))
        if new <= old:
            D[:, i] = u
            rows[i] = SparseVector.from_support(row.dim, omega, v)
        R[:, omega] = E - np.outer(D[:, i], rows[i].to_dense()[omega])

    if reseeder.count:
        _logger.warning("Reseeded %d unused atoms", reseeder.count)
    return D, SparseCoeffMatrix.from_rows(A.shape[1], rows, A.budget)


def ksvd_pk_learn(
    X: DenseMatrix, cfg: BaselineConfig, ground_truth: GroundTruth | None = None
) -> tuple[DenseMatrix, SparseCoeffMatrix, RunHistory]:
    """K-SVD with at most `k_per_column` atoms per signal."""
    D, A = _init(X, cfg)
    return alternate(
        X,
        D,
        A,
        code=lambda D, A: _code_fixed_k(X, D, A, cfg),
        update=lambda D, A: ksvd_atom_update(X, D, A),
        max_iters=cfg.max_iters,
        ground_truth=ground_truth,
        label=f"K-SVD(k={cfg.k_per_column})",
    )


def ksvd_pk_sweep(
    X: DenseMatrix,
    cfg: BaselineConfig,
    k_candidates: Sequence[int],
    ground_truth: GroundTruth | None = None,
) -> tuple[int, DenseMatrix, SparseCoeffMatrix, RunHistory]:
    """Run K-SVD once per candidate k and keep the best run.

    Best is the lowest final RE with ground truth, else the lowest final objective.
    """
    if not k_candidates:
        raise InvalidParameterError("No candidate k given")

    best: tuple[int, DenseMatrix, SparseCoeffMatrix, RunHistory] | None = None
    best_score = np.inf
    for k in k_candidates:
        run_cfg = BaselineConfig(
            m=cfg.m,
            k_per_column=k,
            max_iters=cfg.max_iters,
            seed=cfg.seed,
            ridge=cfg.ridge,
            omp_cfg=cfg.omp_cfg,
        )
        D, A, history = ksvd_pk_learn(X, run_cfg, ground_truth)
        last = history.last
        score = last.re if last.re is not None else last.objective
        _logger.info("K-SVD sweep: k=%d scored %.6g", k, score)
        if score < best_score:
            best, best_score = (k, D, A, history), score

    assert best is not None
    _logger.info("K-SVD sweep picked k=%d", best[0])
    return best


def mod_dictionary_update(
    X: DenseMatrix, A: SparseCoeffMatrix, ridge: float = 1e-8
) -> DenseMatrix:
    """D = X Aᵀ (A Aᵀ + ridge·I)⁻¹, columns not normalized."""
    m, n = A.shape
    if X.shape[1] != n:
        raise DimensionMismatchError(f"X has {X.shape[1]} columns, A has {n}")
    XAt = np.asarray((A.csc @ X.T).T)
    G = np.asarray((A.csc @ A.csc.T).toarray()) + ridge * np.eye(m)
    if ridge == 0 and np.linalg.matrix_rank(G) < m:
        raise SingularGramError("A·Aᵀ is singular; use a positive ridge")
    try:
        return scipy.linalg.solve(G, XAt.T, assume_a="pos").T
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        raise SingularGramError("A·Aᵀ + ridge·I is not invertible") from e


def _mod_update(
    X: DenseMatrix, D: DenseMatrix, A: SparseCoeffMatrix, ridge: float
) -> tuple[DenseMatrix, SparseCoeffMatrix]:
    D_new = mod_dictionary_update(X, A, ridge)
    norms = np.linalg.norm(D_new, axis=0)
    dead = np.flatnonzero(norms < ZERO_NORM)
    if dead.size:
        R = residual(X, D, A)
        reseeder = AtomReseeder()
        for i in dead:
            D_new[:, i] = D[:, i]
            reseeder.reseed(D_new, int(i), R)
        _logger.warning("Reseeded %d unused atoms", dead.size)
        norms = np.linalg.norm(D_new, axis=0)

    # Move the atom norms into the coefficient rows so that DA is unchanged.
    csc = A.csc.copy()
    csc.data = csc.data * norms[csc.indices]
    return normalize_columns(D_new), SparseCoeffMatrix(csc, A.budget)


def mod_learn(
    X: DenseMatrix, cfg: BaselineConfig, ground_truth: GroundTruth | None = None
) -> tuple[DenseMatrix, SparseCoeffMatrix, RunHistory]:
    """Method of optimal directions with at most `k_per_column` atoms per signal."""
    D, A = _init(X, cfg)
    return alternate(
        X,
        D,
        A,
        code=lambda D, A: _code_fixed_k(X, D, A, cfg),
        update=lambda D, A: _mod_update(X, D, A, cfg.ridge),
        max_iters=cfg.max_iters,
        ground_truth=ground_truth,
        label="MOD",
    )


def overcomplete_dct_dictionary(
    patch_side: int = 8, atoms_per_dim: int = 16
) -> DenseMatrix:
    """Separable cosine dictionary of `atoms_per_dim`² atoms on square patches.

    The 1-D prototype has entries cos(π·r·c/q); every non-constant column is
    made zero-mean. Column 0 of the result is the constant atom.
    """
    p, q = patch_side, atoms_per_dim
    if p < 1 or q < p or (p == 1 and q > 1):
        raise InvalidParameterError(
            f"Need 1 <= patch_side <= atoms_per_dim, and atoms_per_dim = 1 when "
            f"patch_side = 1, got {p} and {q}"
        )
    r = np.arange(p)[:, None]
    c = np.arange(q)[None, :]
    V = np.cos(np.pi * r * c / q)
    V[:, 1:] -= V[:, 1:].mean(axis=0)
    return normalize_columns(np.kron(V, V))
