"""Dictionary learning under one global sparsity budget.

    min ‖X − DA‖_F²   s.t.  ‖A‖₀ <= K, unit-norm atoms

Each iteration runs two stages on the current (D, A):

1. column stage: every signal is re-coded by OMP with as many atoms as its
   column currently holds;
2. row stage: every atom and its coefficient row are refitted as a sparse
   rank-1 approximation of the residual the atom is responsible for, with as
   many nonzeros as the row currently holds.

Nonzeros move between rows in stage 1 and between columns in stage 2, which is
how the budget migrates to the signals that need it. Both stages never
increase the objective.
"""

import logging
import time
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from gdlearn._coding import OmpConfig, column_stage_code
from gdlearn._data import nonzero_normals
from gdlearn._metrics import MetricsReport
from gdlearn._random import Stream, seeded_rng
from gdlearn._rank1 import SparsePcaConfig, sparse_rank1_update
from gdlearn._tensor import (
    ZERO_NORM,
    dense_product,
    frobenius_norm_sq,
    normalize_columns,
    residual,
)
from gdlearn.errors import (
    BudgetTooLargeError,
    DegenerateDirectionError,
    InvalidParameterError,
    ZeroColumnError,
    ZeroMatrixError,
)
from gdlearn.model import (
    DenseMatrix,
    IterationRecord,
    RunHistory,
    SparseCoeffMatrix,
    SparseVector,
)

_logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GdlConfig:
    m: int
    "Number of atoms."
    K: int
    "Global budget on the number of nonzero coefficients."
    max_iters: int = 100
    objective_tol: float = 1e-6
    """Stop once an iteration decreases the objective by less than this fraction."""
    seed: int = 0
    omp_cfg: OmpConfig = field(default_factory=OmpConfig)
    spca_cfg: SparsePcaConfig = field(default_factory=SparsePcaConfig)

    def __post_init__(self) -> None:
        if self.m < 1:
            raise InvalidParameterError("m must be >= 1")
        if self.K < 0:
            raise InvalidParameterError("K must be >= 0")
        if self.max_iters < 1:
            raise InvalidParameterError("max_iters must be >= 1")
        if self.objective_tol < 0:
            raise InvalidParameterError("objective_tol must be >= 0")


@dataclass(eq=False)
class GroundTruth:
    """Known generating dictionary and clean signals of a synthetic run."""

    D_true: DenseMatrix
    X_clean: DenseMatrix


def objective(X: DenseMatrix, D: DenseMatrix, A: SparseCoeffMatrix) -> float:
    """‖X − DA‖_F²"""
    return frobenius_norm_sq(residual(X, D, A))


def init_dictionary(X: DenseMatrix, m: int, rng: np.random.Generator) -> DenseMatrix:
    """m distinct, nonzero training signals drawn without replacement, normalized.

    With fewer than m signals the remaining atoms are random Gaussian directions.
    """
    d, n = X.shape
    norms = np.linalg.norm(X, axis=0)
    order = rng.permutation(n)
    picked = [int(j) for j in order if norms[j] >= ZERO_NORM][:m]
    if n < m:
        _logger.warning(
            "Only %d signals for %d atoms, filling up with random atoms", n, m
        )
    elif len(picked) < m:
        raise ZeroColumnError(int(np.flatnonzero(norms < ZERO_NORM)[0]))

    D = np.empty((d, m))
    D[:, : len(picked)] = X[:, picked]
    if len(picked) < m:
        D[:, len(picked) :] = rng.standard_normal((d, m - len(picked)))
    return normalize_columns(D)


def init_coefficients(
    m: int, n: int, K: int, rng: np.random.Generator
) -> SparseCoeffMatrix:
    """K standard normal coefficients at uniformly random distinct positions."""
    if K > m * n:
        raise BudgetTooLargeError(f"K={K} exceeds the {m}×{n} coefficient matrix")
    flat = rng.choice(m * n, size=K, replace=False)
    rows, cols = np.divmod(flat, n)
    return SparseCoeffMatrix.from_triplets(
        (m, n), rows, cols, nonzero_normals(rng, K), K
    )


def gdl_init(X: DenseMatrix, cfg: GdlConfig) -> tuple[DenseMatrix, SparseCoeffMatrix]:
    rng = seeded_rng(cfg.seed, Stream.INIT)
    D = init_dictionary(X, cfg.m, rng)
    A = init_coefficients(cfg.m, X.shape[1], cfg.K, rng)
    return D, A


def column_stage(
    X: DenseMatrix,
    D: DenseMatrix,
    A: SparseCoeffMatrix,
    omp_cfg: OmpConfig | None = None,
) -> SparseCoeffMatrix:
    """Re-code every signal with its current number of atoms."""
    return column_stage_code(
        D, X, A.nnz_per_column(), omp_cfg, budget=A.budget, previous=A
    )


class AtomReseeder:
    """Replaces dead atoms with the worst represented signals, each signal used
    at most once per stage."""

    def __init__(self) -> None:
        self._taken = set[int]()
        self.count = 0

    def reseed(self, D: DenseMatrix, i: int, R: DenseMatrix) -> None:
        norms = np.linalg.norm(R, axis=0)
        norms[list(self._taken)] = -1.0
        j = int(np.argmax(norms))
        if norms[j] < ZERO_NORM:
            return
        D[:, i] = R[:, j] / norms[j]
        self._taken.add(j)
        self.count += 1


def row_stage(
    X: DenseMatrix,
    D: DenseMatrix,
    A: SparseCoeffMatrix,
    spca_cfg: SparsePcaConfig | None = None,
    on_atom: Callable[[int, float], None] | None = None,
) -> tuple[DenseMatrix, SparseCoeffMatrix]:
    """Refit atoms one by one, each with its current row sparsity.

    Args:
        on_atom: called after every atom with (atom index, objective); the
            objective costs an extra pass over the residual.
    """
    R = residual(X, D, A)
    D = D.copy()
    rows = A.rows()
    reseeder = AtomReseeder()

    for i, row in enumerate(rows):
        if row.nnz == 0:
            reseeder.reseed(D, i, R)
        else:
            # R turns into E_i: the residual without atom i's contribution.
            R[:, row.indices] += np.outer(D[:, i], row.values)
            try:
                d, alpha = sparse_rank1_update(R, row.nnz, row, spca_cfg)
            except (DegenerateDirectionError, ZeroMatrixError):
                rows[i] = SparseVector.empty(row.dim)
                reseeder.reseed(D, i, R)
            else:
                R[:, alpha.indices] -= np.outer(d, alpha.values)
                D[:, i] = d
                rows[i] = alpha

        if on_atom is not None:
            on_atom(i, frobenius_norm_sq(R))

    if reseeder.count:
        _logger.warning("Reseeded %d unused atoms", reseeder.count)
    return D, SparseCoeffMatrix.from_rows(A.shape[1], rows, A.budget)


CodingStage = Callable[[DenseMatrix, SparseCoeffMatrix], SparseCoeffMatrix]
UpdateStage = Callable[
    [DenseMatrix, SparseCoeffMatrix], tuple[DenseMatrix, SparseCoeffMatrix]
]


def alternate(
    X: DenseMatrix,
    D: DenseMatrix,
    A: SparseCoeffMatrix,
    code: CodingStage,
    update: UpdateStage,
    max_iters: int,
    objective_tol: float = 0.0,
    ground_truth: GroundTruth | None = None,
    label: str = "",
) -> tuple[DenseMatrix, SparseCoeffMatrix, RunHistory]:
    """Run coding/update iterations and record the history.

    Stops after `max_iters`, or earlier once the relative decrease of the
    objective drops below a positive `objective_tol`.
    """
    history = RunHistory()
    prev = objective(X, D, A)
    for it in range(1, max_iters + 1):
        start = time.perf_counter()
        A = code(D, A)
        after_coding = objective(X, D, A)
        D, A = update(D, A)
        obj = objective(X, D, A)
        record = IterationRecord(
            iteration=it,
            objective=obj,
            nnz=A.nnz,
            wall_seconds=time.perf_counter() - start,
            objective_after_coding=after_coding,
        )
        if ground_truth is not None:
            report = MetricsReport.recovery(
                ground_truth.D_true, D, ground_truth.X_clean, dense_product(D, A)
            )
            record.re, record.dr = report.recovery_row()
        history.append(record)
        _log_iteration(label, record)

        if prev <= 0 or (objective_tol > 0 and (prev - obj) / prev < objective_tol):
            break
        prev = obj

    return D, A, history


def _log_iteration(label: str, r: IterationRecord) -> None:
    if r.re is None:
        _logger.info(
            "%s iter %d: objective=%.6g nnz=%d", label, r.iteration, r.objective, r.nnz
        )
    else:
        _logger.info(
            "%s iter %d: objective=%.6g nnz=%d RE=%.4g DR=%.3f",
            label,
            r.iteration,
            r.objective,
            r.nnz,
            r.re,
            r.dr,
        )


def gdl_learn(
    X: DenseMatrix, cfg: GdlConfig, ground_truth: GroundTruth | None = None
) -> tuple[DenseMatrix, SparseCoeffMatrix, RunHistory]:
    """Learn (D, A) with at most K nonzeros in A."""
    D, A = gdl_init(X, cfg)
    return alternate(
        X,
        D,
        A,
        code=lambda D, A: column_stage(X, D, A, cfg.omp_cfg),
        update=lambda D, A: row_stage(X, D, A, cfg.spca_cfg),
        max_iters=cfg.max_iters,
        objective_tol=cfg.objective_tol,
        ground_truth=ground_truth,
        label="GDL",
    )
