"""Sparse coding of single signals over a fixed dictionary.

The workhorse is orthogonal matching pursuit: greedily pick the atom most
correlated with the residual, then re-fit all picked coefficients by least
squares. The greedy support is then polished by single-atom exchanges, and
optionally the whole search is restarted from several first atoms.
`exact_sparse_oracle` enumerates supports and is only meant for tiny instances
in tests.
"""

import logging
import warnings
from collections.abc import Sequence
from dataclasses import dataclass
from itertools import chain, combinations

import numpy as np
import scipy.linalg
from numpy.typing import NDArray
from scipy.linalg import LinAlgWarning
from scipy.special import comb

from gdlearn._tensor import ZERO_NORM
from gdlearn.errors import (
    BudgetExceededError,
    DimensionMismatchError,
    InvalidParameterError,
    NonUnitDictionaryError,
    TooLargeError,
)
from gdlearn.model import DenseMatrix, SparseCoeffMatrix, SparseVector, Vector

_logger = logging.getLogger(__name__)

ORACLE_CAP = 10**6
"""Max number of supports the brute-force oracles are allowed to enumerate."""

UNIT_NORM_TOL = 1e-8
_RIDGE = 1e-12
_IMPROVEMENT = 1e-12


@dataclass(frozen=True)
class OmpConfig:
    residual_tol: float = 0.0
    """Stop once the residual l2 norm falls to this absolute level."""
    relative_tol: float = 1e-12
    """... or below `relative_tol * ‖x‖₂`, whichever is larger."""
    max_atoms: int | None = None
    """Hard cap on atoms per signal on top of the per-call sparsity."""
    swap_passes: int = 3
    """Rounds of single-atom exchanges applied to the greedy support. 0 keeps
    plain OMP."""
    branches: int = 1
    """Number of greedy runs, each forced to start from one of the atoms most
    correlated with the signal. The best refined support wins."""

    def __post_init__(self) -> None:
        if self.residual_tol < 0 or self.relative_tol < 0:
            raise InvalidParameterError("OMP tolerances must be >= 0")
        if self.max_atoms is not None and self.max_atoms < 0:
            raise InvalidParameterError("max_atoms must be >= 0")
        if self.swap_passes < 0:
            raise InvalidParameterError("swap_passes must be >= 0")
        if self.branches < 1:
            raise InvalidParameterError("branches must be >= 1")

    def stop_threshold(self, signal_norm: float) -> float:
        return max(self.residual_tol, self.relative_tol * signal_norm)

    def cap(self, k: int) -> int:
        return k if self.max_atoms is None else min(k, self.max_atoms)


@dataclass(frozen=True, eq=False)
class OmpStep:
    """One prefix of the greedy path."""

    support: NDArray[np.intp]
    """Atoms in the order they were selected."""
    coefficients: Vector
    residual_norm: float

    def to_sparse(self, dim: int) -> SparseVector:
        return SparseVector.from_support(dim, self.support, self.coefficients)


def omp(
    D: DenseMatrix, x: Vector, k: int, cfg: OmpConfig | None = None
) -> SparseVector:
    """k-sparse least-squares approximation of `x` over unit-norm atoms `D`."""
    cfg = cfg or OmpConfig()
    _check_signal(D, x, k)
    _check_unit_columns(D)
    return _code(D, x, cfg.cap(k), cfg).to_sparse(D.shape[1])


def omp_path(
    D: DenseMatrix, x: Vector, k: int, cfg: OmpConfig | None = None
) -> list[OmpStep]:
    """Every greedy prefix, starting with the empty support. No exchanges."""
    cfg = cfg or OmpConfig()
    _check_signal(D, x, k)
    _check_unit_columns(D)
    return _omp_path(D, x, cfg.cap(k), cfg.stop_threshold(float(np.linalg.norm(x))))


def _code(D: DenseMatrix, x: Vector, k: int, cfg: OmpConfig) -> OmpStep:
    tol = cfg.stop_threshold(float(np.linalg.norm(x)))
    best = _refine(D, x, _omp_path(D, x, k, tol)[-1], tol, cfg.swap_passes)
    if cfg.branches == 1 or k < 2 or best.residual_norm <= tol:
        return best

    corr = np.abs(D.T @ x)
    order = np.lexsort((np.arange(corr.size), -corr))
    for first in order[1 : cfg.branches]:
        step = _omp_path(D, x, k, tol, first=int(first))[-1]
        step = _refine(D, x, step, tol, cfg.swap_passes)
        if step.residual_norm < best.residual_norm:
            best = step
    return best


def _omp_path(
    D: DenseMatrix, x: Vector, k: int, tol: float, first: int | None = None
) -> list[OmpStep]:
    x_norm = float(np.linalg.norm(x))
    steps = [OmpStep(np.empty(0, dtype=np.intp), np.empty(0), x_norm)]
    support = list[int]()
    r = x
    for _ in range(k):
        if steps[-1].residual_norm <= tol:
            break

        if first is not None and not support:
            j = first
        else:
            corr = D.T @ r
            corr[support] = 0.0
            j = int(np.argmax(np.abs(corr)))
            # Residual is orthogonal to every remaining atom.
            if abs(corr[j]) <= ZERO_NORM * max(x_norm, 1.0):
                break

        support.append(j)
        D_s = D[:, support]
        coef = _least_squares(D_s, x)
        r = x - D_s @ coef
        steps.append(
            OmpStep(np.array(support, dtype=np.intp), coef, float(np.linalg.norm(r)))
        )
    return steps


def _exchange_gains(
    D: DenseMatrix, x: Vector, rest: list[int]
) -> tuple[float, Vector]:
    """‖x − Px‖₂² for P projecting onto the atoms `rest`, and the drop in that
    value from adding each atom. Atoms already in the span gain 0."""
    if rest:
        D_r = D[:, rest]
        r = x - D_r @ _least_squares(D_r, x)
        Q = D - D_r @ _least_squares(D_r, D)
    else:
        r, Q = x, D
    norms = np.einsum("ij,ij->j", Q, Q)
    gains = np.zeros(D.shape[1])
    np.divide((r @ Q) ** 2, norms, out=gains, where=norms > ZERO_NORM)
    gains[rest] = 0.0
    return float(r @ r), gains


def _refine(
    D: DenseMatrix, x: Vector, step: OmpStep, tol: float, passes: int
) -> OmpStep:
    """Best single-atom exchange per pass until none lowers the residual."""
    if step.residual_norm <= tol:
        return step

    support = step.support.tolist()
    res_sq = step.residual_norm**2
    floor = _IMPROVEMENT * max(1.0, float(x @ x))
    moved = False
    for _ in range(passes):
        best_pos, best_atom, best_res = -1, -1, res_sq - floor
        for pos in range(len(support)):
            base, gains = _exchange_gains(D, x, support[:pos] + support[pos + 1 :])
            j = int(np.argmax(gains))
            if base - gains[j] < best_res:
                best_pos, best_atom, best_res = pos, j, base - float(gains[j])
        if best_pos < 0:
            break

        support[best_pos] = best_atom
        res_sq = best_res
        moved = True

    if not moved:
        return step
    D_s = D[:, support]
    coef = _least_squares(D_s, x)
    return OmpStep(
        np.array(support, dtype=np.intp), coef, float(np.linalg.norm(x - D_s @ coef))
    )


def _least_squares(D_s: DenseMatrix, x: DenseMatrix) -> DenseMatrix:
    """Normal equations on a small support; ridge on a singular or
    ill-conditioned Gram."""
    G = D_s.T @ D_s
    b = D_s.T @ x
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", LinAlgWarning)
            return scipy.linalg.solve(G, b, assume_a="pos", check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, LinAlgWarning):
        _logger.debug("Singular Gram on a support of %d atoms, adding ridge", len(G))
        return scipy.linalg.solve(
            G + _RIDGE * np.eye(len(G)), b, assume_a="sym", check_finite=False
        )


def sparse_objective(D: DenseMatrix, x: Vector, alpha: SparseVector) -> float:
    """‖x − Dα‖₂²"""
    r = x - D[:, alpha.indices] @ alpha.values
    return float(r @ r)


def exact_sparse_oracle(
    D: DenseMatrix, x: Vector, k: int, cap: int = ORACLE_CAP
) -> SparseVector:
    """Global minimizer of ‖x − Dα‖₂² over all supports of size <= k.

    Ties go to the lexicographically smallest support.
    """
    _check_signal(D, x, k)
    m = D.shape[1]
    n_supports = sum(int(comb(m, s, exact=True)) for s in range(k + 1))
    if n_supports > cap:
        raise TooLargeError(f"{n_supports} supports exceed the oracle cap {cap}")

    tie = 1e-12 * max(1.0, float(x @ x))
    best = SparseVector.empty(m)
    best_obj = float(x @ x)
    supports = sorted(
        chain.from_iterable(combinations(range(m), s) for s in range(1, k + 1))
    )
    for s in supports:
        D_s = D[:, list(s)]
        coef = np.linalg.lstsq(D_s, x, rcond=None)[0]
        r = x - D_s @ coef
        obj = float(r @ r)
        if obj < best_obj - tie:
            best, best_obj = SparseVector.from_support(m, s, coef), obj
    return best


def column_stage_code(
    D: DenseMatrix,
    X: DenseMatrix,
    budgets: Sequence[int] | NDArray[np.intp],
    cfg: OmpConfig | None = None,
    *,
    budget: int | None = None,
    previous: SparseCoeffMatrix | None = None,
) -> SparseCoeffMatrix:
    """Code column i of X under `budgets[i]` atoms, as `omp` does.

    Args:
        budget: the global K carried by the result; defaults to sum(budgets).
        previous: when given, a column whose previous support re-fitted by
            least squares beats the OMP result keeps that re-fit, so the
            objective never increases.
    """
    cfg = cfg or OmpConfig()
    d, n = X.shape
    m = D.shape[1]
    if D.shape[0] != d:
        raise DimensionMismatchError(f"Signals have {d} rows, atoms have {D.shape[0]}")
    budgets = np.asarray(budgets, dtype=np.intp)
    if budgets.shape != (n,):
        raise DimensionMismatchError(f"Expected {n} column budgets, got {budgets.size}")
    if budgets.size and (budgets.min() < 0 or budgets.max() > m):
        raise InvalidParameterError(f"Column budgets must lie in [0, {m}]")
    total = int(budgets.sum())
    K = total if budget is None else budget
    if total > K:
        raise BudgetExceededError(f"Column budgets sum to {total} > K={K}")
    if previous is not None and previous.shape != (m, n):
        raise DimensionMismatchError("Previous coefficients have the wrong shape")
    _check_unit_columns(D)

    columns = list[SparseVector]()
    n_refit = 0
    for j in range(n):
        k = cfg.cap(int(budgets[j]))
        if k == 0:
            columns.append(SparseVector.empty(m))
            continue

        x = X[:, j]
        step = _code(D, x, k, cfg)
        if previous is not None and (refit := _refit_previous(D, x, previous, j, k)):
            if refit.residual_norm < step.residual_norm:
                step = refit
                n_refit += 1
        columns.append(step.to_sparse(m))

    if n_refit:
        _logger.debug("%d columns kept their re-fitted previous support", n_refit)
    return SparseCoeffMatrix.from_columns(m, columns, K)


def _refit_previous(
    D: DenseMatrix, x: Vector, previous: SparseCoeffMatrix, j: int, k: int
) -> OmpStep | None:
    support = previous.column(j).indices
    if support.size == 0 or support.size > k:
        return None
    D_s = D[:, support]
    coef = _least_squares(D_s, x)
    return OmpStep(support, coef, float(np.linalg.norm(x - D_s @ coef)))


def _check_signal(D: DenseMatrix, x: Vector, k: int) -> None:
    if D.ndim != 2 or x.ndim != 1 or x.shape[0] != D.shape[0]:
        raise DimensionMismatchError(
            f"Signal of shape {x.shape} vs dictionary of shape {D.shape}"
        )
    if not 0 <= k <= D.shape[1]:
        raise InvalidParameterError(f"Sparsity must lie in [0, {D.shape[1]}], got {k}")


def _check_unit_columns(D: DenseMatrix) -> None:
    norms = np.linalg.norm(D, axis=0)
    if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
        raise NonUnitDictionaryError("Dictionary columns must have unit l2 norm")
