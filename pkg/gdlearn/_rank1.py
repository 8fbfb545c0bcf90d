"""Sparse rank-1 approximation of a residual matrix.

    min ‖E − d·αᵀ‖_F²   s.t.  ‖α‖₀ <= k, ‖d‖₂ = 1

is solved through the sparse principal direction

    max wᵀEᵀEw   s.t.  ‖w‖₀ <= k, ‖w‖₂ = 1

and mapped back with d = Ew/‖Ew‖₂, α = ‖Ew‖₂·w. For a unit w the residual
of that pair is exactly ‖E‖_F² − ‖Ew‖₂², so a better direction is always a
better rank-1 fit.
"""

import logging
from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.linalg
from scipy.special import comb

from gdlearn._coding import ORACLE_CAP, UNIT_NORM_TOL
from gdlearn._tensor import ZERO_NORM, frobenius_norm_sq
from gdlearn.errors import (
    DegenerateDirectionError,
    DimensionMismatchError,
    InvalidParameterError,
    TooLargeError,
    ZeroMatrixError,
)
from gdlearn.model import DenseMatrix, SparseVector, Vector

_logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SparsePcaConfig:
    inner_iters: int = 30
    tol: float = 1e-9
    """Stop when the objective changes by less than `tol` relative to itself."""
    restarts: int = 1
    """Number of starting directions. A given warm start counts as one; the rest
    are indicators of the largest-norm columns of E."""
    svd_start: bool = True
    """Also start from the k largest entries of the leading right singular
    vector of E."""

    def __post_init__(self) -> None:
        if self.inner_iters < 1:
            raise InvalidParameterError("inner_iters must be >= 1")
        if self.tol < 0:
            raise InvalidParameterError("tol must be >= 0")
        if self.restarts < 1:
            raise InvalidParameterError("restarts must be >= 1")


def truncate_k(v: Vector, k: int) -> SparseVector:
    """Keep the k largest-magnitude entries; ties go to the smaller index."""
    order = np.lexsort((np.arange(v.size), -np.abs(v)))
    keep = order[:k]
    return SparseVector.from_support(v.size, keep, v[keep])


def project(E: DenseMatrix, w: SparseVector) -> Vector:
    """E·w using only the stored entries of w."""
    return E[:, w.indices] @ w.values


def direction_objective(E: DenseMatrix, w: SparseVector) -> float:
    """wᵀEᵀEw"""
    Ew = project(E, w)
    return float(Ew @ Ew)


def sparse_pca_rank1(
    E: DenseMatrix,
    k: int,
    w0: SparseVector | None = None,
    cfg: SparsePcaConfig | None = None,
) -> SparseVector:
    """Unit k-sparse w (locally) maximizing wᵀEᵀEw by truncated power iteration."""
    cfg = cfg or SparsePcaConfig()
    n = _check_rank1_inputs(E, k)
    if w0 is not None:
        _check_unit(w0, n)
        if w0.nnz > k:
            raise InvalidParameterError(f"Warm start has {w0.nnz} > {k} nonzeros")

    starts = [w0] if w0 is not None else []
    col_norms = np.linalg.norm(E, axis=0)
    for j in np.lexsort((np.arange(n), -col_norms)):
        if len(starts) >= cfg.restarts:
            break
        if w0 is None or not (w0.nnz == 1 and w0.indices[0] == j):
            starts.append(SparseVector(n, np.array([j]), np.array([1.0])))
    if cfg.svd_start and k > 1:
        starts.append(_leading_support_start(E, k))

    best, best_obj = starts[0], -1.0
    for start in starts:
        w, trace = _truncated_power(E, k, start, cfg)
        if trace[-1] > best_obj:
            best, best_obj = w, trace[-1]
    return _fix_sign(best)


def _leading_support_start(E: DenseMatrix, k: int) -> SparseVector:
    _, _, Vt = scipy.linalg.svd(E, full_matrices=False, check_finite=False)
    t = truncate_k(Vt[0], k)
    return t.scaled(1.0 / t.norm())


def _truncated_power(
    E: DenseMatrix, k: int, w: SparseVector, cfg: SparsePcaConfig
) -> tuple[SparseVector, list[float]]:
    """Returns the best direction seen and the objective after every step;
    the trace ends with the best objective."""
    Ew = project(E, w)
    obj = float(Ew @ Ew)
    best, best_obj = w, obj
    trace = [obj]
    for _ in range(cfg.inner_iters):
        norm = np.sqrt(obj)
        if norm <= ZERO_NORM:
            break
        z = E.T @ (Ew / norm)
        t = truncate_k(z, k)
        if t.nnz == 0:
            break

        w = t.scaled(1.0 / t.norm())
        Ew = project(E, w)
        new_obj = float(Ew @ Ew)
        trace.append(new_obj)
        converged = abs(new_obj - obj) <= cfg.tol * max(new_obj, ZERO_NORM)
        obj = new_obj
        if obj > best_obj:
            best, best_obj = w, obj
        if converged:
            break

    if trace[-1] < best_obj:
        _logger.debug("Truncated power iteration cycled, keeping the best direction")
        trace.append(best_obj)
    return best, trace


def _fix_sign(w: SparseVector) -> SparseVector:
    """Largest-magnitude entry positive."""
    if w.nnz and w.values[int(np.argmax(np.abs(w.values)))] < 0:
        return w.scaled(-1.0)
    return w


def sparse_pca_oracle(
    E: DenseMatrix, k: int, cap: int = ORACLE_CAP
) -> SparseVector:
    """Global maximizer of wᵀEᵀEw over all size-k supports.

    Ties go to the lexicographically smallest support.
    """
    n = _check_rank1_inputs(E, k, allow_zero=True)
    n_supports = int(comb(n, k, exact=True))
    if n_supports > cap:
        raise TooLargeError(f"{n_supports} supports exceed the oracle cap {cap}")

    G = E.T @ E
    tie = 1e-12 * max(1.0, float(np.trace(G)))
    best_support: tuple[int, ...] = tuple(range(k))
    best_vec = np.zeros(k)
    best_obj = -1.0
    for support in combinations(range(n), k):
        eigvals, eigvecs = scipy.linalg.eigh(G[np.ix_(support, support)])
        if eigvals[-1] > best_obj + tie:
            best_support, best_vec, best_obj = support, eigvecs[:, -1], eigvals[-1]

    if best_obj <= 0:
        best_vec = np.eye(k)[0]
    return _fix_sign(SparseVector.from_support(n, best_support, best_vec))


def direction_to_rank1(
    E: DenseMatrix, w: SparseVector
) -> tuple[Vector, SparseVector]:
    """Map a unit sparse direction to the rank-1 pair (d, α) it induces.

    d = Ew/‖Ew‖₂ and α = ‖Ew‖₂·w, so that ‖E − dαᵀ‖_F² = ‖E‖_F² − wᵀEᵀEw.
    """
    n = E.shape[1]
    _check_unit(w, n)
    Ew = project(E, w)
    norm = float(np.linalg.norm(Ew))
    if norm <= ZERO_NORM:
        raise DegenerateDirectionError("E·w vanishes, no atom direction exists")
    return Ew / norm, w.scaled(norm)


def sparse_rank1_update(
    E: DenseMatrix,
    k: int,
    warm: SparseVector | None = None,
    cfg: SparsePcaConfig | None = None,
) -> tuple[Vector, SparseVector]:
    """Best-effort solution of min ‖E − dαᵀ‖_F², ‖α‖₀ <= k, ‖d‖₂ = 1.

    With a warm row the result is never worse than re-fitting that row's
    direction, hence never worse than the warm pair itself.
    """
    w_warm = None
    if warm is not None and warm.nnz:
        w_warm = warm.scaled(1.0 / warm.norm())

    w = sparse_pca_rank1(E, k, w_warm, cfg)
    if w_warm is not None and direction_objective(E, w_warm) > direction_objective(
        E, w
    ):
        w = w_warm
    return direction_to_rank1(E, w)


def rank1_residual_sq(E: DenseMatrix, d: Vector, alpha: SparseVector) -> float:
    """‖E − dαᵀ‖_F² without forming the outer product."""
    Ea = project(E, alpha)
    return frobenius_norm_sq(E) - 2.0 * float(d @ Ea) + float(d @ d) * float(
        alpha.values @ alpha.values
    )


def _check_rank1_inputs(E: DenseMatrix, k: int, allow_zero: bool = False) -> int:
    if E.ndim != 2:
        raise DimensionMismatchError("E must be a matrix")
    n = E.shape[1]
    if not 1 <= k <= n:
        raise InvalidParameterError(f"Sparsity must lie in [1, {n}], got {k}")
    if not allow_zero and np.sqrt(frobenius_norm_sq(E)) < ZERO_NORM:
        raise ZeroMatrixError("‖E‖_F vanishes, no principal direction exists")
    return n


def _check_unit(w: SparseVector, n: int) -> None:
    if w.dim != n:
        raise DimensionMismatchError(f"Direction has dim {w.dim}, E has {n} columns")
    if abs(w.norm() - 1.0) > UNIT_NORM_TOL:
        raise InvalidParameterError("Direction must have unit l2 norm")
