"""In-memory data model.

Signals, dictionaries and residuals are plain float64 numpy arrays
(`DenseMatrix`); coefficient matrices, images, patch lattices, noise models
and run histories are the dataclasses below. Everything the learners,
metrics and file codecs exchange is one of these.
"""

from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.sparse import coo_array, csc_array
from typing_extensions import Self, TypeAlias

from gdlearn.errors import (
    BudgetExceededError,
    DimensionMismatchError,
    InvalidParameterError,
    NonFiniteValueError,
)

DenseMatrix: TypeAlias = NDArray[np.float64]
"""A real d×n grid, row-major, 64-bit. Build one with `as_dense()`."""

Vector: TypeAlias = NDArray[np.float64]


def as_dense(data: ArrayLike) -> DenseMatrix:
    """Validated 2-D float64 copy of `data`. NaN/Inf are rejected."""
    m = np.array(data, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionMismatchError(f"Expected a 2-D matrix, got {m.ndim}-D")
    if not np.all(np.isfinite(m)):
        raise NonFiniteValueError("Matrix contains NaN or Inf")
    return m


@dataclass(frozen=True, eq=False)
class SparseVector:
    """Nonzero entries of a `dim`-long vector: strictly increasing indices."""

    dim: int
    indices: NDArray[np.intp]
    values: Vector

    def __post_init__(self) -> None:
        indices = np.asarray(self.indices, dtype=np.intp)
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "values", values)

        if indices.shape != values.shape or indices.ndim != 1:
            raise DimensionMismatchError("Indices and values must be 1-D, same size")
        if indices.size:
            if indices[0] < 0 or indices[-1] >= self.dim:
                raise InvalidParameterError("Sparse vector index out of range")
            if np.any(np.diff(indices) <= 0):
                raise InvalidParameterError("Indices must be strictly increasing")
        if np.any(values == 0):
            raise InvalidParameterError("Stored values must be nonzero")
        if not np.all(np.isfinite(values)):
            raise NonFiniteValueError("Sparse vector contains NaN or Inf")

    @classmethod
    def empty(cls, dim: int) -> Self:
        return cls(dim, np.empty(0, dtype=np.intp), np.empty(0))

    @classmethod
    def from_support(cls, dim: int, support: ArrayLike, values: ArrayLike) -> Self:
        """Any-order support; exact zeros are dropped."""
        support = np.asarray(support, dtype=np.intp)
        values = np.asarray(values, dtype=np.float64)
        order = np.argsort(support, kind="stable")
        support, values = support[order], values[order]
        keep = values != 0
        return cls(dim, support[keep], values[keep])

    @classmethod
    def from_dense(cls, vec: ArrayLike) -> Self:
        vec = np.asarray(vec, dtype=np.float64)
        (idx,) = np.nonzero(vec)
        return cls(vec.size, idx, vec[idx])

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def to_dense(self) -> Vector:
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out

    def scaled(self, factor: float) -> "SparseVector":
        return SparseVector.from_support(self.dim, self.indices, self.values * factor)


@dataclass(frozen=True, eq=False)
class SparseCoeffMatrix:
    """The m×n coefficient matrix `A` under the global budget `budget` (K).

    Entries are bucketed per column (CSC), since coding touches one column at
    a time; rows are materialized on demand for the atom updates.
    """

    csc: csc_array
    budget: int

    def __post_init__(self) -> None:
        csc = self.csc
        if not csc.has_canonical_format:
            raise InvalidParameterError("Duplicate or unsorted coordinates")
        if np.any(csc.data == 0):
            raise InvalidParameterError("Explicit zeros are not allowed")
        if not np.all(np.isfinite(csc.data)):
            raise NonFiniteValueError("Coefficients contain NaN or Inf")
        if self.budget < 0:
            raise InvalidParameterError("Budget must be >= 0")
        if csc.nnz > self.budget:
            raise BudgetExceededError(
                f"{csc.nnz} nonzeros exceed the global budget K={self.budget}"
            )

    @classmethod
    def empty(cls, rows: int, cols: int, budget: int) -> Self:
        return cls(csc_array((rows, cols), dtype=np.float64), budget)

    @classmethod
    def from_triplets(
        cls,
        shape: tuple[int, int],
        rows: ArrayLike,
        cols: ArrayLike,
        values: ArrayLike,
        budget: int,
    ) -> Self:
        r = np.asarray(rows, dtype=np.intp)
        c = np.asarray(cols, dtype=np.intp)
        v = np.asarray(values, dtype=np.float64)
        if not (r.shape == c.shape == v.shape):
            raise DimensionMismatchError("Triplet arrays differ in length")
        if r.size and (
            r.min() < 0 or c.min() < 0 or r.max() >= shape[0] or c.max() >= shape[1]
        ):
            raise InvalidParameterError("Coefficient index out of range")
        if np.unique(c * shape[0] + r).size != r.size:
            raise InvalidParameterError("Duplicate (row, col) coordinates")
        keep = v != 0
        coo = coo_array((v[keep], (r[keep], c[keep])), shape=shape)
        csc = csc_array(coo)
        csc.sum_duplicates()
        return cls(csc, budget)

    @classmethod
    def from_columns(
        cls, rows: int, columns: Sequence[SparseVector], budget: int
    ) -> Self:
        counts = np.fromiter(
            (c.nnz for c in columns), dtype=np.intp, count=len(columns)
        )
        indptr = np.concatenate(([0], np.cumsum(counts)))
        if columns:
            indices = np.concatenate([c.indices for c in columns])
            data = np.concatenate([c.values for c in columns])
        else:
            indices, data = np.empty(0, dtype=np.intp), np.empty(0)
        return cls(
            csc_array((data, indices, indptr), shape=(rows, len(columns))), budget
        )

    @classmethod
    def from_rows(cls, cols: int, rows: Sequence[SparseVector], budget: int) -> Self:
        r = np.concatenate(
            [np.full(v.nnz, i, dtype=np.intp) for i, v in enumerate(rows)]
            or [np.empty(0, dtype=np.intp)]
        )
        c = np.concatenate([v.indices for v in rows] or [np.empty(0, dtype=np.intp)])
        v = np.concatenate([v.values for v in rows] or [np.empty(0)])
        return cls.from_triplets((len(rows), cols), r, c, v, budget)

    @classmethod
    def from_dense(cls, A: ArrayLike, budget: int | None = None) -> Self:
        dense = as_dense(A)
        rows, cols = np.nonzero(dense.T)[::-1]
        nnz = rows.size
        return cls.from_triplets(
            dense.shape,
            rows,
            cols,
            dense[rows, cols],
            nnz if budget is None else budget,
        )

    @property
    def shape(self) -> tuple[int, int]:
        rows, cols = self.csc.shape
        return int(rows), int(cols)

    @property
    def nnz(self) -> int:
        return int(self.csc.nnz)

    def nnz_per_column(self) -> NDArray[np.intp]:
        return np.diff(self.csc.indptr).astype(np.intp)

    def nnz_per_row(self) -> NDArray[np.intp]:
        return np.bincount(self.csc.indices, minlength=self.shape[0]).astype(np.intp)

    def column(self, j: int) -> SparseVector:
        lo, hi = self.csc.indptr[j], self.csc.indptr[j + 1]
        return SparseVector(
            self.shape[0], self.csc.indices[lo:hi], self.csc.data[lo:hi]
        )

    def rows(self) -> list[SparseVector]:
        csr = self.csc.tocsr()
        csr.sort_indices()
        n = self.shape[1]
        return [
            SparseVector(
                n,
                csr.indices[csr.indptr[i] : csr.indptr[i + 1]],
                csr.data[csr.indptr[i] : csr.indptr[i + 1]],
            )
            for i in range(self.shape[0])
        ]

    def to_dense(self) -> DenseMatrix:
        return np.asarray(self.csc.toarray(), dtype=np.float64)

    def triplets(self) -> Iterator[tuple[int, int, float]]:
        """(row, col, value), column-major."""
        indptr, indices, data = self.csc.indptr, self.csc.indices, self.csc.data
        for j in range(self.shape[1]):
            for p in range(indptr[j], indptr[j + 1]):
                yield int(indices[p]), j, float(data[p])


@dataclass(eq=False)
class GrayImage:
    """H×W grayscale raster, nominally on the 0–255 scale."""

    pixels: DenseMatrix

    def __post_init__(self) -> None:
        self.pixels = as_dense(self.pixels)

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def dims(self) -> tuple[int, int]:
        return self.height, self.width


@dataclass(frozen=True)
class PatchGrid:
    """A regular lattice of square patches lying fully inside an image."""

    patch_side: int
    stride: int
    origin: tuple[int, int]
    n_rows: int
    "Patches per image column (vertical lattice size)."
    n_cols: int
    "Patches per image row."

    def __len__(self) -> int:
        return self.n_rows * self.n_cols

    @property
    def coords(self) -> NDArray[np.intp]:
        """Top-left corners, row-major."""
        r0, c0 = self.origin
        rr, cc = np.meshgrid(
            r0 + self.stride * np.arange(self.n_rows),
            c0 + self.stride * np.arange(self.n_cols),
            indexing="ij",
        )
        return np.stack([rr.ravel(), cc.ravel()], axis=1).astype(np.intp)


@dataclass(frozen=True)
class NoiseSpec:
    """Base of the image noise models; `apply_noise` dispatches on the subclass."""


@dataclass(frozen=True)
class NonhomogeneousGaussian(NoiseSpec):
    """Deviation ramps linearly from 0 (lower-right) to `delta` (upper-left)."""

    delta: float

    def __post_init__(self) -> None:
        _check_non_negative(delta=self.delta)


@dataclass(frozen=True)
class SaltPepper(NoiseSpec):
    p: float
    """Percentage of dead pixels, 0..100."""

    def __post_init__(self) -> None:
        _check_percent(self.p)


@dataclass(frozen=True)
class HomogeneousGaussianPlusSaltPepper(NoiseSpec):
    sigma: float
    p: float

    def __post_init__(self) -> None:
        _check_non_negative(sigma=self.sigma)
        _check_percent(self.p)


@dataclass(frozen=True)
class NonhomogeneousGaussianPlusSaltPepper(NoiseSpec):
    delta: float
    p: float

    def __post_init__(self) -> None:
        _check_non_negative(delta=self.delta)
        _check_percent(self.p)


def _check_non_negative(**values: float) -> None:
    for name, value in values.items():
        if not value >= 0:
            raise InvalidParameterError(f"{name} must be >= 0, got {value}")


def _check_percent(p: float) -> None:
    if not 0 <= p <= 100:
        raise InvalidParameterError(f"p must lie in [0, 100], got {p}")


@dataclass(frozen=True)
class PerColumnSparsity:
    """Every synthetic signal combines exactly `k` atoms."""

    k: int


@dataclass(frozen=True)
class TotalSparsity:
    """`nnz` nonzeros scattered over the whole coefficient matrix."""

    nnz: int


@dataclass
class IterationRecord:
    iteration: int
    objective: float
    """‖X − DA‖_F² after the full iteration."""
    nnz: int
    wall_seconds: float
    objective_after_coding: float | None = None
    """‖X − DA‖_F² between the coding and the dictionary update stage."""
    re: float | None = None
    dr: float | None = None


@dataclass
class RunHistory:
    records: list[IterationRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def append(self, record: IterationRecord) -> None:
        self.records.append(record)

    def objectives(self) -> list[float]:
        return [r.objective for r in self.records]

    def stage_objectives(self) -> list[float]:
        """Objective after every stage, in execution order."""
        out = list[float]()
        for r in self.records:
            if r.objective_after_coding is not None:
                out.append(r.objective_after_coding)
            out.append(r.objective)
        return out

    @property
    def last(self) -> IterationRecord:
        return self.records[-1]
