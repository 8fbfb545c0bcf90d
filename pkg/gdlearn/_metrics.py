"""Evaluation quantities: atom recovery, DR, RE, PSNR and atom-usage maps."""

import math
from dataclasses import dataclass

import numpy as np
from skimage.metrics import peak_signal_noise_ratio
from typing_extensions import Self

from gdlearn._patches import accumulate_patches, patch_cover_counts
from gdlearn.errors import (
    DimensionMismatchError,
    EmptyDictionaryError,
    UncoveredPixelError,
)
from gdlearn.model import (
    DenseMatrix,
    GrayImage,
    PatchGrid,
    SparseCoeffMatrix,
    Vector,
)

RECOVERY_THRESHOLD = 0.01
PEAK = 255.0


def atom_recovery_distance(d_true: Vector, D_hat: DenseMatrix) -> float:
    """1 − |cosine| to the closest learned atom."""
    if D_hat.shape[1] == 0:
        raise EmptyDictionaryError("No learned atoms to compare with")
    if D_hat.shape[0] != d_true.shape[0]:
        raise DimensionMismatchError("Atom lengths differ")
    return float(np.clip(1.0 - np.max(np.abs(D_hat.T @ d_true)), 0.0, 1.0))


def atom_distances(D_true: DenseMatrix, D_hat: DenseMatrix) -> list[float]:
    """`atom_recovery_distance` for every generating atom.

    A learned atom may be the closest match of several true atoms.
    """
    if D_hat.shape[1] == 0:
        raise EmptyDictionaryError("No learned atoms to compare with")
    if D_hat.shape[0] != D_true.shape[0]:
        raise DimensionMismatchError("Atom lengths differ")
    cosines = np.abs(D_true.T @ D_hat).max(axis=1)
    return np.clip(1.0 - cosines, 0.0, 1.0).tolist()


def dictionary_recovery_rate(
    D_true: DenseMatrix, D_hat: DenseMatrix, threshold: float = RECOVERY_THRESHOLD
) -> float:
    if D_true.shape[1] == 0:
        return 0.0
    distances = np.asarray(atom_distances(D_true, D_hat))
    return float(np.mean(distances < threshold))


def representation_error(X_ref: DenseMatrix, X_hat: DenseMatrix) -> float:
    """Per-signal residual RMS, averaged over the signals."""
    if X_ref.shape != X_hat.shape:
        raise DimensionMismatchError(f"{X_ref.shape} vs {X_hat.shape}")
    d = X_ref.shape[0]
    return float(np.mean(np.linalg.norm(X_hat - X_ref, axis=0)) / math.sqrt(d))


def psnr(f: GrayImage, f_r: GrayImage) -> float:
    """10·log10(255² / MSE) in dB; +inf for identical images."""
    if f.dims != f_r.dims:
        raise DimensionMismatchError(f"Images are {f.dims} and {f_r.dims}")
    if np.array_equal(f.pixels, f_r.pixels):
        return math.inf
    return float(peak_signal_noise_ratio(f.pixels, f_r.pixels, data_range=PEAK))


def atom_usage_counts(
    A: SparseCoeffMatrix, grid: PatchGrid, dims: tuple[int, int]
) -> DenseMatrix:
    """Mean number of atoms used by the patches covering each pixel."""
    if A.shape[1] != len(grid):
        raise DimensionMismatchError(
            f"{A.shape[1]} coefficient columns for {len(grid)} patches"
        )
    counts = A.nnz_per_column().astype(np.float64)
    cover = patch_cover_counts(grid, dims)
    if np.any(cover == 0):
        raise UncoveredPixelError(
            f"{int((cover == 0).sum())} pixels are not covered by any patch"
        )
    per_patch = np.broadcast_to(counts, (grid.patch_side**2, counts.size))
    # Every pixel of patch j carries nnz(α_j).
    return accumulate_patches(per_patch, grid, dims) / cover


def atom_usage_map(
    A: SparseCoeffMatrix, grid: PatchGrid, dims: tuple[int, int]
) -> GrayImage:
    """`atom_usage_counts` linearly rescaled to [0, 255]; a constant map is black."""
    raw = atom_usage_counts(A, grid, dims)
    lo, hi = raw.min(), raw.max()
    if hi - lo <= 0:
        return GrayImage(np.zeros(dims))
    return GrayImage((raw - lo) / (hi - lo) * PEAK)


@dataclass(frozen=True)
class MetricsReport:
    """Quality figures of one run, written as columns of the result CSVs."""

    re: float | None = None
    dr: float | None = None
    psnr_db: float | None = None
    """PSNR of the reconstruction."""
    psnr_noisy_db: float | None = None
    per_atom_distances: tuple[float, ...] = ()

    @classmethod
    def recovery(
        cls,
        D_true: DenseMatrix,
        D_hat: DenseMatrix,
        X_ref: DenseMatrix,
        X_hat: DenseMatrix,
    ) -> Self:
        return cls(
            re=representation_error(X_ref, X_hat),
            dr=dictionary_recovery_rate(D_true, D_hat),
            per_atom_distances=tuple(atom_distances(D_true, D_hat)),
        )

    @classmethod
    def denoising(cls, clean: GrayImage, noisy: GrayImage, recon: GrayImage) -> Self:
        return cls(psnr_db=psnr(clean, recon), psnr_noisy_db=psnr(clean, noisy))

    def recovery_row(self) -> tuple[float | None, float | None]:
        """re, dr"""
        return self.re, self.dr

    def psnr_row(self) -> tuple[float | None, float | None]:
        """psnr_noisy_db, psnr_recon_db"""
        return self.psnr_noisy_db, self.psnr_db
