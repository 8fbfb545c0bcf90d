"""Synthetic signal sets and image noise models."""

import logging
from dataclasses import dataclass, field

import numpy as np

from gdlearn._random import Stream, seeded_rng
from gdlearn._tensor import normalize_columns
from gdlearn.errors import InvalidParameterError
from gdlearn.model import (
    DenseMatrix,
    GrayImage,
    HomogeneousGaussianPlusSaltPepper,
    NoiseSpec,
    NonhomogeneousGaussian,
    NonhomogeneousGaussianPlusSaltPepper,
    PerColumnSparsity,
    SaltPepper,
    SparseCoeffMatrix,
    TotalSparsity,
)

_logger = logging.getLogger(__name__)

MAX_INTENSITY = 255.0


@dataclass(frozen=True)
class SyntheticSpec:
    """A signal set X = D·A (+ noise) with a known generating dictionary."""

    d: int = 20
    m: int = 50
    n: int = 1500
    sparsity: PerColumnSparsity | TotalSparsity = field(
        default_factory=lambda: PerColumnSparsity(3)
    )
    noise_sigma: float = 0.0

    def __post_init__(self) -> None:
        if min(self.d, self.m, self.n) < 1:
            raise InvalidParameterError("d, m and n must be >= 1")
        if self.noise_sigma < 0:
            raise InvalidParameterError("noise_sigma must be >= 0")
        match self.sparsity:
            case PerColumnSparsity(k=k):
                if not 0 <= k <= self.m:
                    raise InvalidParameterError(
                        f"Per-column k must lie in [0, {self.m}]"
                    )
            case TotalSparsity(nnz=nnz):
                if not 0 <= nnz <= self.m * self.n:
                    raise InvalidParameterError("Total nnz exceeds m·n")

    @property
    def total_nnz(self) -> int:
        match self.sparsity:
            case PerColumnSparsity(k=k):
                return k * self.n
            case TotalSparsity(nnz=nnz):
                return nnz


@dataclass(eq=False)
class SyntheticData:
    D_true: DenseMatrix
    A_true: SparseCoeffMatrix
    X_clean: DenseMatrix
    X_noisy: DenseMatrix


def gen_synthetic(spec: SyntheticSpec, seed: int) -> SyntheticData:
    """Generate a signal set.

    The generating dictionary and coefficients come from the DATA substream and
    the additive noise from the NOISE substream, so sets that differ only in
    `noise_sigma` share the same clean signals.
    """
    rng = seeded_rng(seed, Stream.DATA)
    D_true = normalize_columns(rng.standard_normal((spec.d, spec.m)))

    match spec.sparsity:
        case PerColumnSparsity(k=k):
            rows = np.concatenate(
                [rng.choice(spec.m, size=k, replace=False) for _ in range(spec.n)]
                or [np.empty(0, dtype=np.intp)]
            )
            cols = np.repeat(np.arange(spec.n), k)
        case TotalSparsity(nnz=nnz):
            flat = rng.choice(spec.m * spec.n, size=nnz, replace=False)
            rows, cols = np.divmod(flat, spec.n)
    values = nonzero_normals(rng, rows.size)
    A_true = SparseCoeffMatrix.from_triplets(
        (spec.m, spec.n), rows, cols, values, spec.total_nnz
    )

    X_clean = np.asarray(A_true.csc.T @ D_true.T, dtype=np.float64).T.copy()
    if spec.noise_sigma > 0:
        noise = seeded_rng(seed, Stream.NOISE).standard_normal(X_clean.shape)
        X_noisy = X_clean + spec.noise_sigma * noise
    else:
        X_noisy = X_clean.copy()

    _logger.info(
        "Generated %d×%d signals over %d atoms, nnz=%d, sigma=%g",
        spec.d,
        spec.n,
        spec.m,
        A_true.nnz,
        spec.noise_sigma,
    )
    return SyntheticData(D_true, A_true, X_clean, X_noisy)


def nonzero_normals(rng: np.random.Generator, size: int) -> np.ndarray:
    values = rng.standard_normal(size)
    while np.any(zero := values == 0):
        values[zero] = rng.standard_normal(int(zero.sum()))
    return values


def noise_ramp(height: int, width: int, delta: float) -> DenseMatrix:
    """Per-pixel deviation: `delta` at the upper-left, 0 at the lower-right,
    linear in the Manhattan distance from the lower-right corner."""
    span = (height - 1) + (width - 1)
    if span == 0:
        return np.full((height, width), float(delta))
    r = (height - 1 - np.arange(height))[:, None]
    c = (width - 1 - np.arange(width))[None, :]
    return delta * (r + c) / span


def apply_noise(
    img: GrayImage, spec: NoiseSpec, seed: int, clip: bool = False
) -> GrayImage:
    """Corrupt `img`. Gaussian components go first, salt-pepper last."""
    rng = seeded_rng(seed, Stream.NOISE)
    pixels = img.pixels.copy()
    h, w = img.dims

    match spec:
        case NonhomogeneousGaussian(delta=delta):
            pixels += noise_ramp(h, w, delta) * rng.standard_normal((h, w))
        case SaltPepper(p=p):
            _salt_pepper(pixels, p, rng)
        case HomogeneousGaussianPlusSaltPepper(sigma=sigma, p=p):
            pixels += sigma * rng.standard_normal((h, w))
            _salt_pepper(pixels, p, rng)
        case NonhomogeneousGaussianPlusSaltPepper(delta=delta, p=p):
            pixels += noise_ramp(h, w, delta) * rng.standard_normal((h, w))
            _salt_pepper(pixels, p, rng)
        case _:
            raise InvalidParameterError(f"Unknown noise model: {spec!r}")

    if clip:
        np.clip(pixels, 0.0, MAX_INTENSITY, out=pixels)
    return GrayImage(pixels)


def salt_pepper_count(n_pixels: int, p: float) -> int:
    """round-half-up(p% of the pixels)"""
    return int(np.floor(p / 100.0 * n_pixels + 0.5))


def _salt_pepper(pixels: DenseMatrix, p: float, rng: np.random.Generator) -> None:
    count = salt_pepper_count(pixels.size, p)
    if count == 0:
        return
    flat = pixels.reshape(-1)
    dead = rng.choice(flat.size, size=count, replace=False)
    flat[dead] = MAX_INTENSITY * rng.integers(0, 2, size=count)
