import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import ClassVar

import numpy as np
from typing_extensions import Self

from gdlearn._baselines import (
    BaselineConfig,
    ksvd_pk_learn,
    overcomplete_dct_dictionary,
)
from gdlearn._coding import OmpConfig, column_stage_code
from gdlearn._gdl import GdlConfig, gdl_learn
from gdlearn._metrics import atom_usage_map, psnr
from gdlearn._patches import extract_patches, reconstruct_from_patches
from gdlearn._tensor import dense_product
from gdlearn.errors import InvalidParameterError, UncoveredPixelError
from gdlearn.model import (
    DenseMatrix,
    GrayImage,
    PatchGrid,
    RunHistory,
    SparseCoeffMatrix,
)

_logger = logging.getLogger(__name__)


class DenoiseMethod(str, Enum):
    GDL = "gdl"
    KSVD = "ksvd"
    DCT = "dct"


DEFAULT_DCT_SIGMAS = tuple(float(s) for s in range(5, 55, 5))


@dataclass(frozen=True)
class DenoiseConfig:
    method: DenoiseMethod = DenoiseMethod.GDL
    K: int = 15000
    """Global budget (GDL)."""
    atoms: int = 256
    iters: int = 10
    seed: int = 0
    k_per_column: int | None = None
    """Per-patch sparsity of K-SVD; defaults to round(K / n), at least 1."""
    dct_sigmas: tuple[float, ...] = DEFAULT_DCT_SIGMAS
    """Noise deviations tried by the DCT method, which keeps the best one."""
    dct_max_atoms: int | None = None

    def __post_init__(self) -> None:
        if self.K < 0 or self.atoms < 1 or self.iters < 1:
            raise InvalidParameterError("K must be >= 0, atoms and iters >= 1")
        if self.k_per_column is not None and self.k_per_column < 1:
            raise InvalidParameterError("k_per_column must be >= 1")
        if not self.dct_sigmas or min(self.dct_sigmas) < 0:
            raise InvalidParameterError("dct_sigmas must be a non-empty list of >= 0")


class Denoiser:
    """Patch-based image denoising with a learned or a fixed dictionary.

    Usage:
        Denoiser(DenoiseConfig(method=DenoiseMethod.GDL)).train(noisy).reconstruct()

    Subclass to change the patch geometry or to post-process the result.
    """

    PATCH_SIDE: ClassVar[int] = 8
    REMOVE_PATCH_MEANS: ClassVar[bool] = True
    """Learn and code zero-mean patches; means are added back before averaging."""
    LARGE_IMAGE_SIDE: ClassVar[int] = 256
    LARGE_IMAGE_STRIDE: ClassVar[int] = 2
    """Patch stride for images larger than `LARGE_IMAGE_SIDE` in some dimension."""
    DCT_ATOMS_PER_DIM: ClassVar[int] = 16
    DCT_ERROR_GAIN: ClassVar[float] = 1.15
    """DCT coding stops at a residual norm of gain·sigma·√d."""

    def __init__(self, cfg: DenoiseConfig | None = None) -> None:
        self.cfg = cfg or DenoiseConfig()
        self._noisy: GrayImage | None = None
        self._grid: PatchGrid | None = None
        self._X = np.empty((0, 0))
        self._means = np.empty(0)
        self._D = np.empty((0, 0))
        self._A: SparseCoeffMatrix | None = None
        self._history = RunHistory()
        self._dct_sigma: float | None = None

    @property
    def dictionary(self) -> DenseMatrix:
        return self._D

    @property
    def coefficients(self) -> SparseCoeffMatrix:
        if self._A is None:
            raise InvalidParameterError("Nothing coded yet, call reconstruct()")
        return self._A

    @property
    def grid(self) -> PatchGrid:
        if self._grid is None:
            raise InvalidParameterError("Not trained yet, call train()")
        return self._grid

    @property
    def history(self) -> RunHistory:
        return self._history

    @property
    def dct_sigma(self) -> float | None:
        """The deviation the DCT sweep settled on."""
        return self._dct_sigma

    def train(self, noisy: GrayImage) -> Self:
        """Learn the dictionary on the overlapping patches of `noisy`."""
        stride = self._stride(noisy.dims)
        X, self._grid = extract_patches(noisy, self.PATCH_SIDE, stride)
        if self.REMOVE_PATCH_MEANS:
            self._means = X.mean(axis=0)
            X = X - self._means
        else:
            self._means = np.zeros(X.shape[1])
        self._noisy, self._X = noisy, X
        _logger.info(
            "Denoising %d×%d image with %s on %d patches (stride %d)",
            noisy.height,
            noisy.width,
            self.cfg.method.value,
            X.shape[1],
            stride,
        )

        cfg = self.cfg
        match cfg.method:
            case DenoiseMethod.GDL:
                self._D, self._A, self._history = gdl_learn(
                    X,
                    GdlConfig(
                        m=cfg.atoms, K=cfg.K, max_iters=cfg.iters, seed=cfg.seed
                    ),
                )
            case DenoiseMethod.KSVD:
                k = cfg.k_per_column or max(1, round(cfg.K / X.shape[1]))
                self._D, self._A, self._history = ksvd_pk_learn(
                    X,
                    BaselineConfig(
                        m=cfg.atoms,
                        k_per_column=k,
                        max_iters=cfg.iters,
                        seed=cfg.seed,
                    ),
                )
            case DenoiseMethod.DCT:
                self._D = overcomplete_dct_dictionary(
                    self.PATCH_SIDE, self.DCT_ATOMS_PER_DIM
                )
                self._A = None
        return self

    def reconstruct(self, clean: GrayImage | None = None) -> GrayImage:
        """Average the coded patches back into an image.

        The DCT method needs `clean` to pick among several candidate deviations.
        """
        if self._noisy is None:
            raise InvalidParameterError("Not trained yet, call train()")
        if self.cfg.method != DenoiseMethod.DCT:
            return self._postprocess(self._rebuild(self.coefficients))

        sigmas = self.cfg.dct_sigmas
        if len(sigmas) > 1 and clean is None:
            raise InvalidParameterError(
                "Choosing among DCT deviations needs the clean image"
            )
        best: tuple[float, GrayImage, SparseCoeffMatrix] | None = None
        best_psnr = -math.inf
        for sigma in sigmas:
            A = self._dct_code(sigma)
            img = self._postprocess(self._rebuild(A))
            score = psnr(clean, img) if clean is not None else 0.0
            _logger.info("DCT sigma=%g: PSNR %.2f dB, nnz=%d", sigma, score, A.nnz)
            if best is None or score > best_psnr:
                best, best_psnr = (sigma, img, A), score

        assert best is not None
        self._dct_sigma, img, self._A = best
        return img

    def usage_map(self) -> GrayImage | None:
        """Atom-usage map of the final coding; None if the patches miss some pixel."""
        try:
            return atom_usage_map(self.coefficients, self.grid, self.grid_dims)
        except UncoveredPixelError:
            _logger.warning("Patches do not cover the whole image, no usage map")
            return None

    @property
    def grid_dims(self) -> tuple[int, int]:
        if self._noisy is None:
            raise InvalidParameterError("Not trained yet, call train()")
        return self._noisy.dims

    def _rebuild(self, A: SparseCoeffMatrix) -> GrayImage:
        P = dense_product(self._D, A) + self._means
        return reconstruct_from_patches(P, self.grid, self.grid_dims, self._noisy)

    def _dct_code(self, sigma: float) -> SparseCoeffMatrix:
        d, n = self._X.shape
        max_atoms = self.cfg.dct_max_atoms or d // 2
        omp_cfg = OmpConfig(residual_tol=self.DCT_ERROR_GAIN * sigma * math.sqrt(d))
        budgets = np.full(n, max_atoms, dtype=np.intp)
        return column_stage_code(self._D, self._X, budgets, omp_cfg)

    def _stride(self, dims: tuple[int, int]) -> int:
        """Override to choose the patch stride differently."""
        if max(dims) > self.LARGE_IMAGE_SIDE:
            return self.LARGE_IMAGE_STRIDE
        return 1

    def _postprocess(self, img: GrayImage) -> GrayImage:
        """Override to transform the reconstructed image."""
        return img
