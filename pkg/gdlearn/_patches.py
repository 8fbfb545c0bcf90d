"""Overlapping patches: image -> signal matrix and back."""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from gdlearn.errors import (
    DimensionMismatchError,
    ImageTooSmallError,
    InvalidParameterError,
    UncoveredPixelError,
)
from gdlearn.model import DenseMatrix, GrayImage, PatchGrid


def patch_grid(
    dims: tuple[int, int],
    patch_side: int = 8,
    stride: int = 1,
    origin: tuple[int, int] = (0, 0),
) -> PatchGrid:
    h, w = dims
    r0, c0 = origin
    if patch_side < 1 or stride < 1 or r0 < 0 or c0 < 0:
        raise InvalidParameterError("patch_side and stride must be >= 1, origin >= 0")
    if h - r0 < patch_side or w - c0 < patch_side:
        raise ImageTooSmallError(
            f"{h}×{w} image (origin {origin}) cannot hold a "
            f"{patch_side}×{patch_side} patch"
        )
    return PatchGrid(
        patch_side=patch_side,
        stride=stride,
        origin=origin,
        n_rows=(h - r0 - patch_side) // stride + 1,
        n_cols=(w - c0 - patch_side) // stride + 1,
    )


def extract_patches(
    img: GrayImage,
    patch_side: int = 8,
    stride: int = 1,
    origin: tuple[int, int] = (0, 0),
) -> tuple[DenseMatrix, PatchGrid]:
    """Every lattice patch flattened row-major into one column."""
    grid = patch_grid(img.dims, patch_side, stride, origin)
    r0, c0 = origin
    windows = sliding_window_view(img.pixels[r0:, c0:], (patch_side, patch_side))
    windows = windows[::stride, ::stride][: grid.n_rows, : grid.n_cols]
    X = windows.reshape(len(grid), patch_side * patch_side).T
    return np.ascontiguousarray(X, dtype=np.float64), grid


def patch_cover_counts(grid: PatchGrid, dims: tuple[int, int]) -> DenseMatrix:
    """How many patches cover every pixel."""
    ones = np.ones((grid.patch_side**2, len(grid)))
    return accumulate_patches(ones, grid, dims)


def accumulate_patches(
    P: DenseMatrix, grid: PatchGrid, dims: tuple[int, int]
) -> DenseMatrix:
    """Sum every patch column into its place in an image of size `dims`."""
    p, s = grid.patch_side, grid.stride
    r0, c0 = grid.origin
    rows_end = r0 + s * (grid.n_rows - 1) + 1
    cols_end = c0 + s * (grid.n_cols - 1) + 1
    acc = np.zeros(dims)
    for a in range(p):
        for b in range(p):
            acc[r0 + a : rows_end + a : s, c0 + b : cols_end + b : s] += P[
                a * p + b
            ].reshape(grid.n_rows, grid.n_cols)
    return acc


def reconstruct_from_patches(
    P: DenseMatrix,
    grid: PatchGrid,
    dims: tuple[int, int],
    fallback: GrayImage | None = None,
) -> GrayImage:
    """Average overlapping patches back into an image.

    Pixels no patch covers are copied from `fallback`.
    """
    if P.shape != (grid.patch_side**2, len(grid)):
        raise DimensionMismatchError(
            f"Patch matrix {P.shape} does not match the grid ({len(grid)} patches)"
        )
    total = accumulate_patches(P, grid, dims)
    cover = patch_cover_counts(grid, dims)
    covered = cover > 0
    out = np.zeros(dims)
    out[covered] = total[covered] / cover[covered]
    if not covered.all():
        if fallback is None:
            raise UncoveredPixelError(
                f"{int((~covered).sum())} pixels are not covered by any patch"
            )
        if fallback.dims != dims:
            raise DimensionMismatchError("Fallback image has the wrong size")
        out[~covered] = fallback.pixels[~covered]
    return GrayImage(out)


def dictionary_mosaic(D: DenseMatrix, patch_side: int, pad: int = 1) -> GrayImage:
    """Tile atoms on a ceil(√m)×ceil(√m) grid, each rescaled to [0, 255],
    separated by `pad` white pixels."""
    d, m = D.shape
    if d != patch_side * patch_side:
        raise DimensionMismatchError(
            f"Atoms of length {d} are not {patch_side}² patches"
        )
    per_row = int(np.ceil(np.sqrt(m)))
    cell = patch_side + pad
    side = per_row * cell + pad
    out = np.full((side, side), 255.0)
    for i in range(m):
        atom = D[:, i]
        lo, hi = atom.min(), atom.max()
        tile = (atom - lo) / (hi - lo) * 255.0 if hi > lo else np.zeros(d)
        r, c = divmod(i, per_row)
        out[
            pad + r * cell : pad + r * cell + patch_side,
            pad + c * cell : pad + c * cell + patch_side,
        ] = tile.reshape(patch_side, patch_side)
    return GrayImage(out)
