"""File formats: matrices and tables as CSV, images as PGM through Pillow.

Matrix CSV: an optional header row (`c0,c1,...`, written by `store_matrix_csv`)
followed by one matrix row per line, floats written with 17 significant digits
so that reading them back is exact.
"""

import csv
import logging
import re
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from gdlearn.errors import (
    DimensionMismatchError,
    OutOfRangeError,
    ParseError,
    UnsupportedFormatError,
)
from gdlearn.model import DenseMatrix, GrayImage, RunHistory, SparseCoeffMatrix

_logger = logging.getLogger(__name__)

HISTORY_HEADER = (
    "iteration",
    "objective",
    "objective_after_coding",
    "nnz",
    "re",
    "dr",
)
COEFFICIENTS_HEADER = ("row", "col", "value")


def fmt_float(value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.17g}"


def store_matrix_csv(M: DenseMatrix, path: str | Path) -> None:
    with Path(path).open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow([f"c{j}" for j in range(M.shape[1])])
        writer.writerows([fmt_float(v) for v in row] for row in M)
    _logger.info("Saved %d×%d matrix to '%s'", *M.shape, path)


def load_matrix_csv(path: str | Path) -> DenseMatrix:
    rows = list[list[float]]()
    with Path(path).open(newline="") as f:
        for line_nr, fields in enumerate(csv.reader(f), start=1):
            if not fields:
                continue
            if line_nr == 1 and _is_header(fields):
                continue
            rows.append(
                [_parse_float(v, line_nr, col) for col, v in enumerate(fields, 1)]
            )
            if len(rows[-1]) != len(rows[0]):
                raise ParseError(
                    f"expected {len(rows[0])} fields, got {len(rows[-1])}",
                    line_nr,
                )
    if not rows:
        raise ParseError("no matrix rows", 1)
    return np.array(rows, dtype=np.float64)


def _is_header(fields: Sequence[str]) -> bool:
    def is_float(v: str) -> bool:
        try:
            float(v)
        except ValueError:
            return False
        return True

    return not any(is_float(v) for v in fields)


def _parse_float(raw: str, line: int, column: int) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ParseError(f"not a number: '{raw}'", line, column) from None
    if not np.isfinite(value):
        raise ParseError(f"non-finite value: '{raw}'", line, column)
    return value


def store_coefficients_csv(A: SparseCoeffMatrix, path: str | Path) -> None:
    """Sparse triplets `row,col,value`, column-major."""
    with Path(path).open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(COEFFICIENTS_HEADER)
        writer.writerows((r, c, fmt_float(v)) for r, c, v in A.triplets())
    _logger.info("Saved %d coefficients to '%s'", A.nnz, path)


def load_coefficients_csv(
    path: str | Path, shape: tuple[int, int], budget: int | None = None
) -> SparseCoeffMatrix:
    rows, cols, values = list[int](), list[int](), list[float]()
    with Path(path).open(newline="") as f:
        reader = csv.reader(f)
        for line_nr, fields in enumerate(reader, start=1):
            if line_nr == 1 and _is_header(fields):
                continue
            if len(fields) != 3:
                raise ParseError(f"expected 3 fields, got {len(fields)}", line_nr)
            try:
                rows.append(int(fields[0]))
                cols.append(int(fields[1]))
            except ValueError:
                raise ParseError("indices must be integers", line_nr) from None
            values.append(_parse_float(fields[2], line_nr, 3))
    return SparseCoeffMatrix.from_triplets(
        shape, rows, cols, values, len(values) if budget is None else budget
    )


def store_history_csv(history: RunHistory, path: str | Path) -> None:
    with Path(path).open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(HISTORY_HEADER)
        writer.writerows(
            (
                r.iteration,
                fmt_float(r.objective),
                fmt_float(r.objective_after_coding),
                r.nnz,
                fmt_float(r.re),
                fmt_float(r.dr),
            )
            for r in history.records
        )
    _logger.info("Saved %d history rows to '%s'", len(history), path)


def store_table_csv(
    header: Sequence[str], rows: Iterable[Sequence[object]], path: str | Path
) -> None:
    """A CSV table; floats are written with `fmt_float`."""
    with Path(path).open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise DimensionMismatchError("Row length does not match the header")
            writer.writerow(fmt_float(v) if isinstance(v, float) else v for v in row)
    _logger.info("Saved '%s'", path)


_PGM_HEADER = re.compile(
    rb"(P\d)(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)\s"
)
_PGM_HEADER_BYTES = 1024


def load_pgm(path: str | Path) -> GrayImage:
    """Binary (P5) or plain (P2) PGM with maxval 255."""
    path = Path(path)
    with path.open("rb") as fh:
        _check_pgm_header(fh.read(_PGM_HEADER_BYTES), path)
    try:
        with Image.open(path, formats=["PPM"]) as im:
            if im.mode != "L":
                raise UnsupportedFormatError(f"'{path}': {im.mode} is not 8-bit gray")
            pixels = np.asarray(im, dtype=np.float64)
    except (UnidentifiedImageError, OSError, ValueError) as e:
        raise UnsupportedFormatError(f"'{path}': {e}") from None
    return GrayImage(pixels)


def _check_pgm_header(head: bytes, path: Path) -> None:
    found = _PGM_HEADER.match(head)
    if found is None:
        raise UnsupportedFormatError(f"'{path}': not a PGM file")
    if found.group(1) not in (b"P5", b"P2"):
        raise UnsupportedFormatError(
            f"'{path}': not a PGM file (magic {found.group(1)!r})"
        )
    if (maxval := int(found.group(4))) != 255:
        line = head.count(b"\n", 0, found.start(4)) + 1
        raise ParseError(f"'{path}': maxval {maxval} is not supported", line)


def store_pgm(
    img: GrayImage,
    path: str | Path,
    clip_and_round: bool = False,
    plain: bool = False,
) -> None:
    """Write a P5 (or, with `plain`, P2) PGM.

    Without `clip_and_round` every value must already lie in [0, 255].
    Values are rounded half up.
    """
    pixels = img.pixels
    if clip_and_round:
        pixels = np.clip(pixels, 0.0, 255.0)
    elif pixels.size and (pixels.min() < 0 or pixels.max() > 255):
        raise OutOfRangeError(
            f"Pixel values span [{pixels.min():g}, {pixels.max():g}], outside [0, 255]"
        )
    quantized = np.minimum(np.floor(pixels + 0.5), 255.0).astype(np.uint8)

    if plain:
        # Pillow only writes the binary variant.
        header = f"P2\n{img.width} {img.height}\n255"
        np.savetxt(path, quantized, fmt="%d", header=header, comments="")
    else:
        Image.fromarray(quantized).save(path, format="PPM")
    _logger.info("Saved %d×%d image to '%s'", img.height, img.width, path)
