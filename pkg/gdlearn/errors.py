"""Errors raised by gdlearn.

Library code raises these; the CLI turns them into exit code 1.
"""


class GdlError(Exception):
    """Root of all gdlearn errors."""


class DimensionMismatchError(GdlError):
    pass


class InvalidParameterError(GdlError, ValueError):
    pass


class NonFiniteValueError(GdlError):
    pass


class ZeroColumnError(GdlError):
    def __init__(self, column: int) -> None:
        super().__init__(f"Column {column} has (numerically) zero norm")
        self.column = column


class NonUnitDictionaryError(GdlError):
    pass


class TooLargeError(GdlError):
    """Brute-force enumeration would exceed its cap."""


class ZeroMatrixError(GdlError):
    pass


class DegenerateDirectionError(GdlError):
    pass


class BudgetTooLargeError(GdlError):
    pass


class BudgetExceededError(GdlError):
    pass


class SingularGramError(GdlError):
    pass


class EmptyDictionaryError(GdlError):
    pass


class UncoveredPixelError(GdlError):
    pass


class ImageTooSmallError(GdlError):
    pass


class ParseError(GdlError):
    def __init__(self, message: str, line: int, column: int | None = None) -> None:
        where = f"line {line}" if column is None else f"line {line}, column {column}"
        super().__init__(f"{where}: {message}")
        self.line = line
        self.column = column


class UnsupportedFormatError(GdlError):
    pass


class OutOfRangeError(GdlError):
    pass
