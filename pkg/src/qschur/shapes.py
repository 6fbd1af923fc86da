"""Zero patterns of reduced edge matrices.

Square matrices are upper triangular, or quasi-upper triangular on the one
cycle edge that carries the 2x2 blocks in the real field.  Rectangular ones
come in four trapezoidal shapes::

    tall_a  [U; 0]   zeros below the main diagonal
    wide_d  [U | *]  zeros below the main diagonal
    wide_b  [0 | U]  zeros below the diagonal ending in the bottom-right corner
    tall_c  [* ; U]  zeros below the diagonal ending in the bottom-right corner

``a``/``d`` are what a QR factorization produces and ``b``/``c`` what an RQ
factorization produces.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class Shape(str, Enum):
    SQUARE_UPPER = "square_upper"
    SQUARE_QUASI_UPPER = "square_quasi_upper"
    TALL_A = "tall_a"
    WIDE_B = "wide_b"
    TALL_C = "tall_c"
    WIDE_D = "wide_d"


_QR_FAMILY = {Shape.SQUARE_UPPER, Shape.SQUARE_QUASI_UPPER, Shape.TALL_A, Shape.WIDE_D}


@dataclass(frozen=True)
class ShapeClass:
    """A shape tag plus whether 2x2 diagonal blocks are allowed.

    ``quasi`` is implied by ``square_quasi_upper``; it may also be set on a
    rectangular ``tall_a``/``wide_d`` cycle edge whose square core carries
    the 2x2 blocks.
    """

    tag: Shape
    quasi: bool = False

    def __post_init__(self):
        object.__setattr__(self, "tag", Shape(self.tag))
        if self.tag is Shape.SQUARE_QUASI_UPPER:
            object.__setattr__(self, "quasi", True)
        elif self.quasi and self.tag is Shape.SQUARE_UPPER:
            object.__setattr__(self, "tag", Shape.SQUARE_QUASI_UPPER)

    def __str__(self) -> str:
        if self.quasi and self.tag is not Shape.SQUARE_QUASI_UPPER:
            return f"{self.tag.value}+quasi"
        return self.tag.value

    @classmethod
    def parse(cls, text: str) -> "ShapeClass":
        tag, _, extra = text.partition("+")
        if extra not in ("", "quasi"):
            raise ValueError(f"unknown shape class {text!r}")
        return cls(Shape(tag), extra == "quasi")

    def offset(self, rows: int, cols: int) -> int:
        """Entries with ``i - j > offset`` must vanish."""
        return 0 if self.tag in _QR_FAMILY else rows - cols

    def admits(self, rows: int, cols: int) -> bool:
        """Whether the tag is consistent with a ``rows x cols`` matrix."""
        if self.tag in (Shape.SQUARE_UPPER, Shape.SQUARE_QUASI_UPPER):
            return rows == cols
        if self.tag in (Shape.TALL_A, Shape.TALL_C):
            return rows > cols
        return cols > rows

    def zero_mask(self, rows: int, cols: int) -> np.ndarray:
        """Entries forced to zero, ignoring the 2x2-block subdiagonal."""
        i, j = np.indices((rows, cols))
        off = self.offset(rows, cols)
        return i - j > (off + 1 if self.quasi else off)

    def subdiagonal(self, rows: int, cols: int) -> list[tuple[int, int]]:
        """Positions that may hold a 2x2-block subdiagonal entry (empty unless quasi)."""
        if not self.quasi:
            return []
        off = self.offset(rows, cols)
        return [(j + 1 + off, j) for j in range(cols) if 0 <= j + 1 + off < rows and j + 1 < cols]


def shape_for(rows: int, cols: int, family: str, quasi: bool = False) -> ShapeClass:
    """Pick the shape of a ``rows x cols`` matrix in the ``"qr"`` or ``"rq"`` family."""
    if rows == cols:
        return ShapeClass(Shape.SQUARE_QUASI_UPPER if quasi else Shape.SQUARE_UPPER)
    if family == "qr":
        return ShapeClass(Shape.TALL_A if rows > cols else Shape.WIDE_D, quasi)
    return ShapeClass(Shape.TALL_C if rows > cols else Shape.WIDE_B, quasi)
