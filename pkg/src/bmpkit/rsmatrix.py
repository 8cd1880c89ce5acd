"""Row-switching binary matrices stored as integer arrays.

A ``p x q`` row-switching matrix has exactly one 1 in every row.  It is
stored as a length-``p`` tuple ``m`` with 1-based column indices, so that
``M[i][j] == 1`` iff ``j == m[i]``.  Products, Kronecker products, direct
sums and concatenations all reduce to index arithmetic on these arrays.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import BmpError


@dataclass(frozen=True, slots=True)
class RowSwitchMatrix:
    rows: int
    cols: int
    m: tuple[int, ...]

    def __post_init__(self):
        if not isinstance(self.m, tuple):
            object.__setattr__(self, "m", tuple(self.m))
        if self.rows < 0 or self.cols < 0:
            raise BmpError(f"negative shape {self.rows}x{self.cols}")
        if len(self.m) != self.rows:
            raise BmpError(
                f"row-switching array has length {len(self.m)}, expected {self.rows}")
        for j in self.m:
            if not 1 <= j <= self.cols:
                raise BmpError(f"column index {j} outside 1..{self.cols}")

    @classmethod
    def identity(cls, n: int) -> RowSwitchMatrix:
        return cls(n, n, tuple(range(1, n + 1)))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def is_permutation(self) -> bool:
        return self.rows == self.cols and len(set(self.m)) == self.rows

    def __matmul__(self, other: RowSwitchMatrix) -> RowSwitchMatrix:
        return compose(self, other)


@dataclass(frozen=True, slots=True)
class PairMatrix:
    """Horizontal concatenation ``(A | B)`` of two row-switching blocks.

    Each row holds two ones, one per block; row ``i`` is stored as the
    ordered pair ``(a[i], b[i])``.
    """

    rows: int
    cols_left: int
    cols_right: int
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not isinstance(self.pairs, tuple):
            object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))
        if len(self.pairs) != self.rows:
            raise BmpError(f"pair array has length {len(self.pairs)}, expected {self.rows}")
        for a, b in self.pairs:
            if not (1 <= a <= self.cols_left and 1 <= b <= self.cols_right):
                raise BmpError(
                    f"pair ({a}, {b}) outside 1..{self.cols_left} x 1..{self.cols_right}")

    @property
    def left(self) -> RowSwitchMatrix:
        return RowSwitchMatrix(self.rows, self.cols_left, tuple(a for a, _ in self.pairs))

    @property
    def right(self) -> RowSwitchMatrix:
        return RowSwitchMatrix(self.rows, self.cols_right, tuple(b for _, b in self.pairs))


@dataclass(frozen=True, slots=True)
class SuDecomposition:
    """``A = S . U`` with ``S`` row-switching and ``U`` the distinct rows of ``A``."""

    switch: RowSwitchMatrix
    unique: tuple[Hashable, ...]


def compose(a: RowSwitchMatrix, b: RowSwitchMatrix) -> RowSwitchMatrix:
    """Matrix product ``a @ b``: ``c[i] = b[a[i]]``."""
    if a.cols != b.rows:
        raise BmpError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    bm = b.m
    return RowSwitchMatrix(a.rows, b.cols, tuple(bm[j - 1] for j in a.m))


def kron(a: RowSwitchMatrix, b: RowSwitchMatrix) -> RowSwitchMatrix:
    """Kronecker product ``a (x) b``.

    Row ``(i-1)*b.rows + k`` maps to column ``(a[i]-1)*b.cols + b[k]``.
    """
    s = b.cols
    m = tuple((ai - 1) * s + bk for ai in a.m for bk in b.m)
    return RowSwitchMatrix(a.rows * b.rows, a.cols * b.cols, m)


def direct_sum(a: RowSwitchMatrix, b: RowSwitchMatrix) -> RowSwitchMatrix:
    q = a.cols
    return RowSwitchMatrix(a.rows + b.rows, a.cols + b.cols,
                           a.m + tuple(q + j for j in b.m))


def vconcat(a: RowSwitchMatrix, b: RowSwitchMatrix) -> RowSwitchMatrix:
    if a.cols != b.cols:
        raise BmpError(f"vertical concatenation needs equal column counts, got {a.cols} and {b.cols}")
    return RowSwitchMatrix(a.rows + b.rows, a.cols, a.m + b.m)


def hconcat(a: RowSwitchMatrix, b: RowSwitchMatrix) -> PairMatrix:
    if a.rows != b.rows:
        raise BmpError(f"horizontal concatenation needs equal row counts, got {a.rows} and {b.rows}")
    return PairMatrix(a.rows, a.cols, b.cols, tuple(zip(a.m, b.m)))


def su_indices(items: Sequence[Hashable]) -> tuple[list[int], list[Hashable]]:
    """Bare switch/unique arrays for hot loops (no dataclass wrapping)."""
    table: dict = {}
    s = [table.setdefault(v, len(table) + 1) for v in items]
    return s, list(table)


def su_decompose(items: Sequence[Hashable] | RowSwitchMatrix | PairMatrix) -> SuDecomposition:
    """Split rows into a switch matrix and the distinct rows, first appearance first.

    ``items`` is an array of column indices or of index pairs; matrices are
    accepted and unwrapped.
    """
    if isinstance(items, RowSwitchMatrix):
        items = items.m
    elif isinstance(items, PairMatrix):
        items = items.pairs
    if len(items) == 0:
        raise BmpError("SU decomposition of an empty array")
    s, u = su_indices(items)
    return SuDecomposition(RowSwitchMatrix(len(s), len(u), tuple(s)), tuple(u))


def to_dense(x: RowSwitchMatrix | PairMatrix) -> np.ndarray:
    if isinstance(x, PairMatrix):
        out = np.zeros((x.rows, x.cols_left + x.cols_right), dtype=np.int64)
        for i, (a, b) in enumerate(x.pairs):
            out[i, a - 1] = 1
            out[i, x.cols_left + b - 1] = 1
        return out
    out = np.zeros((x.rows, x.cols), dtype=np.int64)
    if x.rows:
        out[np.arange(x.rows), np.asarray(x.m) - 1] = 1
    return out
