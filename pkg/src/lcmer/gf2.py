"""Dense GF(2) matrices stored as Python-int bit rows.

Bit ``j`` of ``rows[i]`` is the entry in row ``i``, column ``j``. All
arithmetic is modulo 2. Instances are immutable.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


class Gf2Matrix:
    """Binary matrix with row reduction over GF(2)."""

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows: int, ncols: int, rows: Iterable[int] = ()):
        rows = tuple(rows)
        if not rows:
            rows = (0,) * nrows
        if len(rows) != nrows:
            raise ValueError(f"expected {nrows} rows, got {len(rows)}")
        limit = 1 << ncols
        for r in rows:
            if r < 0 or r >= limit:
                raise ValueError("row has bits outside the column range")
        self.nrows = nrows
        self.ncols = ncols
        self.rows = rows

    @classmethod
    def from_array(cls, arr) -> "Gf2Matrix":
        a = np.asarray(arr, dtype=np.int64) % 2
        if a.ndim != 2:
            raise ValueError("expected a 2-d array")
        nrows, ncols = a.shape
        rows = []
        for i in range(nrows):
            r = 0
            for j in np.flatnonzero(a[i]):
                r |= 1 << int(j)
            rows.append(r)
        return cls(nrows, ncols, rows)

    @classmethod
    def identity(cls, n: int) -> "Gf2Matrix":
        return cls(n, n, [1 << i for i in range(n)])

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "Gf2Matrix":
        return cls(nrows, ncols, (0,) * nrows)

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.nrows, self.ncols), dtype=np.uint8)
        for i, r in enumerate(self.rows):
            j = 0
            while r:
                if r & 1:
                    out[i, j] = 1
                r >>= 1
                j += 1
        return out

    def __getitem__(self, idx: tuple[int, int]) -> int:
        i, j = idx
        return (self.rows[i] >> j) & 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Gf2Matrix):
            return NotImplemented
        return (self.nrows, self.ncols, self.rows) == (other.nrows, other.ncols, other.rows)

    def __hash__(self) -> int:
        return hash((self.nrows, self.ncols, self.rows))

    def __repr__(self) -> str:
        return f"Gf2Matrix({self.nrows}x{self.ncols}, rank={self.rank()})"

    def __add__(self, other: "Gf2Matrix") -> "Gf2Matrix":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch")
        return Gf2Matrix(self.nrows, self.ncols, [a ^ b for a, b in zip(self.rows, other.rows)])

    def __matmul__(self, other: "Gf2Matrix") -> "Gf2Matrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        out = []
        for r in self.rows:
            acc = 0
            k = 0
            while r:
                if r & 1:
                    acc ^= other.rows[k]
                r >>= 1
                k += 1
            out.append(acc)
        return Gf2Matrix(self.nrows, other.ncols, out)

    def transpose(self) -> "Gf2Matrix":
        cols = [0] * self.ncols
        for i, r in enumerate(self.rows):
            j = 0
            while r:
                if r & 1:
                    cols[j] |= 1 << i
                r >>= 1
                j += 1
        return Gf2Matrix(self.ncols, self.nrows, cols)

    T = property(transpose)

    def is_zero(self) -> bool:
        return not any(self.rows)

    def rref(self) -> tuple["Gf2Matrix", list[int]]:
        """Reduced row echelon form and the pivot column of each nonzero row.

        Pivots are chosen at the lowest available row index for each column,
        scanning columns left to right, so the result is deterministic.
        """
        rows = list(self.rows)
        pivots: list[int] = []
        r = 0
        for col in range(self.ncols):
            bit = 1 << col
            piv = next((i for i in range(r, len(rows)) if rows[i] & bit), None)
            if piv is None:
                continue
            rows[r], rows[piv] = rows[piv], rows[r]
            prow = rows[r]
            for i in range(len(rows)):
                if i != r and rows[i] & bit:
                    rows[i] ^= prow
            pivots.append(col)
            r += 1
            if r == len(rows):
                break
        return Gf2Matrix(self.nrows, self.ncols, rows), pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def nullspace(self) -> list[int]:
        """Basis of ``{x : self @ x = 0}`` as bit-vectors over the columns.

        One basis vector per free column, in increasing column order.
        """
        red, pivots = self.rref()
        pivot_set = set(pivots)
        basis = []
        for free in range(self.ncols):
            if free in pivot_set:
                continue
            v = 1 << free
            for row, pc in zip(red.rows, pivots):
                if (row >> free) & 1:
                    v |= 1 << pc
            basis.append(v)
        return basis

    def column_space_key(self) -> tuple[int, ...]:
        """Canonical form of the column span (rows of rref of the transpose)."""
        red, pivots = self.transpose().rref()
        return red.rows[: len(pivots)]


def bits_to_list(v: int, width: int) -> list[int]:
    return [(v >> i) & 1 for i in range(width)]


def list_to_bits(values: Sequence[int]) -> int:
    out = 0
    for i, b in enumerate(values):
        if b & 1:
            out |= 1 << i
    return out


def rank_of_rows(rows: Iterable[int]) -> int:
    """GF(2) rank of a list of bit-vectors."""
    basis: dict[int, int] = {}
    for v in rows:
        while v:
            top = v.bit_length() - 1
            if top in basis:
                v ^= basis[top]
            else:
                basis[top] = v
                break
    return len(basis)
