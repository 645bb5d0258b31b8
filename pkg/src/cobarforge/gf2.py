"""Exact linear algebra over F2.

Vectors are Python ints used as bitsets: bit j set means coordinate j is 1.
Matrices store their columns as such bitsets (bit r of column c is entry (r, c)).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple


def bits(v: int) -> List[int]:
    """Indices of the set bits of v, ascending."""
    out = []
    while v:
        low = v & -v
        out.append(low.bit_length() - 1)
        v ^= low
    return out


def vec(indices: Iterable[int]) -> int:
    v = 0
    for i in indices:
        v ^= 1 << i
    return v


class Echelon:
    """Incrementally maintained echelon basis; pivots are the lowest set bit.

    Each stored row also carries a combination bitset recording which
    inserted vectors (by insertion order) it is the sum of.
    """

    def __init__(self) -> None:
        self.rows: Dict[int, Tuple[int, int]] = {}
        self.count = 0

    def reduce(self, v: int) -> Tuple[int, int]:
        """Residue of v and the combination of stored rows removed from it."""
        combo = 0
        out = 0
        while v:
            p = v & -v
            hit = self.rows.get(p)
            if hit is None:
                out |= p
                v ^= p
            else:
                v ^= hit[0]
                combo ^= hit[1]
        return out, combo

    def add(self, v: int) -> bool:
        """Insert v; True if it was independent of what is stored."""
        r, combo = self.reduce(v)
        combo ^= 1 << self.count
        self.count += 1
        if not r:
            return False
        self.rows[r & -r] = (r, combo)
        return True

    def contains(self, v: int) -> bool:
        return self.reduce(v)[0] == 0

    @property
    def rank(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class F2Matrix:
    nrows: int
    ncols: int
    cols: Tuple[int, ...]

    def __post_init__(self):
        if len(self.cols) != self.ncols:
            raise ValueError("column count mismatch")
        limit = 1 << self.nrows
        for c in self.cols:
            if c < 0 or c >= limit:
                raise ValueError("column has bits outside the row range")

    @classmethod
    def zero(cls, nrows: int, ncols: int) -> "F2Matrix":
        return cls(nrows, ncols, (0,) * ncols)

    @classmethod
    def identity(cls, n: int) -> "F2Matrix":
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], ncols: Optional[int] = None) -> "F2Matrix":
        nrows = len(rows)
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        cols = [0] * ncols
        for r, row in enumerate(rows):
            if len(row) != ncols:
                raise ValueError("ragged rows")
            for c, x in enumerate(row):
                if x & 1:
                    cols[c] |= 1 << r
        return cls(nrows, ncols, tuple(cols))

    @classmethod
    def from_columns(cls, nrows: int, cols: Sequence[int]) -> "F2Matrix":
        return cls(nrows, len(cols), tuple(cols))

    def entry(self, r: int, c: int) -> int:
        return (self.cols[c] >> r) & 1

    def to_rows(self) -> List[List[int]]:
        return [[self.entry(r, c) for c in range(self.ncols)] for r in range(self.nrows)]

    def apply(self, v: int) -> int:
        out = 0
        for c in bits(v):
            out ^= self.cols[c]
        return out

    def __matmul__(self, other: "F2Matrix") -> "F2Matrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}")
        return F2Matrix(self.nrows, other.ncols, tuple(self.apply(c) for c in other.cols))

    def __add__(self, other: "F2Matrix") -> "F2Matrix":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch in addition")
        return F2Matrix(self.nrows, self.ncols, tuple(a ^ b for a, b in zip(self.cols, other.cols)))

    def transpose(self) -> "F2Matrix":
        rows = [0] * self.nrows
        for c, col in enumerate(self.cols):
            for r in bits(col):
                rows[r] |= 1 << c
        return F2Matrix(self.ncols, self.nrows, tuple(rows))

    def is_zero(self) -> bool:
        return not any(self.cols)


def rank(m: F2Matrix) -> int:
    e = Echelon()
    for c in m.cols:
        e.add(c)
    return e.rank


def kernel_basis(m: F2Matrix) -> List[int]:
    """Basis of {x : m x = 0}, as column-index bitsets, in column order."""
    e = Echelon()
    out = []
    for j, c in enumerate(m.cols):
        r, combo = e.reduce(c)
        if r:
            e.rows[r & -r] = (r, combo ^ (1 << j))
        else:
            out.append(combo ^ (1 << j))
        e.count += 1
    return out


def image_basis(m: F2Matrix) -> List[int]:
    e = Echelon()
    return [c for c in m.cols if e.add(c)]


def solve(m: F2Matrix, b: int) -> Optional[int]:
    """Some x with m x = b, or None."""
    e = Echelon()
    for c in m.cols:
        e.add(c)
    r, combo = e.reduce(b)
    return None if r else combo


def homology_basis(d_out: F2Matrix, d_in: F2Matrix) -> Tuple[int, List[int]]:
    """dim and representatives of ker(d_out)/im(d_in).

    Representatives are picked from the kernel basis in column order,
    keeping those independent modulo the image.
    """
    if d_in.nrows != d_out.ncols:
        raise ValueError(f"shape mismatch: d_in lands in {d_in.nrows} dims, d_out starts from {d_out.ncols}")
    for j, c in enumerate(d_in.cols):
        if d_out.apply(c):
            raise ValueError(f"d_out∘d_in != 0: column {j} of d_in is not a cycle")
    e = Echelon()
    for c in d_in.cols:
        e.add(c)
    reps = [z for z in kernel_basis(d_out) if e.add(z)]
    return len(reps), reps


class GradedComplexF2:
    """Finite chain complex, differential of degree -1.

    diffs[n] maps degree n to degree n-1. Missing degrees have rank 0.
    """

    def __init__(self, labels: Dict[int, Sequence], diffs: Optional[Dict[int, F2Matrix]] = None):
        self.labels = {n: list(v) for n, v in sorted(labels.items())}
        self.lo = min(self.labels, default=0)
        self.hi = max(self.labels, default=-1)
        self.diffs: Dict[int, F2Matrix] = {}
        for n, m in (diffs or {}).items():
            if (m.nrows, m.ncols) != (self.dim(n - 1), self.dim(n)):
                raise ValueError(f"differential in degree {n} has shape {m.nrows}x{m.ncols}, "
                                 f"expected {self.dim(n - 1)}x{self.dim(n)}")
            self.diffs[n] = m
        for n in range(self.lo, self.hi + 1):
            dd = self.d(n - 1) @ self.d(n)
            for j, c in enumerate(dd.cols):
                if c:
                    raise ValueError(f"d∘d != 0 on degree {n} basis element {self.labels[n][j]!r}")

    def dim(self, n: int) -> int:
        return len(self.labels.get(n, ()))

    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    def d(self, n: int) -> F2Matrix:
        m = self.diffs.get(n)
        return m if m is not None else F2Matrix.zero(self.dim(n - 1), self.dim(n))

    def homology(self, n: int) -> Tuple[int, List[int]]:
        return homology_basis(self.d(n), self.d(n + 1))
