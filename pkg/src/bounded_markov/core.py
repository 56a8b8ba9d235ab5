"""Tables, cell bounds, design matrices and fiber specifications.

Cells of an ``I x J`` table are addressed either as 0-based ``(i, j)`` pairs
or by their flat row-major index ``i * J + j``.  A cell bound is ``None``
(unbounded) or a nonnegative integer; a bound of ``0`` marks a structural
zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

CellBound = Optional[int]


@dataclass(frozen=True)
class Shape:
    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"degenerate shape {self.rows}x{self.cols}")

    @property
    def size(self) -> int:
        return self.rows * self.cols

    def index(self, i: int, j: int) -> int:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"cell ({i}, {j}) outside {self.rows}x{self.cols}")
        return i * self.cols + j

    def cell(self, h: int) -> tuple[int, int]:
        return divmod(h, self.cols)

    def cells(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.rows) for j in range(self.cols)]

    def flat(self, cells: Iterable) -> frozenset[int]:
        """Flat indices of ``cells``, which may be pairs or flat ints."""
        out = set()
        for c in cells:
            if isinstance(c, (tuple, list)):
                out.add(self.index(*c))
            else:
                h = int(c)
                if not 0 <= h < self.size:
                    raise IndexError(f"cell index {h} out of range")
                out.add(h)
        return frozenset(out)


@dataclass(frozen=True)
class Table:
    shape: Shape
    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) != self.shape.size:
            raise ValueError(f"expected {self.shape.size} counts, got {len(counts)}")
        if any(c < 0 for c in counts):
            raise ValueError("table counts must be nonnegative")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "Table":
        rows = [list(r) for r in rows]
        if not rows or len({len(r) for r in rows}) != 1:
            raise ValueError("ragged or empty table")
        return cls(Shape(len(rows), len(rows[0])), tuple(x for r in rows for x in r))

    def to_array(self) -> np.ndarray:
        return np.array(self.counts, dtype=np.int64).reshape(self.shape.rows, self.shape.cols)

    def __getitem__(self, ij) -> int:
        return self.counts[self.shape.index(*ij)]

    @property
    def total(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class BoundsGrid:
    shape: Shape
    bounds: tuple[CellBound, ...]

    def __post_init__(self):
        bounds = tuple(None if b is None else int(b) for b in self.bounds)
        if len(bounds) != self.shape.size:
            raise ValueError(f"expected {self.shape.size} bounds, got {len(bounds)}")
        if any(b is not None and b < 0 for b in bounds):
            raise ValueError("bounds must be nonnegative")
        object.__setattr__(self, "bounds", bounds)

    @classmethod
    def unbounded(cls, shape: Shape) -> "BoundsGrid":
        return cls(shape, (None,) * shape.size)

    @classmethod
    def uniform(cls, shape: Shape, b: int) -> "BoundsGrid":
        return cls(shape, (b,) * shape.size)

    @classmethod
    def with_zeros(cls, shape: Shape, zeros: Iterable, base: CellBound = None) -> "BoundsGrid":
        """Every cell bounded by ``base`` except ``zeros``, which get bound 0."""
        z = shape.flat(zeros)
        return cls(shape, tuple(0 if h in z else base for h in range(shape.size)))

    @property
    def zeros(self) -> frozenset[int]:
        """Flat indices of the structural zeros."""
        return frozenset(h for h, b in enumerate(self.bounds) if b == 0)

    @property
    def bounded_cells(self) -> frozenset[int]:
        return frozenset(h for h, b in enumerate(self.bounds) if b is not None)

    def full_zero_lines(self) -> tuple[list[int], list[int]]:
        """Rows and columns made entirely of structural zeros."""
        I, J = self.shape.rows, self.shape.cols
        z = self.zeros
        rows = [i for i in range(I) if all(i * J + j in z for j in range(J))]
        cols = [j for j in range(J) if all(i * J + j in z for i in range(I))]
        return rows, cols

    def caps(self, fill: int) -> np.ndarray:
        """Bounds as an int array, with unbounded cells replaced by ``fill``."""
        return np.array([fill if b is None else b for b in self.bounds], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Nonnegative integer ``s x k`` matrix mapping a table to its statistics."""

    entries: np.ndarray
    labels: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.int64)
        if a.ndim != 2:
            raise ValueError("design matrix must be two-dimensional")
        if (a < 0).any():
            raise ValueError("design matrix entries must be nonnegative")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def s(self) -> int:
        return self.entries.shape[0]

    @property
    def k(self) -> int:
        return self.entries.shape[1]

    def __eq__(self, other):
        if not isinstance(other, DesignMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.entries.shape, self.entries.tobytes()))


def two_way_design(shape: Shape) -> DesignMatrix:
    """Row-sum and column-sum constraints of an ``I x J`` table."""
    I, J = shape.rows, shape.cols
    a = np.zeros((I + J, I * J), dtype=np.int64)
    for i in range(I):
        for j in range(J):
            a[i, i * J + j] = 1
            a[I + j, i * J + j] = 1
    return DesignMatrix(a)


def quasi_independence_design(shape: Shape, zeros: Iterable) -> DesignMatrix:
    """Two-way design with the columns of the structural zeros removed.

    Columns of the result follow the row-major order of the remaining cells;
    ``labels`` records their flat indices in the complete table.
    """
    z = shape.flat(zeros)
    if len(z) >= shape.size:
        raise ValueError("every cell is a structural zero")
    keep = tuple(h for h in range(shape.size) if h not in z)
    full = two_way_design(shape).entries
    return DesignMatrix(full[:, list(keep)], labels=keep)


def margins(table, matrix: DesignMatrix) -> np.ndarray:
    """``A @ n`` for a Table or a flat count vector."""
    counts = table.counts if isinstance(table, Table) else table
    n = np.asarray(counts, dtype=np.int64)
    if n.shape != (matrix.k,):
        raise ValueError(f"table has {n.size} cells, matrix expects {matrix.k}")
    return matrix.entries @ n


def satisfies_bounds(table: Table, bounds: BoundsGrid) -> bool:
    if table.shape != bounds.shape:
        raise ValueError("table and bounds shapes differ")
    return all(b is None or c <= b for c, b in zip(table.counts, bounds.bounds))


@dataclass(frozen=True)
class FiberSpec:
    """All nonnegative tables ``n`` with ``A n = target`` and ``n <= bounds``."""

    matrix: DesignMatrix
    target: tuple[int, ...]
    bounds: BoundsGrid

    def __post_init__(self):
        t = tuple(int(x) for x in self.target)
        if len(t) != self.matrix.s:
            raise ValueError(f"target has length {len(t)}, matrix has {self.matrix.s} rows")
        if any(x < 0 for x in t):
            raise ValueError("target margins must be nonnegative")
        if self.bounds.shape.size != self.matrix.k:
            raise ValueError("bounds grid does not match the matrix column count")
        object.__setattr__(self, "target", t)

    @property
    def shape(self) -> Shape:
        return self.bounds.shape

    @classmethod
    def from_table(cls, table: Table, matrix: DesignMatrix = None,
                   bounds: BoundsGrid = None) -> "FiberSpec":
        matrix = two_way_design(table.shape) if matrix is None else matrix
        bounds = BoundsGrid.unbounded(table.shape) if bounds is None else bounds
        return cls(matrix, tuple(margins(table, matrix)), bounds)

    @classmethod
    def two_way(cls, row_sums: Sequence[int], col_sums: Sequence[int],
                bounds: BoundsGrid = None) -> "FiberSpec":
        shape = Shape(len(row_sums), len(col_sums))
        bounds = BoundsGrid.unbounded(shape) if bounds is None else bounds
        return cls(two_way_design(shape), tuple(row_sums) + tuple(col_sums), bounds)

    def contains(self, table: Table) -> bool:
        return (tuple(margins(table, self.matrix)) == self.target
                and satisfies_bounds(table, self.bounds))
