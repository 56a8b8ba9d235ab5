"""Markov moves for two-way tables: basic moves, loops, circuits, df-1 loops.

A move is an integer vector in the kernel of a design matrix.  Moves are kept
in canonical sign (first nonzero entry positive), so ``m`` and ``-m`` are the
same element of a :class:`MoveSet`.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .core import BoundsGrid, Shape, Table


def canonical(vec: Sequence[int]) -> tuple[int, ...]:
    """Sign-normalize so that the first nonzero entry is positive."""
    vec = tuple(int(x) for x in vec)
    for x in vec:
        if x:
            return vec if x > 0 else tuple(-y for y in vec)
    return vec


def move_sort_key(vec: Sequence[int]):
    support = tuple(h for h, x in enumerate(vec) if x)
    return (len(support), support, tuple(vec))


@dataclass(frozen=True)
class Move:
    shape: Shape
    vector: tuple[int, ...]

    def __post_init__(self):
        v = canonical(self.vector)
        if len(v) != self.shape.size:
            raise ValueError(f"move has {len(v)} entries, shape has {self.shape.size} cells")
        if not any(v):
            raise ValueError("zero vector is not a move")
        object.__setattr__(self, "vector", v)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "Move":
        return cls(Shape(len(rows), len(rows[0])), tuple(x for r in rows for x in r))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(h for h, x in enumerate(self.vector) if x)

    @property
    def deltas(self) -> dict[tuple[int, int], int]:
        """Sparse view: 0-based cell -> nonzero delta."""
        return {self.shape.cell(h): x for h, x in enumerate(self.vector) if x}

    @property
    def degree(self) -> int:
        return sum(x for x in self.vector if x > 0)

    def to_array(self) -> np.ndarray:
        return np.array(self.vector, dtype=np.int64).reshape(self.shape.rows, self.shape.cols)

    def __neg__(self):
        # canonical form is sign-free; negation is the same move
        return self

    def __len__(self):
        return len(self.support)


class MoveSet:
    """Ordered, duplicate-free collection of canonical moves of one shape."""

    def __init__(self, shape: Shape, moves: Iterable = (), meta: Optional[dict] = None):
        self.shape = shape
        self.meta = dict(meta or {})
        self._moves: list[Move] = []
        self._seen: set[tuple[int, ...]] = set()
        self.duplicates = 0
        for m in moves:
            self.add(m)

    def add(self, m) -> bool:
        if not isinstance(m, Move):
            m = Move(self.shape, tuple(m))
        elif m.shape != self.shape:
            raise ValueError("move shape does not match the set")
        if m.vector in self._seen:
            self.duplicates += 1
            return False
        self._seen.add(m.vector)
        self._moves.append(m)
        return True

    def sorted(self) -> "MoveSet":
        out = MoveSet(self.shape, sorted(self._moves, key=lambda m: move_sort_key(m.vector)),
                      self.meta)
        out.duplicates = self.duplicates
        return out

    def __iter__(self) -> Iterator[Move]:
        return iter(self._moves)

    def __len__(self):
        return len(self._moves)

    def __getitem__(self, i) -> Move:
        return self._moves[i]

    def __contains__(self, m) -> bool:
        vec = m.vector if isinstance(m, Move) else canonical(m)
        return vec in self._seen

    def vectors(self) -> frozenset[tuple[int, ...]]:
        return frozenset(self._seen)

    def __eq__(self, other):
        if not isinstance(other, MoveSet):
            return NotImplemented
        return self.shape == other.shape and self._seen == other._seen

    def __repr__(self):
        return f"MoveSet({self.shape.rows}x{self.shape.cols}, {len(self)} moves)"

    def as_array(self) -> np.ndarray:
        if not self._moves:
            return np.zeros((0, self.shape.size), dtype=np.int64)
        return np.array([m.vector for m in self._moves], dtype=np.int64)

    def by_support(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for m in self._moves:
            hist[len(m)] = hist.get(len(m), 0) + 1
        return dict(sorted(hist.items()))


def basic_moves(shape: Shape) -> MoveSet:
    """The ``+1 -1 / -1 +1`` move on every 2x2 minor."""
    I, J = shape.rows, shape.cols
    out = MoveSet(shape)
    for i1, i2 in combinations(range(I), 2):
        for j1, j2 in combinations(range(J), 2):
            v = [0] * shape.size
            v[i1 * J + j1] = v[i2 * J + j2] = 1
            v[i1 * J + j2] = v[i2 * J + j1] = -1
            out.add(v)
    return out


def loop_move(rows: Sequence[int], cols: Sequence[int], shape: Optional[Shape] = None) -> Move:
    """Degree-r loop: +1 at (i_t, j_t), -1 at (i_t, j_{t+1}) cyclically.

    Indices are 0-based.  ``shape`` defaults to the smallest table holding them.
    """
    rows, cols = list(rows), list(cols)
    r = len(rows)
    if r < 2 or len(cols) != r:
        raise ValueError("a loop needs r >= 2 row and column indices")
    if len(set(rows)) != r or len(set(cols)) != r:
        raise ValueError("loop indices must be pairwise distinct")
    if shape is None:
        shape = Shape(max(rows) + 1, max(cols) + 1)
    v = [0] * shape.size
    for t in range(r):
        v[shape.index(rows[t], cols[t])] += 1
        v[shape.index(rows[t], cols[(t + 1) % r])] -= 1
    return Move(shape, tuple(v))


def iter_cycles(shape: Shape, allowed: Optional[np.ndarray] = None,
                min_len: int = 2, max_len: Optional[int] = None) -> Iterator[tuple[list, list]]:
    """Cycles of the bipartite row/column graph, each exactly once.

    A cycle ``i1 j1 i2 j2 ... is js`` is reported as ``(rows, cols)``; ``i1`` is
    its smallest row and ``j1 < js`` fixes the direction.  ``allowed`` is an
    ``I x J`` boolean mask of usable cells (edges).
    """
    I, J = shape.rows, shape.cols
    if allowed is None:
        allowed = np.ones((I, J), dtype=bool)
    ok = [[bool(allowed[i, j]) for j in range(J)] for i in range(I)]
    max_len = min(I, J) if max_len is None else min(max_len, I, J)
    used_r = [False] * I
    used_c = [False] * J
    rows: list[int] = []
    cols: list[int] = []

    def extend(i1):
        # rows[-1] is the current row vertex; next pick a column
        s = len(rows)
        cur = rows[-1]
        for j in range(J):
            if used_c[j] or not ok[cur][j]:
                continue
            # closing column: edge back to i1, direction check j1 < js
            if s >= min_len and ok[i1][j] and cols[0] < j:
                yield rows, cols + [j]
            if s < max_len:
                used_c[j] = True
                cols.append(j)
                for i in range(i1 + 1, I):
                    if used_r[i] or not ok[i][j]:
                        continue
                    used_r[i] = True
                    rows.append(i)
                    yield from extend(i1)
                    rows.pop()
                    used_r[i] = False
                cols.pop()
                used_c[j] = False

    for i1 in range(I):
        used_r[i1] = True
        rows.append(i1)
        for j1 in range(J):
            if not ok[i1][j1]:
                continue
            used_c[j1] = True
            cols.append(j1)
            for i2 in range(i1 + 1, I):
                if not ok[i2][j1]:
                    continue
                used_r[i2] = True
                rows.append(i2)
                yield from extend(i1)
                rows.pop()
                used_r[i2] = False
            cols.pop()
            used_c[j1] = False
        rows.pop()
        used_r[i1] = False


def _cycle_vector(shape: Shape, rows, cols) -> tuple[int, ...]:
    # i1 j1 i2 j2 ... : (i_t, j_t) positive, (i_{t+1}, j_t) negative
    J = shape.cols
    v = [0] * shape.size
    s = len(rows)
    for t in range(s):
        v[rows[t] * J + cols[t]] = 1
        v[rows[(t + 1) % s] * J + cols[t]] = -1
    return canonical(v)


def iter_circuit_vectors(shape: Shape, allowed=None) -> Iterator[tuple[int, ...]]:
    for rows, cols in iter_cycles(shape, allowed):
        yield _cycle_vector(shape, rows, cols)


def count_circuits(shape: Shape, allowed=None) -> dict[int, int]:
    """Circuit counts keyed by support size, without building the moves."""
    hist: dict[int, int] = {}
    for rows, _ in iter_cycles(shape, allowed):
        n = 2 * len(rows)
        hist[n] = hist.get(n, 0) + 1
    return dict(sorted(hist.items()))


def circuit_moves(shape: Shape) -> MoveSet:
    """One move per cycle of the complete bipartite graph K_{I,J}."""
    if shape.rows < 2 or shape.cols < 2:
        return MoveSet(shape)
    out = MoveSet(shape)
    for v in iter_circuit_vectors(shape):
        out.add(Move(shape, v))
    return out.sorted()


def filter_structural_zeros(moves: MoveSet, zeros: Iterable) -> MoveSet:
    """Drop every move whose support touches a structural zero."""
    z = moves.shape.flat(zeros)
    return MoveSet(moves.shape, (m for m in moves if not z.intersection(m.support)),
                   moves.meta)


def _has_cycle_shorter(mask: np.ndarray, r: int) -> bool:
    """Brute force: is there a loop of degree < r inside ``mask``?"""
    I, J = mask.shape
    for d in range(2, r):
        for rs in combinations(range(I), d):
            for cs in combinations(range(J), d):
                sub = mask[np.ix_(rs, cs)]
                if sub.sum() < 2 * d:
                    continue
                # fix the image of the first row's successor chain: rows in order,
                # columns permuted; a d-cycle needs both sigma and its shift
                for perm in permutations(range(d)):
                    if all(sub[t, perm[t]] and sub[t, perm[(t + 1) % d]] for t in range(d)):
                        return True
    return False


def df1_loops(shape: Shape, zeros: Iterable = ()) -> MoveSet:
    """Loops avoiding ``zeros`` whose spanning rectangle holds no smaller loop."""
    I, J = shape.rows, shape.cols
    z = shape.flat(zeros)
    allowed = np.ones((I, J), dtype=bool)
    for h in z:
        allowed[shape.cell(h)] = False
    out = MoveSet(shape)
    for rows, cols in iter_cycles(shape, allowed):
        r = len(rows)
        rect = allowed[np.ix_(sorted(rows), sorted(cols))]
        if r > 2 and _has_cycle_shorter(rect, r):
            continue
        out.add(Move(shape, _cycle_vector(shape, rows, cols)))
    out = out.sorted()
    full_rows, full_cols = BoundsGrid.with_zeros(shape, z).full_zero_lines()
    if full_rows or full_cols:
        out.meta["full_zero_rows"] = full_rows
        out.meta["full_zero_cols"] = full_cols
    return out


def apply_move(table: Table, move: Move, sign: int, bounds: Optional[BoundsGrid] = None):
    """``table + sign * move`` if it stays nonnegative and within bounds, else None."""
    if table.shape.size != move.shape.size:
        raise ValueError("table and move shapes differ")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    bvals = bounds.bounds if bounds is not None else None
    new = list(table.counts)
    for h, x in enumerate(move.vector):
        if x:
            c = new[h] + sign * x
            if c < 0:
                return None
            if bvals is not None and bvals[h] is not None and c > bvals[h]:
                return None
            new[h] = c
    return Table(table.shape, tuple(new))
