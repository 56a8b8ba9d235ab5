"""Fiber enumeration and connectivity of fibers under a move set.

Connectivity here is an exhaustive finite check: enumerate every table with
the given margins and bounds, join tables that differ by one move, count
components.  Verdicts over families of margins are only claimed up to the
margin-total cap that was searched.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .core import BoundsGrid, DesignMatrix, FiberSpec, Shape, Table, two_way_design
from .lattice import CapExceeded
from .moves import MoveSet, basic_moves

log = logging.getLogger(__name__)

DEFAULT_SIZE_CAP = 200_000
DEFAULT_MARGIN_CAP = 8

CONNECTED = "connected-up-to-cap"
DISCONNECTED = "disconnected"
INCONCLUSIVE = "inconclusive"


class FiberTooLarge(CapExceeded):
    def __init__(self, msg, count_so_far):
        super().__init__(msg)
        self.count_so_far = count_so_far


def cell_caps(spec: FiberSpec) -> np.ndarray:
    """Largest value each cell can take given the target and its bound."""
    A = spec.matrix.entries
    t = np.array(spec.target, dtype=np.int64)
    caps = np.empty(A.shape[1], dtype=np.int64)
    for h in range(A.shape[1]):
        col = A[:, h]
        rows = np.flatnonzero(col)
        b = spec.bounds.bounds[h]
        if rows.size == 0:
            if b is None:
                raise ValueError(f"cell {h} is unconstrained; the fiber is infinite")
            caps[h] = b
        else:
            m = int((t[rows] // col[rows]).min())
            caps[h] = m if b is None else min(m, b)
    return caps


@dataclass
class Fiber:
    """All tables of a fiber, one per row of ``tables``, in lexicographic order."""

    spec: FiberSpec
    tables: np.ndarray

    def __len__(self):
        return self.tables.shape[0]

    def __getitem__(self, i) -> Table:
        return Table(self.spec.shape, tuple(int(x) for x in self.tables[i]))

    def __iter__(self) -> Iterator[Table]:
        for i in range(len(self)):
            yield self[i]

    def index(self, table) -> int:
        counts = table.counts if isinstance(table, Table) else tuple(table)
        row = np.asarray(counts, dtype=np.int64)
        hits = np.flatnonzero((self.tables == row).all(axis=1))
        if hits.size == 0:
            raise KeyError("table is not in the fiber")
        return int(hits[0])


def enumerate_fiber(spec: FiberSpec, size_cap: int = DEFAULT_SIZE_CAP) -> Fiber:
    """Every nonnegative table in the fiber, by cell-wise expansion with pruning.

    A partial table is kept only while each residual margin is nonnegative and
    can still be filled by the remaining cells at their caps.  Raises
    :class:`FiberTooLarge` past ``size_cap`` tables.
    """
    A = spec.matrix.entries
    s, k = A.shape
    target = np.array(spec.target, dtype=np.int64)
    caps = cell_caps(spec)
    # capacity still available to each margin after cell h is fixed
    contrib = A * caps[None, :]
    tail = np.zeros((s, k + 1), dtype=np.int64)
    tail[:, :k] = np.cumsum(contrib[:, ::-1], axis=1)[:, ::-1]
    partial_cap = max(size_cap * 20, 1_000_000)

    states = np.zeros((1, k), dtype=np.int64)
    resid = target[None, :].copy()
    for h in range(k):
        col = A[:, h]
        new_states, new_resid = [], []
        for v in range(int(caps[h]) + 1):
            r = resid - v * col[None, :]
            ok = ((r >= 0) & (r <= tail[None, :, h + 1])).all(axis=1)
            if not ok.any():
                if (r < 0).any(axis=1).all():
                    break
                continue
            st = states[ok].copy()
            st[:, h] = v
            new_states.append(st)
            new_resid.append(r[ok])
        if not new_states:
            return Fiber(spec, np.zeros((0, k), dtype=np.int64))
        states = np.concatenate(new_states)
        resid = np.concatenate(new_resid)
        if len(states) > partial_cap:
            raise FiberTooLarge(f"fiber expansion exceeded {partial_cap} partial tables",
                                len(states))
    if len(states) > size_cap:
        raise FiberTooLarge(f"fiber has {len(states)} tables > cap {size_cap}", len(states))
    order = np.lexsort(states.T[::-1])
    return Fiber(spec, states[order])


@dataclass
class ConnectivityReport:
    component_count: int
    components: list
    labels: np.ndarray
    witness: Optional[tuple] = None

    @property
    def connected(self) -> bool:
        return self.component_count <= 1


class _Keys:
    """Lookup of table rows in a lexicographically sorted array."""

    def __init__(self, tables: np.ndarray, caps: np.ndarray):
        self.tables = tables
        k = tables.shape[1]
        base = int(caps.max()) + 1 if caps.size else 1
        self.radix = base ** k < 2 ** 62
        if self.radix:
            self.weights = np.array([base ** (k - 1 - h) for h in range(k)], dtype=np.int64)
            self.keys = tables @ self.weights
        else:
            self.index = {row.tobytes(): i for i, row in enumerate(tables)}

    def find(self, rows: np.ndarray) -> np.ndarray:
        """Indices of ``rows`` in the fiber, -1 where absent."""
        if self.radix:
            q = rows @ self.weights
            pos = np.searchsorted(self.keys, q)
            pos = np.minimum(pos, len(self.keys) - 1)
            return np.where(self.keys[pos] == q, pos, -1)
        return np.array([self.index.get(r.tobytes(), -1) for r in rows], dtype=np.int64)


def connectivity(fiber: Fiber, moves: MoveSet) -> ConnectivityReport:
    """Components of the fiber graph whose edges are single moves.

    Each table ``n`` is joined to ``n + m`` for every move ``m`` when that table
    is nonnegative and within bounds; ``n - m`` edges are the same edges seen
    from the other end.  A feasible neighbour missing from the fiber means the
    move is not in the kernel or the fiber is incomplete, and raises.
    """
    T = fiber.tables
    N, k = T.shape
    if N == 0:
        return ConnectivityReport(0, [], np.zeros(0, dtype=np.int64))
    M = moves.as_array()
    if M.shape[1] != k:
        raise ValueError("moves and fiber have different cell counts")
    if M.size and (fiber.spec.matrix.entries @ M.T).any():
        raise ValueError("some move is not in the kernel of the design matrix")
    caps = cell_caps(fiber.spec)
    keys = _Keys(T, caps)
    src, dst = [np.arange(N)], [np.arange(N)]
    for m in M:
        sup = np.flatnonzero(m)
        vals = T[:, sup] + m[sup]
        ok = (vals >= 0).all(axis=1) & (vals <= caps[sup]).all(axis=1)
        if not ok.any():
            continue
        nb = T[ok].copy()
        nb[:, sup] = vals[ok]
        idx = keys.find(nb)
        if (idx < 0).any():
            bad = nb[np.flatnonzero(idx < 0)[0]]
            raise ValueError(f"move {m.tolist()} leads outside the fiber to {bad.tolist()}")
        src.append(np.flatnonzero(ok))
        dst.append(idx)
    src, dst = np.concatenate(src), np.concatenate(dst)
    graph = coo_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(N, N)).tocsr()
    n_comp, raw = connected_components(graph, directed=False)
    # relabel components by their smallest member
    first = np.full(n_comp, N, dtype=np.int64)
    np.minimum.at(first, raw, np.arange(N))
    rank = np.argsort(np.argsort(first))
    labels = rank[raw]
    components = [np.flatnonzero(labels == c) for c in range(n_comp)]
    witness = None
    if n_comp > 1:
        witness = (fiber[0], fiber[int(components[1][0])])
    return ConnectivityReport(n_comp, components, labels, witness)


# ---------------------------------------------------------------------------
# margin families


def compositions(total: int, parts: int, minimum: int = 0) -> Iterator[tuple[int, ...]]:
    """Ordered ``parts``-tuples of integers >= ``minimum`` summing to ``total``."""
    free = total - parts * minimum
    if free < 0:
        return
    for bars in combinations(range(free + parts - 1), parts - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1 + minimum)
            prev = b
        out.append(free + parts - 1 - prev - 1 + minimum)
        yield tuple(out)


def two_way_margins(shape: Shape, total_cap: int, positive: bool) -> Iterator[tuple[int, ...]]:
    """(row sums, column sums) with equal totals, total <= cap."""
    lo = 1 if positive else 0
    start = max(shape.rows, shape.cols) if positive else 0
    for total in range(start, total_cap + 1):
        rows = list(compositions(total, shape.rows, lo))
        cols = list(compositions(total, shape.cols, lo))
        for r in rows:
            for c in cols:
                yield r + c


def realizable_margins(matrix: DesignMatrix, bounds: BoundsGrid, total_cap: int,
                       positive: bool) -> list[tuple[int, ...]]:
    """Distinct ``A n`` over tables within bounds with total <= cap (small k only)."""
    k = matrix.k
    caps = bounds.caps(total_cap)
    seen = set()
    for total in range(total_cap + 1):
        for n in compositions(total, k):
            if any(x > c for x, c in zip(n, caps)):
                continue
            t = tuple(int(x) for x in matrix.entries @ np.array(n))
            if positive and min(t) < 1:
                continue
            seen.add(t)
    return sorted(seen, key=lambda t: (sum(t), t))


def _is_two_way(matrix: DesignMatrix, shape: Shape) -> bool:
    return matrix.k == shape.size and matrix == two_way_design(shape)


@dataclass
class SubbasisVerdict:
    status: str
    fibers_checked: int = 0
    empty_fibers: int = 0
    largest_fiber: int = 0
    witness: Optional[dict] = None
    inconclusive: list = field(default_factory=list)

    @property
    def connected(self) -> bool:
        return self.status == CONNECTED


def verify_subbasis(matrix: DesignMatrix, moves: MoveSet, bounds_family: Iterable[BoundsGrid],
                    margin_total_cap: int = DEFAULT_MARGIN_CAP,
                    require_positive_margins: bool = False,
                    size_cap: int = DEFAULT_SIZE_CAP,
                    stop_at_first: bool = True) -> SubbasisVerdict:
    """Check that ``moves`` connects every fiber in a finite family.

    The family is every bounds grid in ``bounds_family`` crossed with every
    margin vector of total <= ``margin_total_cap`` (all row and column sums >= 1
    when ``require_positive_margins``).  Empty fibers count as vacuously
    connected; fibers over ``size_cap`` are listed as inconclusive, and make
    the verdict inconclusive unless a disconnection is found.
    """
    verdict = SubbasisVerdict(CONNECTED)
    for bounds in bounds_family:
        if _is_two_way(matrix, bounds.shape):
            targets: Iterable = two_way_margins(bounds.shape, margin_total_cap,
                                                require_positive_margins)
        else:
            targets = realizable_margins(matrix, bounds, margin_total_cap,
                                         require_positive_margins)
        for target in targets:
            spec = FiberSpec(matrix, target, bounds)
            try:
                fib = enumerate_fiber(spec, size_cap)
            except FiberTooLarge as exc:
                verdict.inconclusive.append({"target": list(target),
                                             "bounds": list(bounds.bounds),
                                             "count_so_far": exc.count_so_far})
                continue
            verdict.fibers_checked += 1
            if len(fib) == 0:
                verdict.empty_fibers += 1
                continue
            verdict.largest_fiber = max(verdict.largest_fiber, len(fib))
            if len(fib) == 1:
                continue
            rep = connectivity(fib, moves)
            if rep.component_count > 1:
                if verdict.witness is None:
                    verdict.status = DISCONNECTED
                    verdict.witness = {"spec": spec, "tables": rep.witness,
                                       "components": rep.component_count}
                if stop_at_first:
                    return verdict
    if verdict.status == CONNECTED and verdict.inconclusive:
        verdict.status = INCONCLUSIVE
    return verdict


# ---------------------------------------------------------------------------
# structural-zero patterns


def canonical_pattern(shape: Shape, zeros: Iterable) -> tuple[int, ...]:
    """Lexicographically least image of a zero set under row/column permutations."""
    cells = [shape.cell(h) for h in shape.flat(zeros)]
    J = shape.cols
    best = None
    for rp in permutations(range(shape.rows)):
        for cp in permutations(range(J)):
            img = tuple(sorted(rp[i] * J + cp[j] for i, j in cells))
            if best is None or img < best:
                best = img
    return best if best is not None else ()


def zero_patterns(shape: Shape, n_zeros: int) -> list[tuple[int, ...]]:
    """One representative per permutation class of ``n_zeros``-cell zero sets."""
    seen = set()
    out = []
    for z in combinations(range(shape.size), n_zeros):
        c = canonical_pattern(shape, z)
        if c not in seen:
            seen.add(c)
            out.append(c)
    return sorted(out)


def has_transversal(shape: Shape, zeros: Iterable, size: int = 3) -> bool:
    """Does the zero set contain ``size`` zeros in distinct rows and columns?"""
    cells = [shape.cell(h) for h in shape.flat(zeros)]
    for sub in combinations(cells, size):
        if len({i for i, _ in sub}) == size and len({j for _, j in sub}) == size:
            return True
    return False


@dataclass
class PatternVerdict:
    zeros: tuple
    status: str
    witness: Optional[dict] = None
    fibers_checked: int = 0
    empty_fibers: int = 0
    inconclusive: list = field(default_factory=list)
    full_zero_line: bool = False

    def cells(self, shape: Shape) -> list[tuple[int, int]]:
        return [shape.cell(h) for h in self.zeros]


def classify_pattern(shape: Shape, zeros: Iterable, margin_total_cap: int = DEFAULT_MARGIN_CAP,
                     cell_bounds: Sequence = (None,), moves: Optional[MoveSet] = None,
                     size_cap: int = DEFAULT_SIZE_CAP) -> PatternVerdict:
    """Do basic moves connect every positive-margin fiber with these zeros?"""
    z = tuple(sorted(shape.flat(zeros)))
    moves = basic_moves(shape) if moves is None else moves
    family = [BoundsGrid.with_zeros(shape, z, base=b) for b in cell_bounds]
    v = verify_subbasis(two_way_design(shape), moves, family, margin_total_cap,
                        require_positive_margins=True, size_cap=size_cap)
    rows, cols = family[0].full_zero_lines()
    return PatternVerdict(z, v.status, v.witness, v.fibers_checked, v.empty_fibers,
                          v.inconclusive, bool(rows or cols))


def pattern_search(shape: Shape, max_zero_cells: int, margin_total_cap: int = DEFAULT_MARGIN_CAP,
                   min_zero_cells: int = 1, cell_bounds: Sequence = (None,),
                   size_cap: int = DEFAULT_SIZE_CAP, threads: int = 1) -> list[PatternVerdict]:
    """Classify every zero pattern (up to row/column permutation) by size.

    Patterns are independent; with ``threads > 1`` they are classified
    concurrently and returned in enumeration order.
    """
    if shape.rows > 4 or shape.cols > 4:
        log.warning("pattern search on %dx%d may be slow", shape.rows, shape.cols)
    moves = basic_moves(shape)
    patterns = [z for n in range(min_zero_cells, max_zero_cells + 1)
                for z in zero_patterns(shape, n)]

    def one(z):
        return classify_pattern(shape, z, margin_total_cap, cell_bounds, moves, size_cap)

    if threads <= 1:
        return [one(z) for z in patterns]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, patterns))
