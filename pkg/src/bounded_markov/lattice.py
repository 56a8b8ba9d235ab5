"""Integer kernels, Lawrence liftings, Graver bases and circuits.

Everything here is exact integer arithmetic.  Graver bases come from a
Pottier-style completion: start from a lattice basis of the kernel, add pairwise
sums, reduce each sum by sign-compatible subtraction, and stop at a fixpoint.
"""
from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass
from itertools import combinations
from math import comb, gcd
from typing import Iterable, Optional, Sequence

import numpy as np
from numba import njit

from .core import BoundsGrid, DesignMatrix, Shape
from .moves import Move, MoveSet, canonical, move_sort_key

log = logging.getLogger(__name__)

DEFAULT_NORM_CAP = 64
DEFAULT_SUBSET_LIMIT = 2_000_000


class CapExceeded(RuntimeError):
    """A resource cap was hit; the result would have been incomplete."""


def _as_int_rows(A) -> list[list[int]]:
    if isinstance(A, DesignMatrix):
        A = A.entries
    return [[int(x) for x in row] for row in np.asarray(A)]


def rank(A) -> int:
    """Exact rank via fraction-free elimination."""
    M = _as_int_rows(A)
    if not M:
        return 0
    rows, cols = len(M), len(M[0])
    r = 0
    prev = 1
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        for i in range(r + 1, rows):
            for j in range(c + 1, cols):
                M[i][j] = (M[r][c] * M[i][j] - M[i][c] * M[r][j]) // prev
            M[i][c] = 0
        prev = M[r][c]
        r += 1
        if r == rows:
            break
    return r


def _bareiss_det(M: list[list[int]]) -> int:
    M = [row[:] for row in M]
    n = len(M)
    sign, prev = 1, 1
    for c in range(n - 1):
        if M[c][c] == 0:
            piv = next((i for i in range(c + 1, n) if M[i][c]), None)
            if piv is None:
                return 0
            M[c], M[piv] = M[piv], M[c]
            sign = -sign
        for i in range(c + 1, n):
            for j in range(c + 1, n):
                M[i][j] = (M[c][c] * M[i][j] - M[i][c] * M[c][j]) // prev
        prev = M[c][c]
    return sign * M[n - 1][n - 1]


def _primitive(v: Sequence[int]) -> tuple[int, ...]:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return tuple(int(x) // g for x in v) if g > 1 else tuple(int(x) for x in v)


def kernel_basis(A, reduce: bool = True) -> list[tuple[int, ...]]:
    """Lattice basis of ``ker(A)`` over the integers.

    Unimodular column operations bring ``A`` to column echelon form; the
    transform's columns beyond the rank span the integer kernel.  With
    ``reduce`` the basis is LLL-reduced so completion starts from short vectors.
    """
    M = _as_int_rows(A)
    k = len(M[0]) if M else np.asarray(A).shape[1]
    U = [[int(i == j) for j in range(k)] for i in range(k)]  # columns transform with M

    def colop(a, b, p, q, r, s):
        # (col_a, col_b) <- (p*col_a + q*col_b, r*col_a + s*col_b)
        for row in M:
            x, y = row[a], row[b]
            row[a], row[b] = p * x + q * y, r * x + s * y
        for row in U:
            x, y = row[a], row[b]
            row[a], row[b] = p * x + q * y, r * x + s * y

    piv = 0
    for row in range(len(M)):
        if piv >= k:
            break
        for c in range(piv + 1, k):
            b = M[row][c]
            if b == 0:
                continue
            a = M[row][piv]
            if a == 0:
                colop(piv, c, 0, 1, 1, 0)
                continue
            g, x, y = _xgcd(a, b)
            # [x, -b/g; y, a/g] has determinant 1
            colop(piv, c, x, y, -b // g, a // g)
        if M[row][piv] != 0:
            piv += 1
    basis = [tuple(U[i][c] for i in range(k)) for c in range(piv, k)]
    if reduce and len(basis) > 1:
        from sympy import ZZ
        from sympy.polys.matrices import DomainMatrix

        dm = DomainMatrix([[ZZ(x) for x in v] for v in basis], (len(basis), k), ZZ)
        basis = [tuple(int(x) for x in row) for row in dm.lll().to_list()]
    return basis


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def lawrence_lift(A) -> np.ndarray:
    """Block matrix ``[[A, 0], [I, I]]``."""
    A = A.entries if isinstance(A, DesignMatrix) else np.asarray(A, dtype=np.int64)
    s, k = A.shape
    top = np.hstack([A, np.zeros((s, k), dtype=np.int64)])
    bottom = np.hstack([np.eye(k, dtype=np.int64), np.eye(k, dtype=np.int64)])
    return np.vstack([top, bottom])


@dataclass(frozen=True)
class LiftSpec:
    """Base design plus the set of cells that carry an upper bound.

    ``zeros`` are structural zeros; moves touching them are dropped from the
    universal basis.  ``shape`` is the table shape used for the returned moves
    (defaults to ``1 x k``); when ``matrix.labels`` maps columns to cells of a
    larger table, moves are embedded into that table.
    """

    matrix: DesignMatrix
    bounded_cells: frozenset = frozenset()
    zeros: frozenset = frozenset()
    shape: Optional[Shape] = None

    def __post_init__(self):
        k = self.matrix.k
        b = frozenset(int(h) for h in self.bounded_cells)
        if any(not 0 <= h < k for h in b):
            raise ValueError("bounded cell outside the matrix columns")
        object.__setattr__(self, "bounded_cells", b)
        object.__setattr__(self, "zeros", frozenset(int(h) for h in self.zeros))

    @classmethod
    def from_bounds(cls, matrix: DesignMatrix, bounds: BoundsGrid) -> "LiftSpec":
        return cls(matrix, bounds.bounded_cells, bounds.zeros, bounds.shape)

    @classmethod
    def all_bounded(cls, matrix: DesignMatrix, shape: Optional[Shape] = None) -> "LiftSpec":
        return cls(matrix, frozenset(range(matrix.k)), frozenset(), shape)

    @property
    def bounded_list(self) -> list[int]:
        return sorted(self.bounded_cells)


def partial_lawrence_lift(spec: LiftSpec) -> np.ndarray:
    """Lawrence lifting keeping identity rows (and slack columns) only for bounded cells."""
    A = spec.matrix.entries
    s, k = A.shape
    B = spec.bounded_list
    out = np.zeros((s + len(B), k + len(B)), dtype=np.int64)
    out[:s, :k] = A
    for t, h in enumerate(B):
        out[s + t, h] = 1
        out[s + t, k + t] = 1
    return out


def _conformal_mask(G: np.ndarray, absG: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rows g of G with g sign-compatible to v and |g| <= |v| componentwise."""
    return ((G * v >= 0) & (absG <= np.abs(v))).all(axis=1)


@njit(cache=True)
def _normal_form(v, G, norms, n):
    # repeatedly subtract the largest g with g conformally below v
    k = v.shape[0]
    while True:
        best = -1
        best_norm = -1
        for r in range(n):
            if norms[r] <= best_norm:
                continue
            ok = True
            for c in range(k):
                g = G[r, c]
                if g > 0:
                    if v[c] < g:
                        ok = False
                        break
                elif g < 0:
                    if v[c] > g:
                        ok = False
                        break
            if ok:
                best = r
                best_norm = norms[r]
        if best < 0:
            return v
        nonzero = False
        for c in range(k):
            v[c] -= G[best, c]
            if v[c] != 0:
                nonzero = True
        if not nonzero:
            return v


class _Completion:
    """Growing symmetric vector set with sign-compatible normal forms."""

    def __init__(self, k: int):
        self.k = k
        self.G = np.zeros((64, k), dtype=np.int64)
        self.norms = np.zeros(64, dtype=np.int64)
        self.n = 0

    def push(self, v: np.ndarray):
        if self.n + 2 > len(self.G):
            self.G = np.vstack([self.G, np.zeros_like(self.G)])
            self.norms = np.concatenate([self.norms, np.zeros_like(self.norms)])
        nrm = np.abs(v).sum()
        self.G[self.n], self.G[self.n + 1] = v, -v
        self.norms[self.n] = self.norms[self.n + 1] = nrm
        self.n += 2

    @property
    def reps(self) -> np.ndarray:
        return self.G[:self.n:2]

    def normal_form(self, v: np.ndarray) -> np.ndarray:
        return _normal_form(v.astype(np.int64).copy(), self.G, self.norms, self.n)


def graver_basis(A, norm_cap: int = DEFAULT_NORM_CAP, shape: Optional[Shape] = None) -> MoveSet:
    """Primitive kernel vectors that are minimal under sign-compatible domination.

    Raises :class:`CapExceeded` if a pending sum has 1-norm above ``norm_cap``.
    """
    A = A.entries if isinstance(A, DesignMatrix) else np.asarray(A, dtype=np.int64)
    k = A.shape[1]
    shape = Shape(1, k) if shape is None else shape
    comp = _Completion(k)
    heap: list = []
    counter = 0

    def add(v):
        # queue v + r and v - r for every earlier representative r, skipping
        # sign-compatible pairs (their sum reduces to zero)
        nonlocal counter
        t = comp.n // 2
        R = comp.reps
        if len(R):
            prod = R * v
            for sgn, clash in ((1, (prod < 0).any(axis=1)), (-1, (prod > 0).any(axis=1))):
                norms = np.abs(v + sgn * R).sum(axis=1)
                for u in np.flatnonzero(clash):
                    heapq.heappush(heap, (int(norms[u]), counter, t, int(u), sgn))
                    counter += 1
        comp.push(v)

    for b in kernel_basis(A):
        v = comp.normal_form(np.array(b, dtype=np.int64))
        if v.any():
            add(v)
    processed = 0
    while heap:
        nrm, _, t, u, sgn = heapq.heappop(heap)
        if nrm > norm_cap:
            raise CapExceeded(f"Graver completion needs 1-norm {nrm} > cap {norm_cap} "
                              f"({comp.n // 2} vectors so far)")
        G = comp.G
        v = comp.normal_form(G[2 * t] + sgn * G[2 * u])
        processed += 1
        if v.any():
            add(v)
    log.debug("graver completion: %d sums, %d vectors", processed, comp.n // 2)

    # keep only elements not dominated by another
    G = comp.G[:comp.n]
    absG = np.abs(G)
    out = []
    for v in comp.reps:
        if _conformal_mask(G, absG, v).sum() == 1:  # only v itself
            out.append(canonical(_primitive(v)))
    out.sort(key=move_sort_key)
    return MoveSet(shape, (Move(shape, v) for v in out))


def circuits_general(A, limit: int = DEFAULT_SUBSET_LIMIT,
                     shape: Optional[Shape] = None) -> MoveSet:
    """Support-minimal primitive kernel vectors, from (rank+1)-column minors."""
    A = A.entries if isinstance(A, DesignMatrix) else np.asarray(A, dtype=np.int64)
    k = A.shape[1]
    shape = Shape(1, k) if shape is None else shape
    r = rank(A)
    if r == k:
        return MoveSet(shape)
    # independent rows
    rows: list[int] = []
    for i in range(A.shape[0]):
        if rank(A[rows + [i]]) > len(rows):
            rows.append(i)
    M = _as_int_rows(A[rows])
    n_subsets = comb(k, r + 1)
    if n_subsets > limit:
        raise CapExceeded(f"{n_subsets} column subsets exceed the limit {limit}")
    found = set()
    for S in combinations(range(k), r + 1):
        v = [0] * k
        nz = False
        for t, c in enumerate(S):
            minor = [[M[i][cc] for cc in S if cc != c] for i in range(r)]
            d = _bareiss_det(minor) if r else 1
            if d:
                v[c] = d if t % 2 == 0 else -d
                nz = True
        if nz:
            found.add(canonical(_primitive(v)))
    out = sorted(found, key=move_sort_key)
    return MoveSet(shape, (Move(shape, v) for v in out))


@dataclass(frozen=True)
class TermOrder:
    """Monomial order on exponent vectors.

    ``kind`` is ``lex``, ``deglex`` or ``degrevlex``; variables rank in index
    order (index 0 largest).  Optional ``weights`` are compared first.
    """

    kind: str = "degrevlex"
    weights: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ("lex", "deglex", "degrevlex"):
            raise ValueError(f"unknown term order {self.kind!r}")

    def key(self, expo: Sequence[int]):
        expo = tuple(int(x) for x in expo)
        head = () if self.weights is None else (sum(w * e for w, e in zip(self.weights, expo)),)
        if self.kind == "lex":
            return head + expo
        if self.kind == "deglex":
            return head + (sum(expo),) + expo
        return head + (sum(expo),) + tuple(-x for x in reversed(expo))


def reduced_basis_from_graver(graver: Iterable[Sequence[int]], order: TermOrder) -> list[tuple]:
    """Reduced Gröbner basis of a toric ideal, picked out of its Graver basis.

    The Graver basis contains every reduced basis.  Leading terms of the
    reduced basis are the divisibility-minimal leading terms; each one's tail
    is the smallest monomial among Graver elements with that leading term.
    """
    oriented = []
    for v in graver:
        v = tuple(int(x) for x in v)
        a = tuple(max(x, 0) for x in v)
        b = tuple(max(-x, 0) for x in v)
        if order.key(a) < order.key(b):
            a, b = b, a
        oriented.append((a, b))
    lead = sorted({a for a, _ in oriented}, key=sum)
    arr = np.array(lead, dtype=np.int64).reshape(len(lead), -1)
    minimal = []
    for t, a in enumerate(lead):
        divs = (arr <= np.array(a)).all(axis=1)
        divs[t] = False
        if not divs.any():
            minimal.append(a)
    best: dict = {}
    for a, b in oriented:
        if a in best and order.key(best[a]) <= order.key(b):
            continue
        best[a] = b
    return [tuple(x - y for x, y in zip(a, best[a])) for a in minimal]


# variable order: table cells x_1..x_k in row-major order, then slack variables
DEFAULT_TERM_ORDER = TermOrder("degrevlex")


def universal_markov_basis(spec: LiftSpec, norm_cap: int = DEFAULT_NORM_CAP,
                           order: Optional[TermOrder] = None) -> MoveSet:
    """Markov basis valid for every choice of bounds on ``spec.bounded_cells``.

    The Graver basis of the partial Lawrence lifting is computed by
    completion.  With every cell bounded this is the whole answer.  Otherwise
    the reduced Gröbner basis under ``order`` is read off the Graver basis.
    Slack coordinates are then dropped and moves through structural zeros
    removed.  ``meta['pre_dedupe']`` counts moves before deduplication.
    """
    order = DEFAULT_TERM_ORDER if order is None else order
    A = spec.matrix
    k = A.k
    lifted = partial_lawrence_lift(spec)
    graver = graver_basis(lifted, norm_cap)
    vectors = [m.vector for m in graver]
    if len(spec.bounded_cells) < k:
        vectors = reduced_basis_from_graver(vectors, order)
    projected = [canonical(v[:k]) for v in vectors]

    labels = A.labels
    if spec.shape is not None and labels is not None and spec.shape.size != k:
        shape = spec.shape
        embedded = []
        for v in projected:
            w = [0] * shape.size
            for c, h in enumerate(labels):
                w[h] = v[c]
            embedded.append(tuple(w))
        projected = embedded
    else:
        shape = spec.shape if spec.shape is not None else Shape(1, k)
        if shape.size != k:
            raise ValueError("LiftSpec.shape does not match the matrix")

    zeros = spec.zeros
    kept = [v for v in projected if any(v) and not any(v[h] for h in zeros)]
    out = MoveSet(shape, sorted(set(kept), key=move_sort_key),
                  meta={"pre_dedupe": len(kept), "graver_size": len(graver)})
    return out
