"""Recompute reference counts and move lists and compare with embedded goldens.

Golden values are transcribed constants, never values recomputed here and
then trusted.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Optional

import numpy as np

from .core import BoundsGrid, DesignMatrix, Shape, two_way_design
from .fiber import CONNECTED, verify_subbasis
from .lattice import DEFAULT_TERM_ORDER, CapExceeded, LiftSpec, TermOrder, universal_markov_basis
from .moves import (MoveSet, basic_moves, canonical, circuit_moves, count_circuits, df1_loops,
                    filter_structural_zeros)

BASIC_COUNTS = {2: 1, 3: 9, 4: 36, 5: 100, 6: 225, 7: 441}
CIRCUIT_COUNTS = {2: 1, 3: 15, 4: 204, 5: 3940, 6: 113865, 7: 4027161}
CIRCUITS_4X4_BY_SUPPORT = {4: 36, 6: 96, 8: 72}

# cells (0-based) and removal breakdown by support size 4 / 6 / 8
ZERO_FILTER_CASES = {
    "cell-1-1": ([(0, 0)], 123, {4: 9, 6: 36, 8: 36}),
    "diagonal": ([(0, 0), (1, 1), (2, 2), (3, 3)], 28, {4: 30, 6: 80, 8: 66}),
}

DEGREE3_MOVES = {
    "m1": ((0, -1, 1), (-1, 1, 0), (1, 0, -1)),
    "m2": ((0, -1, 1), (1, 0, -1), (-1, 1, 0)),
    "m3": ((-1, 0, 1), (1, -1, 0), (0, 1, -1)),
    "m4": ((-1, 0, 1), (0, 1, -1), (1, -1, 0)),
    "m5": ((-1, 1, 0), (0, -1, 1), (1, 0, -1)),
    "m6": ((-1, 1, 0), (1, 0, -1), (0, -1, 1)),
}

# bounded cells (0-based flat indices in a 3x3 table), expected size, degree-3 survivors
PARTIAL_BOUND_CASES = {
    "all": (tuple(range(9)), 15, ("m1", "m2", "m3", "m4", "m5", "m6")),
    "cell-1-1": ((0,), 10, ("m2",)),
    "diagonal": ((0, 4, 8), 13, ("m1", "m2", "m4", "m6")),
    "block-diagonal": ((0, 4, 5, 7, 8), 12, ("m1", "m2", "m4")),
    "all-but-1-1": ((1, 2, 3, 4, 5, 6, 7, 8), 13, ("m3", "m4", "m5", "m6")),
}

QI6_PATTERN = (
    "0**00*",
    "*0**00",
    "**00*0",
    "00*0**",
    "*00*0*",
    "0*0**0",
)
QI6_EXPECTED = {"total": 23, "by_support": {4: 3, 6: 20}}

# the 2x2x2 cells in lexicographic order of their (+-1) labels
CUBE_CELLS = tuple(product((-1, 1), repeat=3))
FRACTION_CELLS = ((-1, -1, -1), (-1, -1, 1), (1, 1, -1), (1, 1, 1))
FRACTION_MOVE = "x[-1,-1,-1]x[1,1,1] - x[-1,-1,1]x[1,1,-1]"
CUBE_UNIVERSAL = """
-x[-1,1,-1]x[1,-1,1] + x[-1,-1,-1]x[1,1,1]
-x[-1,1,1]x[1,-1,-1] + x[-1,-1,-1]x[1,1,1]
-x[-1,1,-1]x[1,-1,-1] + x[-1,-1,-1]x[1,1,-1]
x[-1,1,1]x[1,1,-1] - x[-1,1,-1]x[1,1,1]
-x[-1,-1,1]x[-1,1,-1] + x[-1,-1,-1]x[-1,1,1]
-x[-1,1,1]x[1,-1,-1] + x[-1,-1,1]x[1,1,-1]
x[-1,1,1]x[1,-1,-1] - x[-1,1,-1]x[1,-1,1]
x[-1,-1,1]x[1,-1,-1] - x[-1,-1,-1]x[1,-1,1]
-x[1,-1,1]x[1,1,-1] + x[1,-1,-1]x[1,1,1]
-x[-1,1,1]x[1,-1,1] + x[-1,-1,1]x[1,1,1]
-x[-1,1,-1]x[1,-1,1] + x[-1,-1,1]x[1,1,-1]
-x[-1,-1,1]x[1,1,-1] + x[-1,-1,-1]x[1,1,1]
-x[-1,1,1]x[1,-1,1]x[1,1,-1] + x[-1,-1,-1]x[1,1,1]^2
-x[-1,-1,1]x[-1,1,-1]x[1,-1,-1] + x[-1,-1,-1]^2x[1,1,1]
x[-1,-1,1]x[1,1,-1]^2 - x[-1,1,-1]x[1,-1,-1]x[1,1,1]
x[-1,1,1]x[1,-1,-1]^2 - x[-1,-1,-1]x[1,-1,1]x[1,1,-1]
-x[-1,-1,-1]x[-1,1,1]x[1,-1,1] + x[-1,-1,1]^2x[1,1,-1]
x[-1,1,1]^2x[1,-1,-1] - x[-1,-1,1]x[-1,1,-1]x[1,1,1]
-x[-1,1,-1]^2x[1,-1,1] + x[-1,-1,-1]x[-1,1,1]x[1,1,-1]
-x[-1,1,-1]x[1,-1,1]^2 + x[-1,-1,1]x[1,-1,-1]x[1,1,1]
"""
FRACTION_MARGIN_CAP = 8

_TERM = re.compile(r"([+-]?)\s*((?:x\[[^\]]+\](?:\^\d+)?)+)")
_VAR = re.compile(r"x\[([^\]]+)\](?:\^(\d+))?")


def parse_binomial(text: str, cells: tuple) -> tuple[int, ...]:
    """Exponent difference of a binomial written as ``x[a,b,c]^e`` products."""
    index = {c: h for h, c in enumerate(cells)}
    v = [0] * len(cells)
    terms = _TERM.findall(text.replace(" ", ""))
    if len(terms) != 2:
        raise ValueError(f"not a binomial: {text!r}")
    for sign, mono in terms:
        s = -1 if sign == "-" else 1
        for label, exp in _VAR.findall(mono):
            cell = tuple(int(x) for x in label.split(","))
            v[index[cell]] += s * (int(exp) if exp else 1)
    return tuple(v)


def one_way_design(cells: tuple) -> DesignMatrix:
    """Counts at each level of each factor, for cells labelled by factor levels."""
    n_factors = len(cells[0])
    levels = [sorted({c[f] for c in cells}) for f in range(n_factors)]
    rows = []
    for f in range(n_factors):
        for lv in levels[f]:
            rows.append([1 if c[f] == lv else 0 for c in cells])
    return DesignMatrix(np.array(rows, dtype=np.int64))


def qi6_zeros() -> list[tuple[int, int]]:
    return [(i, j) for i, row in enumerate(QI6_PATTERN) for j, ch in enumerate(row) if ch == "0"]


@dataclass
class Check:
    name: str
    expected: object
    got: object
    status: str  # pass | fail | skip
    seconds: float = 0.0
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"


@dataclass
class ReproReport:
    name: str
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def add(self, name, expected, got, note="", seconds=0.0):
        status = "pass" if expected == got else "fail"
        self.checks.append(Check(name, expected, got, status, seconds, note))

    def skip(self, name, expected, note):
        self.checks.append(Check(name, expected, None, "skip", 0.0, note))


def _timed(fn: Callable):
    import time
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def repro_exind(slow: bool = False) -> ReproReport:
    rep = ReproReport("exind")
    for n, want in BASIC_COUNTS.items():
        got, dt = _timed(lambda: len(basic_moves(Shape(n, n))))
        rep.add(f"basic {n}x{n}", want, got, seconds=dt)
    for n, want in CIRCUIT_COUNTS.items():
        if n == 7 and not slow:
            rep.skip(f"circuits {n}x{n}", want, "needs --slow")
            continue
        got, dt = _timed(lambda: sum(count_circuits(Shape(n, n)).values()))
        rep.add(f"circuits {n}x{n}", want, got, seconds=dt)
    return rep


def repro_exind2() -> ReproReport:
    rep = ReproReport("exind2")
    shape = Shape(4, 4)
    full, dt = _timed(lambda: circuit_moves(shape))
    rep.add("4x4 circuits by support", CIRCUITS_4X4_BY_SUPPORT, full.by_support(), seconds=dt)
    for name, (zeros, total, removed) in ZERO_FILTER_CASES.items():
        kept = filter_structural_zeros(full, zeros)
        before, after = full.by_support(), kept.by_support()
        got_removed = {d: before[d] - after.get(d, 0) for d in before}
        rep.add(f"{name} total", total, len(kept))
        rep.add(f"{name} removed", removed, got_removed)
    return rep


def partial_bound_basis(bounded: tuple, order: Optional[TermOrder] = None) -> MoveSet:
    shape = Shape(3, 3)
    spec = LiftSpec(two_way_design(shape), frozenset(bounded), frozenset(), shape)
    return universal_markov_basis(spec, order=order)


def degree3_names(moves: MoveSet) -> tuple[str, ...]:
    lookup = {canonical([x for r in rows for x in r]): name for name, rows in DEGREE3_MOVES.items()}
    return tuple(sorted(lookup[m.vector] for m in moves if m.vector in lookup))


def repro_eg4(order: Optional[TermOrder] = None) -> ReproReport:
    order = DEFAULT_TERM_ORDER if order is None else order
    rep = ReproReport("eg4")
    for name, (bounded, size, names) in PARTIAL_BOUND_CASES.items():
        basis, dt = _timed(lambda: partial_bound_basis(bounded, order))
        rep.add(f"{name} size", size, len(basis), seconds=dt)
        rep.add(f"{name} degree-3 moves", names, degree3_names(basis))
    return rep


def repro_qi6x6() -> ReproReport:
    rep = ReproReport("qi6x6")
    loops, dt = _timed(lambda: df1_loops(Shape(6, 6), qi6_zeros()))
    rep.add("df1 loops", QI6_EXPECTED, {"total": len(loops), "by_support": loops.by_support()},
            seconds=dt)
    return rep


def fraction_design() -> DesignMatrix:
    return one_way_design(FRACTION_CELLS)


def repro_fraction(margin_cap: int = FRACTION_MARGIN_CAP) -> ReproReport:
    rep = ReproReport("fraction")
    cube = one_way_design(CUBE_CELLS)
    shape8 = Shape(1, len(CUBE_CELLS))
    universal, dt = _timed(lambda: universal_markov_basis(LiftSpec.all_bounded(cube, shape8)))
    printed = MoveSet(shape8, (parse_binomial(b, CUBE_CELLS)
                               for b in CUBE_UNIVERSAL.strip().splitlines()))
    rep.add("complete 2x2x2 universal size", 20, len(universal), seconds=dt)
    rep.add("complete 2x2x2 universal equals printed list", True, universal == printed)

    frac = fraction_design()
    shape4 = Shape(1, len(FRACTION_CELLS))
    single = MoveSet(shape4, [parse_binomial(FRACTION_MOVE, FRACTION_CELLS)])
    fbasis = universal_markov_basis(LiftSpec.all_bounded(frac, shape4))
    rep.add("fraction universal basis is the single move", True, fbasis == single)
    family = [BoundsGrid.unbounded(shape4)] + [BoundsGrid.uniform(shape4, b) for b in (1, 2, 3)]
    try:
        verdict, dt = _timed(lambda: verify_subbasis(frac, single, family, margin_cap))
        rep.add(f"single move connects all fibers, total <= {margin_cap}", CONNECTED,
                verdict.status, seconds=dt)
    except CapExceeded as exc:
        rep.skip("single move connects all fibers", CONNECTED, str(exc))
    return rep


REPRO = {
    "exind": repro_exind,
    "exind2": repro_exind2,
    "eg4": repro_eg4,
    "qi6x6": repro_qi6x6,
    "fraction": repro_fraction,
}
