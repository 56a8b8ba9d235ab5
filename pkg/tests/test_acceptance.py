"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` (add ``--slow`` for the 7x7 count),
or ``python tests/test_acceptance.py`` to print the lines directly.
"""
from __future__ import annotations

import time
from itertools import combinations

import numpy as np
import pytest

from bounded_markov.core import BoundsGrid, FiberSpec, Shape, quasi_independence_design, two_way_design
from bounded_markov.fiber import CONNECTED, DISCONNECTED, compositions, enumerate_fiber, verify_subbasis
from bounded_markov.lattice import LiftSpec, graver_basis, universal_markov_basis
from bounded_markov.moves import (basic_moves, circuit_moves, count_circuits, df1_loops,
                                  filter_structural_zeros)
from bounded_markov.repro import (BASIC_COUNTS, CIRCUIT_COUNTS, PARTIAL_BOUND_CASES,
                                  ZERO_FILTER_CASES, degree3_names, partial_bound_basis,
                                  qi6_zeros, repro_fraction)
from bounded_markov.sampler import (DEFAULT_SEED, ChainConfig, Hypergeometric, Uniform,
                                    chi_square_uniformity, run_chain, target_probabilities,
                                    transition_matrix)

RESULTS: dict[str, str] = {}


def record(key: str, title: str, ok: bool, detail: str, seconds: float, limit: float):
    in_time = seconds <= limit
    status = "PASS" if ok and in_time else "FAIL"
    line = f"criterion {key:<4} {status}  {title}: {detail} ({seconds:.1f}s, limit {limit:.0f}s)"
    RESULTS[key] = line
    print(line)
    assert ok, line
    assert in_time, line


def test_criterion_01_circuit_counts():
    t = time.perf_counter()
    got = {n: len(circuit_moves(Shape(n, n))) for n in range(2, 7)}
    want = {n: CIRCUIT_COUNTS[n] for n in range(2, 7)}
    record("1", "circuit counts I=2..6", got == want, f"got {list(got.values())}",
           time.perf_counter() - t, 60)


@pytest.mark.slow
def test_criterion_01_circuit_count_7x7():
    t = time.perf_counter()
    got = sum(count_circuits(Shape(7, 7)).values())
    record("1.7", "circuit count I=7", got == CIRCUIT_COUNTS[7],
           f"expected {CIRCUIT_COUNTS[7]}, got {got}", time.perf_counter() - t, 1800)


def test_criterion_02_basic_counts():
    t = time.perf_counter()
    got = {n: len(basic_moves(Shape(n, n))) for n in range(2, 8)}
    record("2", "basic move counts I=2..7", got == BASIC_COUNTS, f"got {list(got.values())}",
           time.perf_counter() - t, 1)


def test_criterion_03_zero_filtering():
    t = time.perf_counter()
    full = circuit_moves(Shape(4, 4))
    ok = True
    parts = []
    for name, (zeros, total, removed) in ZERO_FILTER_CASES.items():
        kept = filter_structural_zeros(full, zeros)
        before, after = full.by_support(), kept.by_support()
        got_removed = {d: before[d] - after.get(d, 0) for d in before}
        ok &= len(kept) == total and got_removed == removed
        parts.append(f"{name} {len(kept)} removed {'/'.join(map(str, got_removed.values()))}")
    record("3", "structural-zero filtering 4x4", ok, "; ".join(parts), time.perf_counter() - t, 10)


def test_criterion_04_partial_bounds():
    t = time.perf_counter()
    ok = True
    parts = []
    for name, (cells, size, names) in PARTIAL_BOUND_CASES.items():
        basis = partial_bound_basis(cells)
        got_names = degree3_names(basis)
        good = len(basis) == size and got_names == names
        ok &= good
        parts.append(f"{name} {len(basis)}/{size}" + ("" if good else f" {','.join(got_names) or '-'}"))
    record("4", "partial-bound bases 3x3", ok, "; ".join(parts), time.perf_counter() - t, 60)


def test_criterion_05_graver_equals_circuits():
    t = time.perf_counter()
    bad = []
    for I in range(2, 5):
        for J in range(2, 5):
            s = Shape(I, J)
            if graver_basis(two_way_design(s).entries, shape=s) != circuit_moves(s):
                bad.append(f"{I}x{J}")
    record("5", "Graver = circuits, 2<=I,J<=4", not bad, f"mismatches: {bad or 'none'}",
           time.perf_counter() - t, 300)


def test_criterion_06_incomplete_design_basis():
    t = time.perf_counter()
    checked = 0
    bad = []
    for n in (3, 4):
        s = Shape(n, n)
        full = circuit_moves(s)
        for k in range(0, 4):
            for zeros in combinations(range(s.size), k):
                direct = universal_markov_basis(
                    LiftSpec.all_bounded(quasi_independence_design(s, zeros), s))
                checked += 1
                if direct != filter_structural_zeros(full, zeros):
                    bad.append((n, zeros))
    record("6", "incomplete-design basis = filtered basis, |Z|<=3", not bad,
           f"{checked} patterns, {len(bad)} mismatches", time.perf_counter() - t, 600)


def test_criterion_07_fraction():
    t = time.perf_counter()
    rep = repro_fraction(margin_cap=8)
    detail = "; ".join(f"{c.name}: {c.status}" for c in rep.checks)
    record("7", "2x2x2 universal basis and fraction move", rep.ok and len(rep.checks) == 4,
           detail, time.perf_counter() - t, 120)


def test_criterion_08_quasi_independence_6x6():
    t = time.perf_counter()
    loops = df1_loops(Shape(6, 6), qi6_zeros())
    h = loops.by_support()
    ok = len(loops) == 23 and h == {4: 3, 6: 20}
    record("8", "6x6 df-1 loops", ok, f"{len(loops)} moves, by support {h}",
           time.perf_counter() - t, 60)


def test_criterion_09_basic_moves_positive_bounds():
    t = time.perf_counter()
    checked = 0
    witnesses = []
    for I in range(2, 5):
        for J in range(2, 5):
            s = Shape(I, J)
            v = verify_subbasis(two_way_design(s), basic_moves(s),
                                [BoundsGrid.uniform(s, b) for b in (1, 2, 3)], 8,
                                require_positive_margins=True)
            checked += v.fibers_checked - v.empty_fibers
            if v.status != CONNECTED:
                witnesses.append((I, J, v.status))
    record("9", "basic moves connect positively bounded fibers", not witnesses,
           f"{checked} nonempty fibers, witnesses: {witnesses or 'none'}",
           time.perf_counter() - t, 1800)


def test_criterion_10_diagonal_zeros():
    t = time.perf_counter()
    s3, s4 = Shape(3, 3), Shape(4, 4)
    v3 = verify_subbasis(two_way_design(s3), basic_moves(s3),
                         [BoundsGrid.with_zeros(s3, [(i, i) for i in range(3)])], 8,
                         require_positive_margins=True)
    derangements = {(0, 0, 1, 1, 0, 0, 0, 1, 0), (0, 1, 0, 0, 0, 1, 1, 0, 0)}
    ok3 = (v3.status == DISCONNECTED
           and {tab.counts for tab in v3.witness["tables"]} == derangements)
    v4 = verify_subbasis(two_way_design(s4), basic_moves(s4),
                         [BoundsGrid.with_zeros(s4, [(i, i) for i in range(4)])], 8,
                         require_positive_margins=True)
    ok4 = v4.status == CONNECTED
    record("10", "diagonal structural zeros", ok3 and ok4,
           f"3x3 {v3.status} (derangement witness {ok3}); 4x4 {v4.status} over "
           f"{v4.fibers_checked - v4.empty_fibers} fibers", time.perf_counter() - t, 600)


def small_fibers(max_states: int = 10):
    """Every two-way fiber with at most ``max_states`` tables from a fixed family."""
    for I, J in [(2, 2), (2, 3), (3, 2), (3, 3)]:
        s = Shape(I, J)
        bound_sets = [BoundsGrid.unbounded(s), BoundsGrid.uniform(s, 1), BoundsGrid.uniform(s, 2),
                      BoundsGrid.with_zeros(s, [(0, 0)]),
                      BoundsGrid.with_zeros(s, [(i, i) for i in range(min(I, J))], base=2)]
        for total in range(1, 5):
            for rows in compositions(total, I):
                for cols in compositions(total, J):
                    for b in bound_sets:
                        f = enumerate_fiber(FiberSpec.two_way(rows, cols, b))
                        if 1 <= len(f) <= max_states:
                            yield s, f


def test_criterion_11_sampler():
    t = time.perf_counter()
    worst = 0.0
    n_fibers = 0
    for s, f in small_fibers():
        moves = circuit_moves(s) if n_fibers % 2 else basic_moves(s)
        for target in (Uniform(), Hypergeometric()):
            P = transition_matrix(f, moves, target)
            pi = target_probabilities(f, target)
            worst = max(worst, float(np.abs(pi @ P - pi).max()))
        n_fibers += 1
    ok_a = worst <= 1e-12

    spec = FiberSpec.two_way((2, 1), (1, 1, 1))
    f3 = enumerate_fiber(spec)
    r = run_chain(spec, f3[0], basic_moves(spec.shape), Uniform(),
                  ChainConfig(DEFAULT_SEED, 100_000), check=True)
    chi = chi_square_uniformity(r.samples, f3)
    ok_b = len(f3) == 3 and chi.p_value > 0.01

    s = Shape(3, 3)
    closure = [r.visited_in_fiber]
    for seed, bounds, rows, cols in [(1, BoundsGrid.uniform(s, 2), (3, 2, 2), (2, 3, 2)),
                                     (2, BoundsGrid.with_zeros(s, [(0, 0), (1, 1)]), (2, 2, 3), (3, 2, 2)),
                                     (3, BoundsGrid.unbounded(s), (4, 1, 2), (2, 2, 3))]:
        fspec = FiberSpec.two_way(rows, cols, bounds)
        start = enumerate_fiber(fspec)[0]
        res = run_chain(fspec, start, circuit_moves(s), Hypergeometric(),
                        ChainConfig(seed, 20_000, 0, 1), check=True)
        closure.append(res.visited_in_fiber and all(fspec.contains(x) for x in res.samples))
    ok_c = all(closure)
    record("11", "sampler", ok_a and ok_b and ok_c,
           f"(a) {n_fibers} fibers, max |pi P - pi| = {worst:.1e}; (b) chi2 = {chi.statistic:.3f}, "
           f"p = {chi.p_value:.3f}; (c) closure {ok_c}", time.perf_counter() - t, 120)


if __name__ == "__main__":
    import sys

    slow = "--slow" in sys.argv
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for fn in tests:
        if fn.__name__.endswith("7x7") and not slow:
            print("criterion 1.7  SKIP  circuit count I=7: needs --slow")
            continue
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
