"""Do the basic moves connect a fiber?  Exhaustive checks on small tables.

Run: python3 demos/03_connectivity.py
"""
from bounded_markov import (BoundsGrid, FiberSpec, Shape, basic_moves, connectivity,
                            enumerate_fiber, pattern_search, two_way_design, verify_subbasis)

s = Shape(3, 3)

# %% Unit margins with the diagonal forced to zero: only the two cyclic
# derangements remain, and no 2x2 minor avoids the zeros.
spec = FiberSpec.two_way((1, 1, 1), (1, 1, 1), BoundsGrid.with_zeros(s, [(0, 0), (1, 1), (2, 2)]))
fiber = enumerate_fiber(spec)
report = connectivity(fiber, basic_moves(s))
print(len(fiber), "tables,", report.component_count, "components")
for t in report.witness:
    print(t.to_array())

# %% With positive bounds on every cell, basic moves suffice (checked here up
# to margin total 8).
v = verify_subbasis(two_way_design(s), basic_moves(s), [BoundsGrid.uniform(s, b) for b in (1, 2, 3)],
                    margin_total_cap=8, require_positive_margins=True)
print(v.status, "over", v.fibers_checked - v.empty_fibers, "nonempty fibers")

# %% Which zero patterns break basic moves?  Patterns are listed up to
# row/column permutation.
for p in pattern_search(s, 3, margin_total_cap=8):
    print(p.cells(s), p.status)
