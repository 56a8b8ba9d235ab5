"""Universal bases when only some cells carry an upper bound.

Bounded cells get a slack variable in the partial Lawrence lifting; the basis
is read off that lifting's Graver basis.  Which degree-3 loops survive depends
on the bounded set and on the term order.

Run: python3 demos/02_partial_bounds.py
"""
from bounded_markov.lattice import TermOrder
from bounded_markov.repro import PARTIAL_BOUND_CASES, degree3_names, partial_bound_basis

for name, (cells, reference, _) in PARTIAL_BOUND_CASES.items():
    basis = partial_bound_basis(cells)
    print(f"{name:<15} bounded={list(cells)}  moves={len(basis):>2} (reference {reference})"
          f"  degree 3: {', '.join(degree3_names(basis)) or '-'}")

# %% A different term order gives a different reduced basis from the same
# Graver basis.  Here, pure lex:
lex = TermOrder("lex")
print("lex, (1,1) bounded:", len(partial_bound_basis((0,), lex)))
