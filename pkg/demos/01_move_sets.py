"""Move sets for two-way tables: how fast the bounded-case basis grows.

Run: python3 demos/01_move_sets.py
"""
from bounded_markov import (Shape, basic_moves, circuit_moves, count_circuits, df1_loops,
                            filter_structural_zeros)

# %% Unbounded tables need only the 2x2 minors; with every cell bounded we
# need one move per cycle of the complete bipartite graph.
for n in range(2, 7):
    s = Shape(n, n)
    print(f"{n}x{n}: basic {len(basic_moves(s)):>4}   circuits {sum(count_circuits(s).values()):>7}")

# %% A 4x4 circuit basis, split by how many cells each move touches.
full = circuit_moves(Shape(4, 4))
print("4x4 circuits by support size:", full.by_support())

# %% Structural zeros: moves through a zero cell are simply dropped.
diag = [(i, i) for i in range(4)]
kept = filter_structural_zeros(full, diag)
print("after zeroing the diagonal:", len(kept), kept.by_support())

# %% For quasi-independence, df-1 loops give a minimal basis.
print(df1_loops(Shape(3, 3), [(0, 0), (1, 1), (2, 2)])[0].to_array())
