"""Metropolis sampling over a fiber, checked against the exact distribution.

Run: python3 demos/04_sampling.py
"""
import numpy as np

from bounded_markov import (BoundsGrid, ChainConfig, FiberSpec, Hypergeometric, Shape, Table,
                            basic_moves, chi_square_uniformity, enumerate_fiber, run_chain,
                            transition_matrix)
from bounded_markov.sampler import target_probabilities

s = Shape(3, 3)
observed = Table.from_rows([[2, 1, 0], [0, 1, 1], [1, 0, 2]])
spec = FiberSpec.from_table(observed, bounds=BoundsGrid.uniform(s, 2))
fiber = enumerate_fiber(spec)
print("fiber size:", len(fiber))

# %% Exact check: the target is a fixed point of the one-step kernel.
P = transition_matrix(fiber, basic_moves(s), Hypergeometric())
pi = target_probabilities(fiber, Hypergeometric())
print("max |pi P - pi| =", np.abs(pi @ P - pi).max())

# %% Sample and compare counts with the exact target.  Pearson's test assumes
# independent draws, so thin well past the chain's relaxation time.
gap = 1 - np.sort(np.abs(np.linalg.eigvals(P)))[-2]
print(f"spectral gap {gap:.3f}")
run = run_chain(spec, observed, basic_moves(s), Hypergeometric(),
                ChainConfig(seed=7, steps=1_000_000, thin=100))
rep = chi_square_uniformity(run.samples, fiber, Hypergeometric())
print(f"acceptance {run.acceptance_rate:.3f}, chi2 {rep.statistic:.1f} on {rep.dof} dof, p = {rep.p_value:.3f}")
