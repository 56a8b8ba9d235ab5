"""Metropolis chain over a bounded fiber driven by a move set.

Each step picks a move uniformly, a sign uniformly, and accepts the proposal
when it stays nonnegative and within bounds and the target ratio beats a
uniform draw.

RNG contract: numpy's PCG64 bit generator, seeded through
``SeedSequence([seed, chain_index])``.  Both are specified algorithms, so a
given seed produces the same stream on every platform.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import lgamma, log
from typing import Callable, Optional

import numpy as np
from scipy.stats import chi2

from .core import FiberSpec, Table
from .fiber import Fiber, cell_caps
from .moves import MoveSet

DEFAULT_SEED = 20240101
DEFAULT_BURN_IN = 1000
DEFAULT_THIN = 10
_MASK64 = (1 << 64) - 1


class TargetDistribution:
    """Unnormalized target on a fiber, given by its log-weight."""

    name = "custom"

    def log_weight(self, counts) -> float:
        raise NotImplementedError

    def log_ratio(self, counts, support, new_values) -> float:
        """log w(new) - log w(old), where only ``support`` cells change."""
        new = list(counts)
        for h, v in zip(support, new_values):
            new[h] = v
        return self.log_weight(new) - self.log_weight(counts)


class Uniform(TargetDistribution):
    name = "uniform"

    def log_weight(self, counts) -> float:
        return 0.0

    def log_ratio(self, counts, support, new_values) -> float:
        return 0.0


class Hypergeometric(TargetDistribution):
    """Weight proportional to the product of ``1 / n_h!``."""

    name = "hypergeometric"

    def log_weight(self, counts) -> float:
        return -sum(lgamma(c + 1) for c in counts)

    def log_ratio(self, counts, support, new_values) -> float:
        return sum(lgamma(counts[h] + 1) - lgamma(v + 1) for h, v in zip(support, new_values))


class Custom(TargetDistribution):
    def __init__(self, log_weight: Callable[[Table], float], shape):
        self._fn = log_weight
        self.shape = shape

    def log_weight(self, counts) -> float:
        w = float(self._fn(Table(self.shape, tuple(counts))))
        if not np.isfinite(w):
            raise ValueError("custom log-weight must be finite on the fiber")
        return w


def target_by_name(name: str) -> TargetDistribution:
    try:
        return {"uniform": Uniform, "hypergeometric": Hypergeometric}[name]()
    except KeyError:
        raise ValueError(f"unknown target {name!r}") from None


@dataclass(frozen=True)
class ChainConfig:
    seed: int = DEFAULT_SEED
    steps: int = 10_000
    burn_in: int = DEFAULT_BURN_IN
    thin: int = DEFAULT_THIN

    def __post_init__(self):
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not self.steps > self.burn_in >= 0:
            raise ValueError("need steps > burn_in >= 0")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")

    def record_times(self) -> range:
        """Step counts after which the state is recorded."""
        return range(self.burn_in + 1, self.steps + 1, self.thin)


@dataclass
class ChainResult:
    samples: list
    acceptance_rate: float
    visited_in_fiber: bool
    seed: int
    chain_index: int = 0
    final: Optional[Table] = None


def make_rng(seed: int, chain_index: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed & _MASK64, chain_index])))


def _sparse(moves: MoveSet):
    return [(m.support, tuple(m.vector[h] for h in m.support)) for m in moves]


def _caps_list(bounds):
    if bounds is None:
        return None
    return [None if b is None else b for b in bounds.bounds]


def _fits(caps, h, v):
    return caps is None or caps[h] is None or v <= caps[h]


def ds_step(state: Table, moves: MoveSet, target: TargetDistribution,
            rng: np.random.Generator, bounds=None) -> Table:
    """One Metropolis step from ``state``; returns the new or unchanged table."""
    if len(moves) == 0:
        return state
    t = int(rng.integers(len(moves)))
    sign = 1 if rng.integers(2) == 0 else -1
    u = float(rng.random())
    m = moves[t]
    support = m.support
    delta = tuple(m.vector[h] for h in support)
    counts = list(state.counts)
    caps = _caps_list(bounds)
    new = []
    for h, d in zip(support, delta):
        v = counts[h] + sign * d
        if v < 0 or not _fits(caps, h, v):
            return state
        new.append(v)
    lr = target.log_ratio(counts, support, new)
    if not _accept(lr, u):
        return state
    for h, v in zip(support, new):
        counts[h] = v
    return Table(state.shape, tuple(counts))


def _accept(log_ratio: float, u: float) -> bool:
    if log_ratio >= 0:
        return u < 1.0
    return u > 0 and log_ratio > log(u)


def run_chain(spec: FiberSpec, start: Table, moves: MoveSet, target: TargetDistribution,
              config: ChainConfig, chain_index: int = 0, check: bool = False) -> ChainResult:
    """Run ``config.steps`` Metropolis steps from ``start``.

    The state after step ``t`` is recorded for ``t = burn_in + 1, burn_in + 1 +
    thin, ...`` up to ``steps``.  With ``check`` every accepted state has its
    margins and bounds re-verified; otherwise membership follows from the
    moves lying in the kernel, which is checked once up front.
    """
    if not spec.contains(start):
        raise ValueError("start table is not in the fiber")
    A = spec.matrix.entries
    M = moves.as_array()
    if M.size and (A @ M.T).any():
        raise ValueError("some move changes the margins")
    rng = make_rng(config.seed, chain_index)
    n_moves = len(moves)
    sparse = _sparse(moves)
    caps = _caps_list(spec.bounds)
    counts = list(start.counts)
    shape = start.shape
    samples = []
    accepted = 0
    in_fiber = True
    record = set(config.record_times())
    chunk = 65_536
    t = 0
    while t < config.steps:
        n = min(chunk, config.steps - t)
        # draw order per chunk: move indices, signs, uniforms
        idx = rng.integers(n_moves, size=n) if n_moves else np.zeros(n, dtype=np.int64)
        signs = rng.integers(2, size=n)
        us = rng.random(n)
        for r in range(n):
            t += 1
            if n_moves:
                support, delta = sparse[idx[r]]
                sign = 1 if signs[r] == 0 else -1
                new = []
                for h, d in zip(support, delta):
                    v = counts[h] + sign * d
                    if v < 0 or not _fits(caps, h, v):
                        new = None
                        break
                    new.append(v)
                if new is not None and _accept(target.log_ratio(counts, support, new), us[r]):
                    for h, v in zip(support, new):
                        counts[h] = v
                    accepted += 1
                    if check and not spec.contains(Table(shape, tuple(counts))):
                        in_fiber = False
            if t in record:
                samples.append(Table(shape, tuple(counts)))
    return ChainResult(samples, accepted / config.steps, in_fiber, config.seed, chain_index,
                       Table(shape, tuple(counts)))


def run_chains(spec: FiberSpec, start: Table, moves: MoveSet, target: TargetDistribution,
               config: ChainConfig, n_chains: int, threads: int = 1,
               check: bool = False) -> list[ChainResult]:
    """Independent chains with streams ``(seed, 0..n_chains-1)``, in chain order."""
    def one(c):
        return run_chain(spec, start, moves, target, config, c, check)

    if threads <= 1:
        return [one(c) for c in range(n_chains)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(n_chains)))


def target_probabilities(fiber: Fiber, target: TargetDistribution) -> np.ndarray:
    logw = np.array([target.log_weight(list(row)) for row in fiber.tables], dtype=float)
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


def transition_matrix(fiber: Fiber, moves: MoveSet, target: TargetDistribution) -> np.ndarray:
    """Exact one-step transition probabilities of the chain on ``fiber``."""
    N = len(fiber)
    P = np.zeros((N, N))
    if N == 0:
        return P
    if len(moves) == 0:
        return np.eye(N)
    caps = cell_caps(fiber.spec)
    lookup = {tuple(int(x) for x in row): i for i, row in enumerate(fiber.tables)}
    p_prop = 1.0 / (2 * len(moves))
    for i, row in enumerate(fiber.tables):
        counts = [int(x) for x in row]
        for m in moves:
            support = m.support
            for sign in (1, -1):
                new = [counts[h] + sign * m.vector[h] for h in support]
                if any(v < 0 or v > caps[h] for h, v in zip(support, new)):
                    continue
                nxt = list(counts)
                for h, v in zip(support, new):
                    nxt[h] = v
                j = lookup.get(tuple(nxt))
                if j is None:
                    raise ValueError("move leaves the fiber")
                ratio = min(1.0, float(np.exp(target.log_ratio(counts, support, new))))
                P[i, j] += p_prop * ratio
        P[i, i] += 1.0 - P[i].sum()
    return P


@dataclass
class ChiSquareReport:
    statistic: float
    p_value: float
    dof: int
    n: int
    observed: list
    expected: list


def chi_square_uniformity(samples, fiber: Fiber,
                          target: Optional[TargetDistribution] = None) -> ChiSquareReport:
    """Pearson goodness of fit of sample counts against the target on the fiber.

    The p-value treats samples as independent; thin chains accordingly.
    """
    if len(samples) == 0:
        raise ValueError("no samples")
    target = Uniform() if target is None else target
    lookup = {tuple(int(x) for x in row): i for i, row in enumerate(fiber.tables)}
    obs = np.zeros(len(fiber))
    for s in samples:
        key = s.counts if isinstance(s, Table) else tuple(int(x) for x in s)
        if key not in lookup:
            raise ValueError(f"sample {key} is not in the fiber")
        obs[lookup[key]] += 1
    exp = target_probabilities(fiber, target) * len(samples)
    stat = float(((obs - exp) ** 2 / exp).sum())
    dof = len(fiber) - 1
    p = 1.0 if dof == 0 else float(chi2.sf(stat, dof))
    return ChiSquareReport(stat, p, dof, len(samples), obs.astype(int).tolist(), exp.tolist())
