"""Seeded Monte Carlo estimators of chi-squared information.

The outer expectation over observations is sampled; the inner posterior
mean ``E[X_u X_v | Y]`` is computed exactly for every sampled ``Y``. On
forests the inner mean comes from the tree recursion, elsewhere from
enumeration over gauge-fixed inputs.

Samples are split into ``workers`` contiguous blocks; block ``b`` draws from
``SeedSequence(seed, spawn_key=(stream, b))`` and block statistics are merged
in block order, so results depend only on ``(samples, seed, workers)``.
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _kernels
from .budget import Budget, BudgetError, get_budget
from .exact import InfoResult, SyncModel, augment_with_virtual_vertex, edge_products, gauge_configs

INFO_STREAM = 0
PERC_STREAM = 1

_BATCH = 2048


@dataclass(frozen=True)
class McConfig:
    samples: int = 100_000
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class RunningStats:
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def of(cls, values: np.ndarray) -> "RunningStats":
        if values.size == 0:
            return cls()
        mean = float(values.mean())
        return cls(int(values.size), mean, float(((values - mean) ** 2).sum()))

    def merge(self, other: "RunningStats") -> "RunningStats":
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        n = self.count + other.count
        d = other.mean - self.mean
        mean = self.mean + d * other.count / n
        m2 = self.m2 + other.m2 + d * d * self.count * other.count / n
        return RunningStats(n, mean, m2)

    @property
    def stderr(self) -> float:
        if self.count < 2:
            return 0.5
        return math.sqrt(self.m2 / (self.count - 1) / self.count)


def block_sizes(samples: int, workers: int) -> list[int]:
    base, extra = divmod(samples, workers)
    return [base + (1 if b < extra else 0) for b in range(workers)]


def block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, block)))


def run_blocks(cfg: McConfig, stream: int, fn: Callable[[int, np.random.Generator], RunningStats]) -> RunningStats:
    """Run ``fn(size, rng)`` per block and merge the results in block order."""
    sizes = block_sizes(cfg.samples, cfg.workers)
    rngs = [block_rng(cfg.seed, stream, b) for b in range(cfg.workers)]
    if cfg.workers == 1:
        parts = [fn(sizes[0], rngs[0])]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(fn, sizes, rngs))
    total = RunningStats()
    for part in parts:
        total = total.merge(part)
    return total


def batched(size: int, batch: int) -> Iterable[int]:
    done = 0
    while done < size:
        step = min(batch, size - done)
        yield step
        done += step


# -- sampling -----------------------------------------------------------------


def sample_posterior_means(m: SyncModel, size: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw gauge-fixed inputs and observations; return inputs and ``E[X_e | Y_e]``."""
    x = np.ones((size, m.n), dtype=np.int8)
    if m.n > 1:
        x[:, 1:] = 1 - 2 * rng.integers(0, 2, size=(size, m.n - 1), dtype=np.int8)
    z = edge_products(m.graph, x)
    theta = np.empty((size, m.m))
    for e, ch in enumerate(m.channels):
        y = ch.sample_array(z[:, e].astype(np.float64), rng)
        theta[:, e] = ch.posterior_mean(y)
    return x, theta


# -- inner posterior solvers ----------------------------------------------------


def _bfs_tree(m: SyncModel, root: int):
    """BFS order, parent vertex and parent edge index within root's component."""
    order = [root]
    parent = {root: -1}
    parent_edge = {root: -1}
    queue = deque([root])
    g = m.graph
    while queue:
        a = queue.popleft()
        for b in g.adjacency[a]:
            if b not in parent:
                parent[b] = a
                parent_edge[b] = g.index_of(a, b)
                order.append(b)
                queue.append(b)
    return order, parent, parent_edge


class _TreePair:
    def __init__(self, m: SyncModel, u: int, v: int):
        order, parent, parent_edge = _bfs_tree(m, u)
        self.edges = None
        if v in parent:
            path = []
            w = v
            while w != u:
                path.append(parent_edge[w])
                w = parent[w]
            self.edges = np.array(path, dtype=np.intp)

    def __call__(self, x, theta):
        if self.edges is None:
            return np.zeros(theta.shape[0])
        return np.prod(theta[:, self.edges], axis=1)


class _TreeSet:
    """Exact ``E[X_u | X_S, Y]`` on a forest by upward recursion from the leaves."""

    def __init__(self, m: SyncModel, u: int, s: Sequence[int]):
        order, parent, parent_edge = _bfs_tree(m, u)
        self.order = order
        self.parent = parent
        self.parent_edge = parent_edge
        self.clamped = set(s) & set(order)
        self.u = u

    def __call__(self, x, theta):
        B = theta.shape[0]
        plus: dict[int, np.ndarray] = {}
        minus: dict[int, np.ndarray] = {}
        tau = np.zeros(B)
        for c in reversed(self.order):
            if c in self.clamped:
                tau = x[:, c].astype(np.float64)
            elif c in plus:
                p, q = plus.pop(c), minus.pop(c)
                tau = (p - q) / (p + q)
            else:
                tau = np.zeros(B)
            if c == self.u:
                return tau
            mu = theta[:, self.parent_edge[c]] * tau
            par = self.parent[c]
            if par in plus:
                plus[par] *= 1.0 + mu
                minus[par] *= 1.0 - mu
            else:
                plus[par] = 1.0 + mu
                minus[par] = 1.0 - mu
        return tau


class _Enumerated:
    def __init__(self, m: SyncModel, u: int, v: int, budget: Budget):
        if m.n - 1 > budget.inner:
            raise BudgetError(f"inner enumeration needs 2^{m.n - 1} inputs, cap is 2^{budget.inner}")
        cfg = gauge_configs(m.n)
        self.z = edge_products(m.graph, cfg).astype(np.float64)
        self.s = cfg[:, u].astype(np.float64) * cfg[:, v]

    def __call__(self, x, theta):
        return _kernels.inner_pair_means(np.ascontiguousarray(theta), self.z, self.s)


def _estimate(m: SyncModel, cfg: McConfig, solver, extra_theta=None) -> InfoResult:
    def block(size, rng):
        stats = RunningStats()
        for step in batched(size, _BATCH):
            x, theta = sample_posterior_means(m, step, rng)
            if extra_theta is not None:
                theta = np.concatenate([theta, extra_theta(x)], axis=1)
            h = solver(x, theta)
            stats = stats.merge(RunningStats.of(h * h))
        return stats

    stats = run_blocks(cfg, INFO_STREAM, block)
    value = min(1.0, max(0.0, stats.mean))
    return InfoResult(value, "monte_carlo", stats.stderr, stats.count)


def mc_pairwise_chi2(
    m: SyncModel, u: int, v: int, cfg: McConfig, budget: Budget | None = None
) -> InfoResult:
    """Unbiased estimate of ``I_2(X_u; X_v | Y)``."""
    m.graph.check_vertex(u)
    m.graph.check_vertex(v)
    if u == v:
        raise ValueError("endpoints must differ")
    if m.graph.is_forest():
        solver = _TreePair(m, u, v)
    else:
        solver = _Enumerated(m, u, v, budget or get_budget())
    return _estimate(m, cfg, solver)


def mc_set_chi2(
    m: SyncModel, u: int, s: Iterable[int], cfg: McConfig, budget: Budget | None = None
) -> InfoResult:
    """Unbiased estimate of ``I_2(X_u; X_S, Y)``.

    Observations on the virtual edges are the sampled spins ``x_s`` (virtual
    vertex pinned to ``+1``); a global sign on them leaves the squared
    posterior mean unchanged.
    """
    members = sorted(set(int(t) for t in s))
    m.graph.check_vertex(u)
    if not members:
        raise ValueError("vertex set must be nonempty")
    if u in members:
        raise ValueError("u must not belong to the target set")
    if len(members) == 1:
        return mc_pairwise_chi2(m, u, members[0], cfg, budget)
    if m.graph.is_forest():
        for t in members:
            m.graph.check_vertex(t)
        return _estimate(m, cfg, _TreeSet(m, u, members))
    aug, w = augment_with_virtual_vertex(m, members)
    solver = _Enumerated(aug, u, w, budget or get_budget())
    idx = np.array(members, dtype=np.intp)
    return _estimate(m, cfg, solver, extra_theta=lambda x: x[:, idx].astype(np.float64))
