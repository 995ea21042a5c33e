"""Bond-percolation connection probabilities and the self-avoiding-path union bound."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .budget import Budget, BudgetError, get_budget
from .graphs import Graph, component_of, path_edges, self_avoiding_paths
from .montecarlo import PERC_STREAM, McConfig, RunningStats, batched, run_blocks


@dataclass(frozen=True)
class PercolationSpec:
    graph: Graph
    gamma: tuple[float, ...]

    def __post_init__(self):
        gamma = tuple(float(p) for p in self.gamma)
        if len(gamma) != self.graph.m:
            raise ValueError(f"{len(gamma)} open probabilities for {self.graph.m} edges")
        for k, p in enumerate(gamma):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"open probability {p} of edge {k} outside [0, 1]")
        object.__setattr__(self, "gamma", gamma)

    @classmethod
    def uniform(cls, graph: Graph, p: float) -> "PercolationSpec":
        return cls(graph, (p,) * graph.m)

    @classmethod
    def from_model(cls, model) -> "PercolationSpec":
        """Open each edge with its channel's chi-squared information."""
        return cls(model.graph, model.gammas())


@dataclass(frozen=True)
class ProbResult:
    value: float
    method: str
    stderr: float | None = None
    samples: int | None = None
    vacuous: bool = False

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "stderr": self.stderr,
            "samples": self.samples,
            "vacuous": self.vacuous,
        }


def _targets(g: Graph, u: int, t: Iterable[int]) -> set[int]:
    g.check_vertex(u)
    targets = {g.check_vertex(v) for v in t}
    if not targets:
        raise ValueError("target set must be nonempty")
    return targets


def _restricted(spec: PercolationSpec, u: int, targets: set[int]):
    """Edges of u's component, relabelled densely; returns arrays and target mask."""
    comp = sorted(component_of(spec.graph, u))
    relabel = {v: i for i, v in enumerate(comp)}
    keep = [k for k, (a, _) in enumerate(spec.graph.edges) if a in relabel]
    ea = np.array([relabel[spec.graph.edges[k][0]] for k in keep], dtype=np.int64)
    eb = np.array([relabel[spec.graph.edges[k][1]] for k in keep], dtype=np.int64)
    gamma = np.array([spec.gamma[k] for k in keep], dtype=np.float64)
    mask = np.zeros(len(comp), dtype=np.bool_)
    for v in targets:
        if v in relabel:
            mask[relabel[v]] = True
    return ea, eb, gamma, mask, relabel[u], len(comp)


def exact_connection_prob(
    spec: PercolationSpec, u: int, t: Iterable[int], budget: Budget | None = None
) -> ProbResult:
    """``P(u ~ t)`` by summing over every open/closed pattern.

    Only edges of ``u``'s component can matter, so the cap applies to those.
    """
    targets = _targets(spec.graph, u, t)
    if u in targets:
        return ProbResult(1.0, "exact")
    ea, eb, gamma, mask, root, n = _restricted(spec, u, targets)
    if not mask.any():
        return ProbResult(0.0, "exact")
    cap = (budget or get_budget()).perc
    if gamma.size > cap:
        raise BudgetError(f"exact percolation over {gamma.size} edges, cap is {cap}")
    total = _kernels.perc_exact_range(gamma, ea, eb, n, root, mask, 0, 1 << gamma.size)
    return ProbResult(min(1.0, max(0.0, float(total))), "exact")


def mc_connection_prob(spec: PercolationSpec, u: int, t: Iterable[int], cfg: McConfig) -> ProbResult:
    """Fraction of sampled percolation configurations joining ``u`` to ``t``."""
    targets = _targets(spec.graph, u, t)
    if u in targets:
        return ProbResult(1.0, "monte_carlo", 0.0, cfg.samples)
    ea, eb, gamma, mask, root, n = _restricted(spec, u, targets)
    batch = max(1, min(4096, (1 << 22) // max(1, gamma.size)))

    def block(size, rng):
        stats = RunningStats()
        for step in batched(size, batch):
            is_open = rng.random((step, gamma.size)) < gamma
            hits = _kernels.perc_hits(is_open, ea, eb, n, root, mask)
            stats = stats.merge(RunningStats.of(hits.astype(np.float64)))
        return stats

    stats = run_blocks(cfg, PERC_STREAM, block)
    p = stats.mean
    return ProbResult(p, "monte_carlo", math.sqrt(max(p * (1.0 - p), 0.0) / stats.count), stats.count)


def path_union_bound(
    spec: PercolationSpec, u: int, v: int, max_len: int, budget: Budget | None = None
) -> ProbResult:
    """Sum over self-avoiding ``u``-``v`` paths of the product of open probabilities.

    Reported unclamped; ``vacuous`` marks values above 1.
    """
    limit = (budget or get_budget()).paths
    total = 0.0
    for path in self_avoiding_paths(spec.graph, u, v, max_len, limit=limit):
        total += math.prod(spec.gamma[k] for k in path_edges(spec.graph, path))
    return ProbResult(total, "path_bound", vacuous=total > 1.0)


def longest_path_bound(g: Graph) -> int:
    """A ``max_len`` large enough to enumerate every self-avoiding path."""
    return max(1, g.n - 1)
