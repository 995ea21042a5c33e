"""Exact chi-squared and KL information between vertex spins given all edge
observations, by exhaustive enumeration over inputs and observations.

All likelihoods depend on the spins only through edge products, so inputs
are enumerated with vertex 0 pinned to ``+1`` (``2**(n-1)`` configurations).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .budget import Budget, BudgetError, get_budget
from .channels import BSC, EdgeChannel, encode
from .graphs import Graph

# max elements of one (inputs x observations) weight block
_BLOCK = 1 << 21


class ImpossibleObservationError(ValueError):
    """The supplied observation has zero probability under the model."""


@dataclass(frozen=True)
class SyncModel:
    """A graph with one edge channel per edge (aligned with edge indices)."""

    graph: Graph
    channels: tuple[EdgeChannel, ...]

    def __post_init__(self):
        chans = tuple(self.channels)
        if len(chans) != self.graph.m:
            raise ValueError(f"{len(chans)} channels for {self.graph.m} edges")
        object.__setattr__(self, "channels", chans)

    @classmethod
    def uniform(cls, graph: Graph, channel: EdgeChannel) -> "SyncModel":
        return cls(graph, (channel,) * graph.m)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def m(self) -> int:
        return self.graph.m

    @property
    def discrete(self) -> bool:
        return all(ch.discrete for ch in self.channels)

    def gammas(self) -> tuple[float, ...]:
        return tuple(ch.chi2_info() for ch in self.channels)

    def without_edge(self, k: int) -> "SyncModel":
        edges = self.graph.edges[:k] + self.graph.edges[k + 1 :]
        chans = self.channels[:k] + self.channels[k + 1 :]
        return SyncModel(Graph(self.graph.n, edges), chans)

    def with_channel(self, k: int, ch: EdgeChannel) -> "SyncModel":
        chans = list(self.channels)
        chans[k] = ch
        return SyncModel(self.graph, tuple(chans))


@dataclass(frozen=True)
class InfoResult:
    value: float
    method: str
    stderr: float | None = None
    samples: int | None = None

    def to_dict(self) -> dict:
        return {"value": self.value, "method": self.method, "stderr": self.stderr, "samples": self.samples}


def augment_with_virtual_vertex(m: SyncModel, s: Iterable[int]) -> tuple[SyncModel, int]:
    """Add a vertex ``w`` tied to every vertex of ``s`` by a noiseless edge.

    Returns the augmented model and ``w``. Information between ``X_u`` and
    ``X_w`` in the new model equals information between ``X_u`` and
    ``(X_s, Y)`` in the old one.
    """
    members = sorted(set(int(v) for v in s))
    if not members:
        raise ValueError("vertex set must be nonempty")
    for v in members:
        m.graph.check_vertex(v)
    w = m.n
    g = Graph(m.n + 1, m.graph.edges + tuple((v, w) for v in members))
    return SyncModel(g, m.channels + (BSC(0.0),) * len(members)), w


def gauge_configs(n: int) -> np.ndarray:
    """All spin vectors with ``x_0 = +1``, shape ``(2**(n-1), n)``."""
    if n < 1:
        return np.ones((1, 0), dtype=np.int8)
    idx = np.arange(1 << (n - 1), dtype=np.int64)
    out = np.ones((idx.size, n), dtype=np.int8)
    for k in range(1, n):
        out[:, k] = 1 - 2 * ((idx >> (k - 1)) & 1)
    return out


def all_configs(n: int) -> np.ndarray:
    """All ``2**n`` spin vectors."""
    idx = np.arange(1 << n, dtype=np.int64)
    out = np.empty((idx.size, n), dtype=np.int8)
    for k in range(n):
        out[:, k] = 1 - 2 * ((idx >> k) & 1)
    return out


def edge_products(g: Graph, x: np.ndarray) -> np.ndarray:
    a, b = g.edge_arrays()
    return x[:, a] * x[:, b]


def enumeration_log2(m: SyncModel, gauge: bool = True) -> float:
    """log2 of the number of weighted (input, observation) terms."""
    if not m.discrete:
        return math.inf
    bits = (m.n - 1) if gauge else m.n
    return bits + sum(math.log2(len(ch.outputs())) for ch in m.channels)


def _check_budget(m: SyncModel, budget: Budget | None, gauge: bool = True) -> None:
    if not m.discrete:
        bad = next(ch for ch in m.channels if not ch.discrete)
        raise ValueError(f"exact enumeration needs discrete outputs; {bad} is continuous")
    budget = budget or get_budget()
    need = enumeration_log2(m, gauge)
    if need > budget.exact + 1e-9:
        raise BudgetError(f"exact enumeration needs 2^{need:.1f} terms, cap is 2^{budget.exact}")


def _weight_blocks(m: SyncModel, x: np.ndarray) -> Iterator[np.ndarray]:
    """Yield blocks ``W[x, y] = prod_e Q_e(y_e | x_e)`` covering every observation ``y``."""
    z = edge_products(m.graph, x)
    nx = x.shape[0]
    # G[e][x, k] = mass of output k of edge e given input z_e(x)
    cols = [(z[:, e] < 0).astype(np.intp) for e in range(m.m)]
    G = [ch.mass_table()[:, cols[e]].T.copy() for e, ch in enumerate(m.channels)]
    sizes = [g.shape[1] for g in G]

    inner_start = m.m
    width = 1
    while inner_start > 0 and nx * width * sizes[inner_start - 1] <= _BLOCK:
        inner_start -= 1
        width *= sizes[inner_start]

    inner = np.ones((nx, 1))
    for g in G[inner_start:]:
        inner = (inner[:, :, None] * g[:, None, :]).reshape(nx, -1)

    outer = G[:inner_start]
    if not outer:
        yield inner
        return
    for combo in itertools.product(*(range(s) for s in sizes[:inner_start])):
        base = np.ones(nx)
        for g, k in zip(outer, combo):
            base = base * g[:, k]
        if not base.any():
            continue
        yield base[:, None] * inner


def _pair_signs(x: np.ndarray, pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    return np.stack([x[:, u].astype(np.float64) * x[:, v] for u, v in pairs])


def _chi2_pairs(m: SyncModel, pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    x = gauge_configs(m.n)
    signs = _pair_signs(x, pairs)
    total = np.zeros(len(pairs))
    for W in _weight_blocks(m, x):
        D = W.sum(axis=0)
        keep = D > 0
        if not keep.all():
            W, D = W[:, keep], D[keep]
        N = signs @ W
        total += (N * N / D).sum(axis=1)
    return total / x.shape[0]


def _check_pair(m: SyncModel, u: int, v: int) -> None:
    m.graph.check_vertex(u)
    m.graph.check_vertex(v)
    if u == v:
        raise ValueError("endpoints must differ")


def exact_pairwise_chi2(m: SyncModel, u: int, v: int, budget: Budget | None = None) -> InfoResult:
    """``I_2(X_u; X_v | Y) = E_Y[E[X_u X_v | Y]^2]`` by exhaustive enumeration."""
    _check_pair(m, u, v)
    _check_budget(m, budget)
    return InfoResult(float(_chi2_pairs(m, [(u, v)])[0]), "exact")


def exact_pairwise_chi2_many(
    m: SyncModel, pairs: Sequence[tuple[int, int]], budget: Budget | None = None
) -> list[InfoResult]:
    """Same as :func:`exact_pairwise_chi2` for several pairs in one enumeration."""
    for u, v in pairs:
        _check_pair(m, u, v)
    _check_budget(m, budget)
    if not pairs:
        return []
    return [InfoResult(float(val), "exact") for val in _chi2_pairs(m, list(pairs))]


def exact_set_chi2(m: SyncModel, u: int, s: Iterable[int], budget: Budget | None = None) -> InfoResult:
    """``I_2(X_u; X_S, Y)`` through the virtual-vertex construction."""
    s = set(s)
    m.graph.check_vertex(u)
    if u in s:
        raise ValueError("u must not belong to the target set")
    aug, w = augment_with_virtual_vertex(m, s)
    return exact_pairwise_chi2(aug, u, w, budget)


def _kl_terms(joint: np.ndarray) -> np.ndarray:
    """Sum over cells of the 2x2xY array of ``p lg(p * p_y / (p_a p_b))``."""
    py = joint.sum(axis=(0, 1))
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    num = joint * py
    den = pa[:, None, :] * pb[None, :, :]
    out = np.zeros_like(joint)
    pos = joint > 0
    out[pos] = joint[pos] * np.log2(num[pos] / den[pos])
    return out.sum(axis=(0, 1))


def exact_pairwise_kl(m: SyncModel, u: int, v: int, budget: Budget | None = None) -> InfoResult:
    """``I_KL(X_u; X_v | Y)`` in bits."""
    _check_pair(m, u, v)
    _check_budget(m, budget)
    x = gauge_configs(m.n)
    xu, xv = x[:, u], x[:, v]
    ind = np.stack([((xu == a) & (xv == b)).astype(np.float64) for a in (1, -1) for b in (1, -1)])
    scale = 1.0 / (2.0 * x.shape[0])  # full input space is x and -x
    total = 0.0
    for W in _weight_blocks(m, x):
        M = (ind @ W).reshape(2, 2, -1)
        # sign-flipped inputs carry the same weight: (a, b) pairs with (-a, -b)
        joint = (M + M[::-1, ::-1]) * scale
        total += float(_kl_terms(joint).sum())
    return InfoResult(total, "exact")


def exact_joint_chi2(m: SyncModel, u: int, v: int, budget: Budget | None = None) -> float:
    """Unconditional ``I_2(X_u; (X_v, Y))`` straight from the chi-squared divergence.

    Enumerates all ``2**n`` inputs (no gauge fixing) and evaluates
    ``sum (P(a, b, y) - P(a) P(b, y))^2 / (P(a) P(b, y))``.
    """
    _check_pair(m, u, v)
    _check_budget(m, budget, gauge=False)
    x = all_configs(m.n)
    xu, xv = x[:, u], x[:, v]
    ind = np.stack([((xu == a) & (xv == b)).astype(np.float64) for a in (1, -1) for b in (1, -1)])
    scale = 1.0 / x.shape[0]
    blocks = [(ind @ W).reshape(2, 2, -1) * scale for W in _weight_blocks(m, x)]
    joint = np.concatenate(blocks, axis=2)
    pa = joint.sum(axis=(1, 2))
    pby = joint.sum(axis=0)
    prod = pa[:, None, None] * pby[None, :, :]
    pos = prod > 0
    diff = joint - prod
    return float((diff[pos] ** 2 / prod[pos]).sum())


def posterior_pair_mean(
    m: SyncModel, y: Sequence, u: int, v: int, budget: Budget | None = None
) -> float:
    """``E[X_u X_v | Y = y]`` for one observation vector ``y`` (one entry per edge)."""
    _check_pair(m, u, v)
    if len(y) != m.m:
        raise ValueError(f"need {m.m} observations, got {len(y)}")
    budget = budget or get_budget()
    if m.n - 1 > budget.inner:
        raise BudgetError(f"posterior needs 2^{m.n - 1} inputs, cap is 2^{budget.inner}")
    x = gauge_configs(m.n)
    z = edge_products(m.graph, x)
    w = np.ones(x.shape[0])
    for e, (ch, obs) in enumerate(zip(m.channels, y)):
        encode(obs, ch)  # alphabet check
        lp, lm = ch.likelihood(obs, 1), ch.likelihood(obs, -1)
        w = w * np.where(z[:, e] > 0, lp, lm)
    total = w.sum()
    if total <= 0:
        raise ImpossibleObservationError("observation has zero likelihood under every input")
    s = x[:, u].astype(np.float64) * x[:, v]
    return float(np.dot(s, w) / total)
