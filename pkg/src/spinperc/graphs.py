"""Finite undirected graphs, the generators used by the experiments, and
path / connectivity primitives."""

from __future__ import annotations

import sys
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

VertexPath = tuple[int, ...]


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0..n-1``.

    Edges are stored as ``(u, v)`` pairs with ``u < v``; an edge's index is
    its position in :attr:`edges`.
    """

    n: int
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("vertex count must be nonnegative")
        edges = tuple((int(a), int(b)) for a, b in self.edges)
        seen = set()
        for a, b in edges:
            if a == b:
                raise ValueError(f"self-loop at vertex {a}")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ValueError(f"edge ({a}, {b}) has an endpoint outside [0, {self.n})")
            if a > b:
                raise ValueError(f"edge ({a}, {b}) must be written with u < v")
            if (a, b) in seen:
                raise ValueError(f"duplicate edge ({a}, {b})")
            seen.add((a, b))
        object.__setattr__(self, "edges", edges)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return tuple(tuple(sorted(nb)) for nb in adj)

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {e: i for i, e in enumerate(self.edges)}

    def index_of(self, a: int, b: int) -> int:
        return self.edge_index[(a, b) if a < b else (b, a)]

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.edges:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty.copy()
        arr = np.asarray(self.edges, dtype=np.int64)
        return arr[:, 0].copy(), arr[:, 1].copy()

    def is_forest(self) -> bool:
        return self.m == self.n - count_components(self)

    def check_vertex(self, v: int) -> int:
        if not 0 <= v < self.n:
            raise ValueError(f"vertex {v} not in graph with {self.n} vertices")
        return int(v)


def from_edges(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    """Build a graph from pairs in any orientation, keeping first-seen order."""
    return Graph(n, tuple((min(a, b), max(a, b)) for a, b in edges))


def make_path(n: int) -> Graph:
    if n < 1:
        raise ValueError("path needs at least one vertex")
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def make_complete(n: int) -> Graph:
    if n < 1:
        raise ValueError("complete graph needs at least one vertex")
    return Graph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))


def make_grid_box(w: int, h: int) -> Graph:
    """``w x h`` box of the square lattice; lattice site ``(i, j)`` is vertex ``i*h + j``."""
    if w < 1 or h < 1:
        raise ValueError("grid box sides must be positive")
    edges = []
    for i in range(w):
        for j in range(h):
            v = i * h + j
            if j + 1 < h:
                edges.append((v, v + 1))
            if i + 1 < w:
                edges.append((v, v + h))
    return Graph(w * h, tuple(sorted(edges)))


def grid_center(w: int, h: int) -> int:
    return (w // 2) * h + h // 2


def grid_ring(w: int, h: int, center: int, radius: int) -> list[int]:
    """Vertices of the box at lattice (L1) distance exactly ``radius`` from ``center``."""
    ci, cj = divmod(center, h)
    return [
        i * h + j
        for i in range(w)
        for j in range(h)
        if abs(i - ci) + abs(j - cj) == radius
    ]


def grid_boundary(w: int, h: int) -> list[int]:
    return [i * h + j for i in range(w) for j in range(h) if i in (0, w - 1) or j in (0, h - 1)]


_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _splitmix64(z: np.ndarray) -> np.ndarray:
    z = z + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def pair_uniforms(seed: int, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    """Uniform [0, 1) values keyed by ``(seed, i, j)`` only."""
    key = np.asarray([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    base = _splitmix64(key)
    i = np.asarray(i, dtype=np.uint64)
    j = np.asarray(j, dtype=np.uint64)
    z = _splitmix64(base ^ _splitmix64((i << np.uint64(32)) | j))
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def make_er(n: int, c: float, seed: int) -> Graph:
    """Erdos-Renyi ``G(n, c/n)`` with per-pair hashed randomness.

    Whether ``(i, j)`` is an edge depends only on ``(n, c, seed, i, j)``.
    """
    if n < 1:
        raise ValueError("ER graph needs at least one vertex")
    if c < 0:
        raise ValueError("ER mean degree c must be nonnegative")
    p = c / n
    if p > 1:
        raise ValueError(f"edge probability c/n = {p} exceeds 1")
    if n < 2:
        return Graph(n)
    i, j = np.triu_indices(n, k=1)
    keep = pair_uniforms(seed, i, j) < p
    return Graph(n, tuple(zip(i[keep].tolist(), j[keep].tolist())))


def regular_tree_size(b: int, depth: int) -> int:
    if b < 1 or depth < 0:
        raise ValueError("tree needs branching >= 1 and depth >= 0")
    if b == 1:
        size = depth + 1
    else:
        size = (b ** (depth + 1) - 1) // (b - 1)
    if size > sys.maxsize:
        raise OverflowError(f"tree with b={b}, depth={depth} has {size} vertices")
    return size


def make_regular_tree(b: int, depth: int) -> Graph:
    """Rooted ``b``-ary tree of the given depth in breadth-first order; root is 0."""
    size = regular_tree_size(b, depth)
    edges = tuple((min(v, (v - 1) // b), v) for v in range(1, size))
    return Graph(size, edges)


def regular_tree_level(b: int, depth: int, level: int | None = None) -> list[int]:
    """Vertex indices at distance ``level`` (default: ``depth``) from the root."""
    level = depth if level is None else level
    if not 0 <= level <= depth:
        raise ValueError("level outside tree")
    regular_tree_size(b, depth)
    start = regular_tree_size(b, level - 1) if level > 0 else 0
    return list(range(start, regular_tree_size(b, level)))


def self_avoiding_paths(
    g: Graph, u: int, v: int, max_len: int, limit: int | None = None
) -> list[VertexPath]:
    """All simple ``u``-``v`` paths with at most ``max_len`` edges, lexicographic.

    ``limit`` caps the number of reported paths; exceeding it raises
    :class:`~spinperc.budget.BudgetError`.
    """
    from .budget import BudgetError

    g.check_vertex(u)
    g.check_vertex(v)
    if u == v:
        raise ValueError("endpoints must differ")
    if max_len < 1:
        raise ValueError("max_len must be positive")
    adj = g.adjacency
    out: list[VertexPath] = []
    stack = [u]
    on_path = [False] * g.n
    on_path[u] = True

    def extend():
        if len(stack) - 1 >= max_len:
            return
        for w in adj[stack[-1]]:
            if on_path[w]:
                continue
            if w == v:
                out.append(tuple(stack) + (v,))
                if limit is not None and len(out) > limit:
                    raise BudgetError(f"more than {limit} self-avoiding paths")
                continue
            on_path[w] = True
            stack.append(w)
            extend()
            stack.pop()
            on_path[w] = False

    extend()
    out.sort()
    return out


def path_edges(g: Graph, path: Sequence[int]) -> list[int]:
    return [g.index_of(a, b) for a, b in zip(path, path[1:])]


def component_of(g: Graph, u: int, open_edges: Sequence[bool] | None = None) -> set[int]:
    """Vertices reachable from ``u`` using only open edges (all edges if None)."""
    if open_edges is not None and len(open_edges) != g.m:
        raise ValueError("need one open flag per edge")
    nbrs: list[list[int]] = [[] for _ in range(g.n)]
    for k, (a, b) in enumerate(g.edges):
        if open_edges is None or open_edges[k]:
            nbrs[a].append(b)
            nbrs[b].append(a)
    seen = {u}
    queue = deque([u])
    while queue:
        x = queue.popleft()
        for y in nbrs[x]:
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def connected_under(g: Graph, open_edges: Sequence[bool], u: int, v_set: Iterable[int]) -> bool:
    """True iff some vertex of ``v_set`` lies in the open component of ``u``."""
    targets = set(v_set)
    if not targets:
        raise ValueError("target set must be nonempty")
    if len(open_edges) != g.m:
        raise ValueError("need one open flag per edge")
    parent = list(range(g.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (a, b), is_open in zip(g.edges, open_edges):
        if is_open:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
    root = find(u)
    return any(find(t) == root for t in targets)


def count_components(g: Graph) -> int:
    seen = [False] * g.n
    count = 0
    for s in range(g.n):
        if not seen[s]:
            count += 1
            for x in component_of(g, s):
                seen[x] = True
    return count


# -- edge-list text format ---------------------------------------------------


def format_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{a} {b}" for a, b in g.edges)
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> Graph:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rows.append((lineno, line.split()))
    if not rows:
        raise ValueError("edge list is empty")
    lineno, header = rows[0]
    if len(header) != 2:
        raise ValueError(f"line {lineno}: header must be 'n m'")
    n, m = (int(t) for t in header)
    body = rows[1:]
    if len(body) != m:
        raise ValueError(f"header announces {m} edges, found {len(body)}")
    edges = []
    for lineno, toks in body:
        if len(toks) != 2:
            raise ValueError(f"line {lineno}: expected 'u v'")
        edges.append((int(toks[0]), int(toks[1])))
    return Graph(n, tuple(edges))


def read_edge_list(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


def write_edge_list(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_edge_list(g))


# -- generator spec strings --------------------------------------------------


def parse_graph_spec(spec: str) -> Graph:
    """Parse ``path:N``, ``complete:N``, ``grid:WxH``, ``er:N:C:SEED`` or ``tree:B:D``."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "path":
            return make_path(int(rest))
        if kind == "complete":
            return make_complete(int(rest))
        if kind == "grid":
            w, h = rest.lower().split("x")
            return make_grid_box(int(w), int(h))
        if kind == "er":
            n, c, seed = rest.split(":")
            return make_er(int(n), float(c), int(seed))
        if kind == "tree":
            b, d = rest.split(":")
            return make_regular_tree(int(b), int(d))
    except ValueError as exc:
        raise ValueError(f"bad graph spec {spec!r}: {exc}") from None
    raise ValueError(f"unknown graph family in {spec!r}")
