"""Experiment harness: information-vs-percolation checks, randomized suites,
the one-edge interpolation inequality, broadcasting on trees, and the
regime sweeps for paths, trees, grids, Erdos-Renyi graphs and K_n."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .budget import Budget, BudgetError, get_budget
from .channels import AWGN, BSC, EdgeChannel, Erasure, parse_channel
from .exact import (
    InfoResult,
    SyncModel,
    augment_with_virtual_vertex,
    enumeration_log2,
    exact_pairwise_chi2,
    exact_set_chi2,
)
from .graphs import (
    Graph,
    grid_center,
    grid_ring,
    make_complete,
    make_er,
    make_grid_box,
    make_path,
    make_regular_tree,
    regular_tree_level,
)
from .montecarlo import McConfig, mc_pairwise_chi2, mc_set_chi2
from .percolation import (
    PercolationSpec,
    ProbResult,
    exact_connection_prob,
    mc_connection_prob,
)

EXACT_TOL = 1e-10
ERASURE_DEFECT_TOL = 1e-9
MC_SIGMAS = 4.0

SWEEP_COLUMNS = (
    "family",
    "param",
    "gamma",
    "info",
    "info_stderr",
    "perc",
    "perc_stderr",
    "slack",
    "holds",
    "verdict",
    "target",
)


@dataclass(frozen=True)
class BoundReport:
    lhs: InfoResult
    rhs: ProbResult
    slack: float
    holds: bool
    instance: dict = field(default_factory=dict)
    defect: bool = False

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "lhs": self.lhs.to_dict(),
            "rhs": self.rhs.to_dict(),
            "slack": self.slack,
            "holds": self.holds,
            "defect": self.defect,
        }


def bound_holds(lhs, rhs, tol: float = EXACT_TOL) -> bool:
    """``rhs >= lhs`` up to ``tol`` plus four combined standard errors of MC legs."""
    noise = (lhs.stderr or 0.0) + (rhs.stderr or 0.0)
    return rhs.value - lhs.value >= -tol - MC_SIGMAS * noise


def _fits_exact(m: SyncModel, budget: Budget) -> bool:
    return m.discrete and enumeration_log2(m) <= budget.exact + 1e-9


def information(
    m: SyncModel,
    u: int,
    targets: Sequence[int],
    cfg: McConfig | None = None,
    budget: Budget | None = None,
) -> InfoResult:
    """``I_2(X_u; X_T, Y)`` exactly when the enumeration fits, otherwise by MC."""
    budget = budget or get_budget()
    targets = sorted(set(targets))
    if len(targets) == 1:
        if _fits_exact(m, budget):
            return exact_pairwise_chi2(m, u, targets[0], budget)
        return mc_pairwise_chi2(m, u, targets[0], cfg or McConfig(), budget)
    aug, _ = augment_with_virtual_vertex(m, targets)
    if _fits_exact(aug, budget):
        return exact_set_chi2(m, u, targets, budget)
    return mc_set_chi2(m, u, targets, cfg or McConfig(), budget)


def connection(
    spec: PercolationSpec,
    u: int,
    targets: Sequence[int],
    cfg: McConfig | None = None,
    budget: Budget | None = None,
) -> ProbResult:
    """``P(u ~ T)`` exactly when the enumeration fits, otherwise by MC."""
    try:
        return exact_connection_prob(spec, u, targets, budget)
    except BudgetError:
        return mc_connection_prob(spec, u, targets, cfg or McConfig())


def check_bound(
    m: SyncModel,
    u: int,
    v_or_set: int | Iterable[int],
    cfg: McConfig | None = None,
    budget: Budget | None = None,
    label: str | None = None,
) -> BoundReport:
    """Compare ``I_2(X_u; X_T | Y)`` with ``P(u ~ T)`` under per-edge ``gamma_e = I_2(X_e; Y_e)``."""
    targets = [int(v_or_set)] if isinstance(v_or_set, (int, np.integer)) else sorted(set(v_or_set))
    if u in targets:
        raise ValueError("u must not belong to the target set")
    lhs = information(m, u, targets, cfg, budget)
    rhs = connection(PercolationSpec.from_model(m), u, targets, cfg, budget)
    slack = rhs.value - lhs.value
    erasure_only = m.m > 0 and all(isinstance(ch, Erasure) for ch in m.channels)
    defect = (
        erasure_only
        and lhs.method == "exact"
        and rhs.method == "exact"
        and abs(slack) > ERASURE_DEFECT_TOL
    )
    instance = {
        "graph": label or f"n={m.n},m={m.m}",
        "edges": [list(e) for e in m.graph.edges],
        "channels": [str(ch) for ch in m.channels],
        "u": int(u),
        "targets": targets,
        "seed": None if lhs.method == rhs.method == "exact" else (cfg or McConfig()).seed,
    }
    return BoundReport(lhs, rhs, slack, bound_holds(lhs, rhs), instance, defect)


# -- randomized instances -------------------------------------------------------


def random_channel(rng: np.random.Generator, kinds: Sequence[str]) -> EdgeChannel:
    kind = kinds[int(rng.integers(len(kinds)))]
    if rng.random() < 0.15:
        p = float(rng.choice([0.0, 0.5, 1.0]))
    else:
        p = float(rng.random())
    if kind == "bsc":
        return BSC(p)
    if kind == "erasure":
        return Erasure(p)
    raise ValueError(f"unsupported random channel kind {kind!r}")


def random_graph(rng: np.random.Generator, n_max: int, m_max: int, n_min: int = 2) -> Graph:
    n = int(rng.integers(n_min, n_max + 1))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    m = int(rng.integers(1, min(m_max, len(pairs)) + 1))
    pick = sorted(rng.choice(len(pairs), size=m, replace=False).tolist())
    return Graph(n, tuple(pairs[k] for k in pick))


def random_instances(
    n_max: int,
    m_max: int,
    instances: int,
    seed: int,
    kinds: Sequence[str] = ("bsc", "erasure"),
    set_sizes: Sequence[int] = (1,),
    budget: Budget | None = None,
) -> Iterator[tuple[SyncModel, int, list[int]]]:
    """Random models with endpoints; draws that exceed the exact budget are redrawn."""
    budget = budget or get_budget()
    rng = np.random.default_rng(seed)
    made = 0
    while made < instances:
        k = int(rng.choice(list(set_sizes)))
        g = random_graph(rng, n_max, m_max, n_min=k + 1)
        model = SyncModel(g, tuple(random_channel(rng, kinds) for _ in range(g.m)))
        verts = rng.permutation(g.n).tolist()
        u, targets = verts[0], sorted(verts[1 : 1 + k])
        probe = model if k == 1 else augment_with_virtual_vertex(model, targets)[0]
        if not _fits_exact(probe, budget) or g.m > budget.perc:
            continue
        made += 1
        yield model, u, targets


def summarize(reports: Sequence[BoundReport]) -> dict:
    slacks = [r.slack for r in reports]
    return {
        "instances": len(reports),
        "violations": sum(not r.holds for r in reports),
        "defects": sum(r.defect for r in reports),
        "min_slack": min(slacks) if slacks else None,
        "mean_slack": float(np.mean(slacks)) if slacks else None,
    }


def random_bound_suite(
    n_max: int,
    m_max: int,
    instances: int,
    seed: int,
    kinds: Sequence[str] = ("bsc", "erasure"),
    set_sizes: Sequence[int] = (1,),
    workers: int = 1,
    budget: Budget | None = None,
) -> tuple[list[BoundReport], dict]:
    """Check the bound on randomly drawn models; returns reports and a summary."""
    cases = list(random_instances(n_max, m_max, instances, seed, kinds, set_sizes, budget))

    def run(case):
        model, u, targets = case
        return check_bound(model, u, targets, budget=budget)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run, cases))
    else:
        reports = [run(c) for c in cases]
    return reports, summarize(reports)


# -- interpolation along one edge -----------------------------------------------


@dataclass(frozen=True)
class InterpRow:
    t: float
    info: float
    bound: float
    slack: float
    holds: bool


def interpolation_check(
    m: SyncModel,
    f: int,
    u: int,
    v: int,
    t_grid: Sequence[float],
    budget: Budget | None = None,
) -> list[InterpRow]:
    """Replace edge ``f`` by ``BSC((1 - t)/2)`` and compare ``g(t)`` with
    ``(1 - t^2) g(0) + t^2 g(1)``."""
    if not all(isinstance(ch, BSC) for ch in m.channels):
        raise ValueError("interpolation check needs every channel to be a BSC")
    if not 0 <= f < m.m:
        raise ValueError(f"edge index {f} out of range")

    def g(t):
        return exact_pairwise_chi2(m.with_channel(f, BSC((1.0 - t) / 2.0)), u, v, budget).value

    g0, g1 = g(0.0), g(1.0)
    rows = []
    for t in t_grid:
        t = float(t)
        if not 0.0 <= t <= 1.0:
            raise ValueError("t must lie in [0, 1]")
        val = g(t)
        bound = (1.0 - t * t) * g0 + t * t * g1
        rows.append(InterpRow(t, val, bound, bound - val, val <= bound + EXACT_TOL))
    return rows


# -- regime sweeps --------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    family: str
    param: str
    gamma: float
    info: float | None
    info_stderr: float | None
    perc: float
    perc_stderr: float | None
    slack: float | None
    holds: bool
    verdict: str
    target: str
    bound: float | None = None

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in SWEEP_COLUMNS}


def bsc_for_gamma(gamma: float) -> BSC:
    """The BSC with ``(1 - 2 eps)^2 = gamma`` and ``eps <= 1/2``."""
    return BSC((1.0 - math.sqrt(gamma)) / 2.0)


def _row(family, ch, gamma, info, perc, verdict, target, bound=None) -> SweepRow:
    if info is None:
        slack, holds = None, True
    else:
        slack = perc.value - info.value
        holds = bound_holds(info, perc)
        if bound is not None:
            holds = holds and info.value <= bound + EXACT_TOL + MC_SIGMAS * (info.stderr or 0.0)
    return SweepRow(
        family,
        str(ch),
        gamma,
        None if info is None else info.value,
        None if info is None else info.stderr,
        perc.value,
        perc.stderr,
        slack,
        holds,
        verdict,
        target,
        bound,
    )


def bot_experiment(
    b: int,
    depth_max: int,
    epsilon: float,
    cfg: McConfig | None = None,
    budget: Budget | None = None,
) -> list[SweepRow]:
    """Root-vs-level information on ``b``-ary trees against the percolation bounds."""
    cfg = cfg or McConfig()
    ch = BSC(epsilon)
    gamma = ch.chi2_info()
    verdict = "sub" if gamma <= 1.0 / b else "super"
    rows = []
    for d in range(1, depth_max + 1):
        model = SyncModel.uniform(make_regular_tree(b, d), ch)
        level = regular_tree_level(b, d)
        info = information(model, 0, level, cfg, budget)
        perc = connection(PercolationSpec.from_model(model), 0, level, cfg, budget)
        bound = min(1.0, (b * gamma) ** d)
        rows.append(_row("tree", ch, gamma, info, perc, verdict, f"b={b},depth={d}", bound))
    return rows


def _er_connection(n, c, gamma, u, v, cfg, graphs) -> ProbResult:
    """``P(u ~ v)`` averaged over ``graphs`` ER draws; stderr from between-graph spread."""
    per_graph = max(1, cfg.samples // graphs)
    values = []
    for k in range(graphs):
        graph_seed, mc_seed = np.random.SeedSequence([cfg.seed, k]).generate_state(2).tolist()
        g = make_er(n, c, seed=graph_seed)
        sub = McConfig(per_graph, mc_seed, cfg.workers)
        values.append(mc_connection_prob(PercolationSpec.uniform(g, gamma), u, [v], sub).value)
    vals = np.asarray(values)
    err = float(vals.std(ddof=1) / math.sqrt(graphs)) if graphs > 1 else 0.5
    return ProbResult(float(vals.mean()), "monte_carlo", err, per_graph * graphs)


def table_sweep(
    family: str,
    channel_grid: Sequence[EdgeChannel | str],
    size: dict | None = None,
    cfg: McConfig | None = None,
    budget: Budget | None = None,
) -> list[SweepRow]:
    """Regime sweep for one graph family.

    ``size`` keys per family: path ``n``; tree ``b``, ``depth``; grid ``w``,
    ``h``, ``radii``; er ``n``, ``c``, ``graphs``; complete ``n``. For the
    complete graph an AWGN entry with parameter ``lam`` is the spiked Wigner
    model, i.e. every edge carries ``AWGN(lam / n)``.
    """
    cfg = cfg or McConfig()
    budget = budget or get_budget()
    size = dict(size or {})
    channels = [parse_channel(c) if isinstance(c, str) else c for c in channel_grid]
    rows: list[SweepRow] = []
    for ch in channels:
        if family == "path":
            n = size.get("n", 8)
            model = SyncModel.uniform(make_path(n), ch)
            gamma = ch.chi2_info()
            info = information(model, 0, [n - 1], cfg, budget)
            perc = connection(PercolationSpec.from_model(model), 0, [n - 1], cfg, budget)
            verdict = "sub" if gamma < 1.0 else "super"
            rows.append(_row(family, ch, gamma, info, perc, verdict, f"n={n},0~{n - 1}", gamma ** (n - 1)))
        elif family == "tree":
            b, depth = size.get("b", 2), size.get("depth", 3)
            model = SyncModel.uniform(make_regular_tree(b, depth), ch)
            gamma = ch.chi2_info()
            level = regular_tree_level(b, depth)
            info = information(model, 0, level, cfg, budget)
            perc = connection(PercolationSpec.from_model(model), 0, level, cfg, budget)
            verdict = "sub" if gamma <= 1.0 / b else "super"
            bound = min(1.0, (b * gamma) ** depth)
            rows.append(_row(family, ch, gamma, info, perc, verdict, f"b={b},depth={depth}", bound))
        elif family == "grid":
            w, h = size.get("w", 41), size.get("h", 41)
            radii = size.get("radii", (5, 10, 15))
            g = make_grid_box(w, h)
            model = SyncModel.uniform(g, ch)
            gamma = ch.chi2_info()
            c = grid_center(w, h)
            verdict = "sub" if gamma <= 0.5 else "super"
            spec = PercolationSpec.from_model(model)
            for r in radii:
                ring = grid_ring(w, h, c, r)
                if not ring:
                    raise ValueError(f"radius {r} does not fit in a {w}x{h} box")
                info = _maybe_information(model, c, ring, cfg, budget)
                perc = connection(spec, c, ring, cfg, budget)
                rows.append(_row(family, ch, gamma, info, perc, verdict, f"{w}x{h},r={r}"))
        elif family == "er":
            n, c = size.get("n", 400), size.get("c", 2.0)
            graphs = size.get("graphs", 20)
            gamma = ch.chi2_info()
            verdict = "sub" if gamma * c <= 1.0 else "super"
            perc = _er_connection(n, c, gamma, 0, 1, cfg, graphs)
            rows.append(_row(family, ch, gamma, None, perc, verdict, f"n={n},c={c:g},0~1"))
        elif family == "complete":
            n = size.get("n", 12)
            if isinstance(ch, AWGN):
                edge_ch = AWGN(ch.lam / n)
                verdict = "sub" if ch.lam < 1.0 else "super"
            else:
                edge_ch = ch
                verdict = "sub" if ch.chi2_info() < 1.0 / n else "super"
            model = SyncModel.uniform(make_complete(n), edge_ch)
            gamma = edge_ch.chi2_info()
            info = _maybe_information(model, 0, [1], cfg, budget)
            perc = connection(PercolationSpec.from_model(model), 0, [1], cfg, budget)
            rows.append(_row(family, ch, gamma, info, perc, verdict, f"n={n},0~1"))
        else:
            raise ValueError(f"unknown family {family!r}")
    return rows


def _maybe_information(model, u, targets, cfg, budget) -> InfoResult | None:
    """Information when some engine can handle the model, else None."""
    probe = model if len(targets) == 1 else augment_with_virtual_vertex(model, targets)[0]
    if _fits_exact(probe, budget) or probe.n - 1 <= budget.inner or model.graph.is_forest():
        return information(model, u, targets, cfg, budget)
    return None


# -- serialization --------------------------------------------------------------


def _clean(value):
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def report_json(report: BoundReport) -> str:
    return json.dumps(report.to_dict())


def rows_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow(["" if v is None else _clean(v) for v in row.to_dict().values()])
    return buf.getvalue()
