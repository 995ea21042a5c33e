"""Command-line front end.

Exit codes: 0 success, 2 argument error, 3 budget exceeded, 4 bound
violation found by ``suite``. Errors are reported as one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .budget import BudgetError
from .channels import ChannelError, EdgeChannel, parse_channel
from .exact import (
    ImpossibleObservationError,
    SyncModel,
    exact_pairwise_chi2,
    exact_pairwise_kl,
    exact_set_chi2,
)
from .graphs import (
    Graph,
    grid_ring,
    parse_graph_spec,
    read_edge_list,
    regular_tree_level,
)
from .montecarlo import McConfig, mc_pairwise_chi2, mc_set_chi2
from .percolation import (
    PercolationSpec,
    exact_connection_prob,
    mc_connection_prob,
    path_union_bound,
)
from . import verify

EXIT_OK = 0
EXIT_ARGS = 2
EXIT_BUDGET = 3
EXIT_VIOLATION = 4

SUBCOMMANDS = (
    "info-exact",
    "info-mc",
    "perc-exact",
    "perc-mc",
    "path-bound",
    "check-bound",
    "suite",
    "interp",
    "bot",
    "sweep",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


# -- argument helpers ---------------------------------------------------------


def load_graph(source: str) -> Graph:
    if source.startswith("file:"):
        return read_edge_list(source[5:])
    try:
        return parse_graph_spec(source)
    except ValueError as exc:
        if "unknown graph family" in str(exc):
            try:
                return read_edge_list(source)
            except FileNotFoundError:
                raise UsageError(f"graph source {source!r} is neither a generator spec nor a file") from None
        raise UsageError(str(exc)) from None


def parse_channel_file(path, graph: Graph) -> list[EdgeChannel]:
    """Per-edge channels from lines ``u v spec``; every edge must appear exactly once."""
    found: dict[int, EdgeChannel] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            toks = line.split()
            if len(toks) != 3:
                raise UsageError(f"{path}:{lineno}: expected 'u v spec'")
            a, b = int(toks[0]), int(toks[1])
            key = (min(a, b), max(a, b))
            if key not in graph.edge_index:
                raise UsageError(f"{path}:{lineno}: ({a}, {b}) is not an edge of the graph")
            k = graph.edge_index[key]
            if k in found:
                raise UsageError(f"{path}:{lineno}: duplicate line for edge {key}")
            found[k] = parse_channel(toks[2])
    missing = [graph.edges[k] for k in range(graph.m) if k not in found]
    if missing:
        a, b = missing[0]
        raise UsageError(f"{path}: no channel for edge ({a}, {b})")
    return [found[k] for k in range(graph.m)]


def _model(args, graph: Graph) -> SyncModel:
    if args.channel and args.channel_file:
        raise UsageError("give either --channel or --channel-file")
    if args.channel_file:
        return SyncModel(graph, tuple(parse_channel_file(args.channel_file, graph)))
    if not args.channel:
        raise UsageError("a channel is required (--channel or --channel-file)")
    return SyncModel.uniform(graph, parse_channel(args.channel))


def _targets(args, graph: Graph) -> list[int]:
    if args.v is not None and args.set:
        raise UsageError("give either --v or --set")
    if args.v is not None:
        return [graph.check_vertex(args.v)]
    if not args.set:
        raise UsageError("a target is required (--v or --set)")
    token = args.set.strip()
    if token == "leaves":
        kind, _, rest = args.graph.partition(":")
        if kind != "tree":
            raise UsageError("--set leaves needs a tree:B:D graph")
        b, d = (int(t) for t in rest.split(":"))
        return regular_tree_level(b, d)
    if token.startswith("ring:"):
        kind, _, rest = args.graph.partition(":")
        if kind != "grid":
            raise UsageError("--set ring:R needs a grid:WxH graph")
        w, h = (int(t) for t in rest.lower().split("x"))
        return grid_ring(w, h, args.u, int(token[5:]))
    return sorted({graph.check_vertex(int(t)) for t in token.split(",")})


def _gamma_spec(args, graph: Graph) -> PercolationSpec:
    if args.gamma is not None:
        vals = [float(t) for t in args.gamma.split(",")]
        if len(vals) == 1:
            return PercolationSpec.uniform(graph, vals[0])
        return PercolationSpec(graph, tuple(vals))
    return PercolationSpec.from_model(_model(args, graph))


def _cfg(args) -> McConfig:
    return McConfig(args.samples, args.seed, args.workers)


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _size(text: str | None) -> dict:
    out: dict = {}
    if not text:
        return out
    for token in text.split(","):
        key, sep, val = token.partition("=")
        if not sep:
            raise UsageError(f"bad --size token {token!r}")
        if key == "radii":
            out[key] = [int(r) for r in val.split(":")]
        elif key == "c":
            out[key] = float(val)
        else:
            out[key] = int(val)
    return out


# -- subcommands ----------------------------------------------------------------


def _info_record(res, u, targets, measure="chi2") -> dict:
    rec = res.to_dict()
    rec.update({"measure": measure, "u": u, "targets": targets})
    return rec


def cmd_info_exact(args):
    graph = load_graph(args.graph)
    model = _model(args, graph)
    targets = _targets(args, graph)
    if args.measure == "kl":
        if len(targets) != 1:
            raise UsageError("KL information is available for a single target vertex")
        res = exact_pairwise_kl(model, args.u, targets[0])
    elif len(targets) == 1:
        res = exact_pairwise_chi2(model, args.u, targets[0])
    else:
        res = exact_set_chi2(model, args.u, targets)
    return [_info_record(res, args.u, targets, args.measure)], True


def cmd_info_mc(args):
    graph = load_graph(args.graph)
    model = _model(args, graph)
    targets = _targets(args, graph)
    if len(targets) == 1:
        res = mc_pairwise_chi2(model, args.u, targets[0], _cfg(args))
    else:
        res = mc_set_chi2(model, args.u, targets, _cfg(args))
    return [_info_record(res, args.u, targets)], True


def cmd_perc_exact(args):
    graph = load_graph(args.graph)
    targets = _targets(args, graph)
    res = exact_connection_prob(_gamma_spec(args, graph), args.u, targets)
    return [dict(res.to_dict(), u=args.u, targets=targets)], True


def cmd_perc_mc(args):
    graph = load_graph(args.graph)
    targets = _targets(args, graph)
    res = mc_connection_prob(_gamma_spec(args, graph), args.u, targets, _cfg(args))
    return [dict(res.to_dict(), u=args.u, targets=targets)], True


def cmd_path_bound(args):
    graph = load_graph(args.graph)
    if args.v is None:
        raise UsageError("path-bound needs --v")
    max_len = args.max_len or max(1, graph.n - 1)
    res = path_union_bound(_gamma_spec(args, graph), args.u, args.v, max_len)
    return [dict(res.to_dict(), u=args.u, targets=[args.v], max_len=max_len)], True


def cmd_check_bound(args):
    graph = load_graph(args.graph)
    model = _model(args, graph)
    targets = _targets(args, graph)
    report = verify.check_bound(model, args.u, targets, _cfg(args), label=args.graph)
    return [report.to_dict()], True


def cmd_suite(args):
    sizes = [int(t) for t in args.set_sizes.split(",")]
    reports, summary = verify.random_bound_suite(
        args.n_max, args.m_max, args.instances, args.seed, set_sizes=sizes, workers=args.workers
    )
    records = [r.to_dict() for r in reports]
    records.append({"summary": summary})
    return records, summary["violations"] == 0 and summary["defects"] == 0


def cmd_interp(args):
    graph = load_graph(args.graph)
    model = _model(args, graph)
    if args.v is None:
        raise UsageError("interp needs --v")
    grid = _float_list(args.t_grid) if args.t_grid else [k / 10 for k in range(11)]
    rows = verify.interpolation_check(model, args.edge, args.u, args.v, grid)
    records = [
        {"t": r.t, "info": r.info, "bound": r.bound, "slack": r.slack, "holds": r.holds}
        for r in rows
    ]
    return records, all(r.holds for r in rows)


def cmd_bot(args):
    rows = verify.bot_experiment(args.b, args.depth, args.epsilon, _cfg(args))
    return rows, all(r.holds for r in rows)


def cmd_sweep(args):
    if not args.channel:
        raise UsageError("sweep needs --channel (comma separated list of specs)")
    grid = [t for t in args.channel.split(",") if t.strip()]
    rows = verify.table_sweep(args.family, grid, _size(args.size), _cfg(args))
    return rows, all(r.holds for r in rows)


COMMANDS = {
    "info-exact": cmd_info_exact,
    "info-mc": cmd_info_mc,
    "perc-exact": cmd_perc_exact,
    "perc-mc": cmd_perc_mc,
    "path-bound": cmd_path_bound,
    "check-bound": cmd_check_bound,
    "suite": cmd_suite,
    "interp": cmd_interp,
    "bot": cmd_bot,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--graph", help="path:N | complete:N | grid:WxH | er:N:C:SEED | tree:B:D | file:PATH")
    common.add_argument("--channel", help="uniform channel, e.g. bsc:0.25 (comma list for sweep)")
    common.add_argument("--channel-file", help="per-edge channels, lines 'u v spec'")
    common.add_argument("--gamma", help="open probability, uniform or comma list per edge")
    common.add_argument("--u", type=int, default=0)
    common.add_argument("--v", type=int)
    common.add_argument("--set", help="comma list of vertices, 'leaves' or 'ring:R'")
    common.add_argument("--samples", type=int, default=100_000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--max-len", type=int)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out")

    parser = _Parser(prog="spinperc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "info-exact":
            p.add_argument("--measure", choices=("chi2", "kl"), default="chi2")
        if name == "suite":
            p.add_argument("--n-max", type=int, default=7)
            p.add_argument("--m-max", type=int, default=12)
            p.add_argument("--instances", type=int, default=200)
            p.add_argument("--set-sizes", default="1")
        if name == "interp":
            p.add_argument("--edge", type=int, default=0)
            p.add_argument("--t-grid")
        if name == "bot":
            p.add_argument("--b", type=int, default=2)
            p.add_argument("--depth", type=int, default=5)
            p.add_argument("--epsilon", type=float, default=0.25)
        if name == "sweep":
            p.add_argument("--family", choices=("path", "tree", "grid", "er", "complete"), required=True)
            p.add_argument("--size", help="key=value list, e.g. w=41,h=41,radii=5:10:15")
    return parser


def _render(records, fmt: str) -> str:
    if records and isinstance(records[0], verify.SweepRow):
        if fmt == "csv":
            return verify.rows_csv(records)
        return "".join(json.dumps(r.to_dict()) + "\n" for r in records)
    if fmt == "csv":
        raise UsageError("csv output is only available for sweep and bot")
    return "".join(json.dumps(r) + "\n" for r in records)


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        records, ok = COMMANDS[args.command](args)
        text = _render(records, args.format)
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_ARGS)
    except BudgetError as exc:
        return _fail("budget", str(exc), EXIT_BUDGET)
    except (ChannelError, ImpossibleObservationError, ValueError, OSError) as exc:
        return _fail("invalid", str(exc), EXIT_ARGS)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "suite" and not ok:
        return EXIT_VIOLATION
    return EXIT_OK


def main() -> None:
    sys.exit(run())
