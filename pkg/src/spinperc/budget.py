"""Enumeration caps shared by the exact and Monte Carlo engines.

Caps can be overridden through the ``SPINPERC_BUDGET`` environment variable,
either as a bare integer (applied to every cap) or as a comma separated list
of ``key=value`` pairs, e.g. ``SPINPERC_BUDGET="exact=28,perc=24"``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

ENV_VAR = "SPINPERC_BUDGET"


class BudgetError(RuntimeError):
    """An exhaustive enumeration would exceed its configured cap."""


@dataclass(frozen=True)
class Budget:
    # log2 of the number of weighted (input, observation) terms
    exact: int = 26
    # log2 of the number of gauge-fixed inputs enumerated per sample
    inner: int = 21
    # number of edges for exact percolation enumeration
    perc: int = 22
    # number of self-avoiding paths
    paths: int = 1_000_000


def parse_budget(text: str, base: Budget | None = None) -> Budget:
    base = base or Budget()
    text = text.strip()
    if not text:
        return base
    names = [f.name for f in fields(Budget)]
    if text.lstrip("-").isdigit():
        value = int(text)
        return replace(base, **{k: value for k in names if k != "paths"})
    updates = {}
    for token in text.split(","):
        key, sep, value = token.partition("=")
        key = key.strip()
        if not sep or key not in names:
            raise ValueError(f"bad {ENV_VAR} token {token!r}")
        try:
            updates[key] = int(value)
        except ValueError:
            raise ValueError(f"bad {ENV_VAR} token {token!r}") from None
    return replace(base, **updates)


def get_budget() -> Budget:
    return parse_budget(os.environ.get(ENV_VAR, ""))
