"""Decomposable BIC scoring of candidate network structures.

score(G) = sum over nodes of [ LL(node | parents) - (ln N / 2) * K_node ]
where LL uses maximum-likelihood counts and
K_node = (|states(node)| - 1) * prod(|states(parent)|).  Higher is better.
"""

from __future__ import annotations

import math

from ..errors import EmptyData
from . import kernels
from .graph import Dag, EncodedTable, as_table


def family_counts(table: EncodedTable, node: str, parents: tuple[str, ...]):
    return kernels.contingency(
        table.columns[node],
        [table.columns[p] for p in parents],
        [table.arity(p) for p in parents],
        table.arity(node),
    )


def family_score(table: EncodedTable, node: str, parents: tuple[str, ...]) -> float:
    counts = family_counts(table, node, parents)
    ll = kernels.loglik(counts)
    q = 1
    for p in parents:
        q *= table.arity(p)
    k = (table.arity(node) - 1) * q
    return ll - 0.5 * math.log(table.n_rows) * k


class ScoreCache:
    """Memoizes family scores; parent order is irrelevant to the score."""

    def __init__(self, table: EncodedTable):
        self.table = table
        self._cache: dict[tuple[str, frozenset[str]], float] = {}

    def __call__(self, node: str, parents) -> float:
        key = (node, frozenset(parents))
        hit = self._cache.get(key)
        if hit is None:
            hit = family_score(self.table, node, tuple(parents))
            self._cache[key] = hit
        return hit


def bic_score(dag: Dag, data, state_spaces=None) -> float:
    """Total BIC of a structure on complete discrete data."""
    table = as_table(data, nodes=list(dag.nodes), state_spaces=state_spaces)
    if table.n_rows == 0:
        raise EmptyData("scoring requires at least one row")
    return sum(family_score(table, n, dag.parents[n]) for n in dag.nodes)
