"""Conditional probability tables and network parameter fitting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Dag, as_table
from .scoring import family_counts


@dataclass(frozen=True)
class Cpt:
    """P(node | parents) as a (parent configurations x node states) matrix.

    Rows are ordered row-major over parent states following parent_order
    (first parent most significant); each row sums to 1.
    """

    node: str
    parent_order: tuple[str, ...]
    table: np.ndarray

    def row_index(self, parent_state_indices: tuple[int, ...], arities) -> int:
        idx = 0
        for code, a in zip(parent_state_indices, arities):
            idx = idx * a + code
        return idx


@dataclass(frozen=True)
class BayesNet:
    dag: Dag
    cpts: dict[str, Cpt]
    state_spaces: dict[str, list[str]]

    def __post_init__(self):
        if set(self.cpts) != set(self.dag.nodes):
            raise ValueError("cpts must cover exactly the dag nodes")
        for n, cpt in self.cpts.items():
            if cpt.parent_order != self.dag.parents[n]:
                raise ValueError(f"cpt parent order mismatch for {n!r}")
            rows = cpt.table.sum(axis=1)
            if not np.allclose(rows, 1.0, atol=1e-9):
                raise ValueError(f"cpt rows for {n!r} do not sum to 1")
            if (cpt.table < 0).any():
                raise ValueError(f"cpt for {n!r} has negative entries")

    def arity(self, node: str) -> int:
        return len(self.state_spaces[node])


def fit_cpts(dag: Dag, data, laplace_alpha: float = 1.0, state_spaces=None) -> BayesNet:
    """Estimate CPTs by smoothed relative frequency.

    Each entry is (count + alpha) / (row count + alpha * |states|); with
    alpha = 0 an empty parent configuration degenerates to uniform.
    """
    table = as_table(data, nodes=list(dag.nodes), state_spaces=state_spaces)
    cpts = {}
    for node in dag.nodes:
        parents = dag.parents[node]
        counts = family_counts(table, node, parents).astype(np.float64)
        counts += laplace_alpha
        rows = counts.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            probs = counts / rows
        r = table.arity(node)
        probs = np.where(rows > 0, probs, 1.0 / r)
        cpts[node] = Cpt(node=node, parent_order=parents, table=probs)
    return BayesNet(
        dag=dag,
        cpts=cpts,
        state_spaces={n: list(table.states[n]) for n in dag.nodes},
    )
