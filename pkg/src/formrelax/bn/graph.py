"""Directed acyclic graph over named nodes, plus integer-encoded data tables."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyData


@dataclass(frozen=True)
class Dag:
    nodes: tuple[str, ...]
    parents: dict[str, tuple[str, ...]]

    def __post_init__(self):
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise ValueError("duplicate node names")
        for node, ps in self.parents.items():
            if node not in known:
                raise ValueError(f"parents listed for unknown node {node!r}")
            for p in ps:
                if p not in known:
                    raise ValueError(f"{node!r} has unknown parent {p!r}")
                if p == node:
                    raise ValueError(f"self-loop on {node!r}")
        object.__setattr__(
            self,
            "parents",
            {n: tuple(self.parents.get(n, ())) for n in self.nodes},
        )
        if self.topological_order() is None:
            raise ValueError("graph contains a cycle")

    def topological_order(self) -> list[str] | None:
        indeg = {n: len(self.parents[n]) for n in self.nodes}
        children: dict[str, list[str]] = {n: [] for n in self.nodes}
        for n, ps in self.parents.items():
            for p in ps:
                children[p].append(n)
        frontier = [n for n in self.nodes if indeg[n] == 0]
        order = []
        while frontier:
            n = frontier.pop()
            order.append(n)
            for c in children[n]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    frontier.append(c)
        return order if len(order) == len(self.nodes) else None

    def edges(self) -> list[tuple[str, str]]:
        return [(p, n) for n in self.nodes for p in self.parents[n]]


@dataclass
class EncodedTable:
    """Column-wise integer encoding of categorical rows.

    State spaces are sorted label lists; each column holds the index of the
    row's state.  All scoring and fitting operate on this form.
    """

    nodes: list[str]
    states: dict[str, list[str]]
    columns: dict[str, np.ndarray]
    n_rows: int
    _index: dict[str, dict[str, int]] = field(default_factory=dict, repr=False)

    @classmethod
    def from_rows(
        cls,
        rows: list[dict[str, str]],
        nodes: list[str] | None = None,
        state_spaces: dict[str, list[str]] | None = None,
    ) -> "EncodedTable":
        if not rows:
            raise EmptyData("no rows to encode")
        if nodes is None:
            nodes = sorted(rows[0].keys())
        states = {}
        for n in nodes:
            if state_spaces is not None and n in state_spaces:
                states[n] = list(state_spaces[n])
            else:
                states[n] = sorted({row[n] for row in rows})
        index = {n: {s: i for i, s in enumerate(states[n])} for n in nodes}
        columns = {
            n: np.array([index[n][row[n]] for row in rows], dtype=np.int64)
            for n in nodes
        }
        return cls(
            nodes=list(nodes),
            states=states,
            columns=columns,
            n_rows=len(rows),
            _index=index,
        )

    def arity(self, node: str) -> int:
        return len(self.states[node])

    def state_index(self, node: str, state: str) -> int:
        if not self._index:
            self._index = {
                n: {s: i for i, s in enumerate(self.states[n])} for n in self.nodes
            }
        return self._index[node][state]


def as_table(data, nodes=None, state_spaces=None) -> EncodedTable:
    if isinstance(data, EncodedTable):
        return data
    return EncodedTable.from_rows(data, nodes=nodes, state_spaces=state_spaces)
