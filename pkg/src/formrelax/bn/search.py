"""Greedy hill-climbing structure search over BIC.

Each step applies the single edge addition, deletion, or reversal with the
largest score improvement, subject to acyclicity and a parent cap, stopping
when no move improves the score by more than an epsilon.  The first restart
starts from the empty graph; further restarts start from seeded random DAGs
and the best-scoring result wins.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyData
from .graph import Dag, EncodedTable, as_table
from .scoring import ScoreCache


@dataclass(frozen=True)
class StructureSearchConfig:
    max_parents: int = 4
    max_iterations: int = 1000
    restarts: int = 3
    seed: int = 0
    score_epsilon: float = 1e-9
    enable_reversal: bool = True

    def __post_init__(self):
        if min(self.max_parents, self.max_iterations, self.restarts) < 1:
            raise ValueError("max_parents, max_iterations, restarts must be >= 1")
        if self.score_epsilon <= 0:
            raise ValueError("score_epsilon must be positive")


@dataclass
class SearchResult:
    dag: Dag
    score: float
    # incumbent score after each accepted move, one list per restart
    traces: list[list[float]] = field(default_factory=list)


class _Working:
    """Mutable adjacency during the climb."""

    def __init__(self, nodes: list[str], parents: dict[str, set[str]] | None = None):
        self.nodes = nodes
        self.parents: dict[str, set[str]] = (
            {n: set() for n in nodes} if parents is None else parents
        )

    def has_edge(self, x: str, y: str) -> bool:
        return x in self.parents[y]

    def creates_cycle(self, x: str, y: str) -> bool:
        """Would adding x -> y close a cycle (is x reachable from y)?"""
        stack, seen = [y], set()
        children = {n: [] for n in self.nodes}
        for c, ps in self.parents.items():
            for p in ps:
                children[p].append(c)
        while stack:
            n = stack.pop()
            if n == x:
                return True
            if n in seen:
                continue
            seen.add(n)
            stack.extend(children[n])
        return False

    def to_dag(self) -> Dag:
        order = {n: i for i, n in enumerate(self.nodes)}
        return Dag(
            nodes=tuple(self.nodes),
            parents={
                n: tuple(sorted(ps, key=order.__getitem__))
                for n, ps in self.parents.items()
            },
        )


def _random_start(nodes: list[str], max_parents: int, rng) -> _Working:
    perm = list(nodes)
    rng.shuffle(perm)
    w = _Working(nodes)
    for j in range(1, len(perm)):
        for i in range(j):
            if len(w.parents[perm[j]]) >= max_parents:
                break
            if rng.random() < 0.25:
                w.parents[perm[j]].add(perm[i])
    return w


def _climb(
    table: EncodedTable,
    start: _Working,
    cfg: StructureSearchConfig,
    local: ScoreCache,
    trace: list[float],
) -> tuple[_Working, float]:
    nodes = start.nodes
    w = start
    score = sum(local(n, w.parents[n]) for n in nodes)
    trace.append(score)
    for _ in range(cfg.max_iterations):
        best_delta = 0.0
        best_move = None
        for y in nodes:
            base_y = local(y, w.parents[y])
            for x in nodes:
                if x == y:
                    continue
                if not w.has_edge(x, y):
                    if (
                        len(w.parents[y]) < cfg.max_parents
                        and not w.creates_cycle(x, y)
                    ):
                        delta = local(y, w.parents[y] | {x}) - base_y
                        if delta > best_delta + cfg.score_epsilon:
                            best_delta, best_move = delta, ("add", x, y)
                else:
                    delta = local(y, w.parents[y] - {x}) - base_y
                    if delta > best_delta + cfg.score_epsilon:
                        best_delta, best_move = delta, ("del", x, y)
                    if cfg.enable_reversal and len(w.parents[x]) < cfg.max_parents:
                        w.parents[y].discard(x)
                        cyclic = w.creates_cycle(y, x)
                        w.parents[y].add(x)
                        if not cyclic:
                            delta = (
                                local(y, w.parents[y] - {x})
                                - base_y
                                + local(x, w.parents[x] | {y})
                                - local(x, w.parents[x])
                            )
                            if delta > best_delta + cfg.score_epsilon:
                                best_delta, best_move = delta, ("rev", x, y)
        if best_move is None:
            break
        op, x, y = best_move
        if op == "add":
            w.parents[y].add(x)
        elif op == "del":
            w.parents[y].discard(x)
        else:
            w.parents[y].discard(x)
            w.parents[x].add(y)
        new_score = score + best_delta
        if new_score < score:  # accepted moves must never lower the score
            raise AssertionError("hill climbing accepted a worsening move")
        score = new_score
        trace.append(score)
    return w, score


def learn_structure_detailed(
    data, cfg: StructureSearchConfig = StructureSearchConfig(), state_spaces=None
) -> SearchResult:
    table = as_table(data, state_spaces=state_spaces)
    if table.n_rows == 0:
        raise EmptyData("structure learning requires data")
    nodes = table.nodes
    local = ScoreCache(table)

    best: tuple[float, Dag] | None = None
    traces: list[list[float]] = []
    for restart in range(cfg.restarts):
        if restart == 0:
            start = _Working(list(nodes))
        else:
            rng = np.random.default_rng((cfg.seed, restart))
            start = _random_start(list(nodes), cfg.max_parents, rng)
        trace: list[float] = []
        w, score = _climb(table, start, cfg, local, trace)
        traces.append(trace)
        if best is None or score > best[0] + cfg.score_epsilon:
            best = (score, w.to_dag())
    assert best is not None
    return SearchResult(dag=best[1], score=best[0], traces=traces)


def learn_structure(
    data, cfg: StructureSearchConfig = StructureSearchConfig(), state_spaces=None
) -> Dag:
    return learn_structure_detailed(data, cfg, state_spaces=state_spaces).dag
