"""Exact inference: variable elimination, with full-joint enumeration as an
independent cross-check oracle for small networks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import JointTooLarge
from .cpt import BayesNet

JOINT_LIMIT = 2**20


@dataclass(frozen=True)
class Posterior:
    query: str
    states: tuple[str, ...]
    probs: np.ndarray
    zero_evidence: bool = False

    def prob_of(self, state: str) -> float:
        return float(self.probs[self.states.index(state)])


@dataclass(frozen=True)
class _Factor:
    vars: tuple[str, ...]
    table: np.ndarray  # one axis per var, aligned with vars

    def restrict(self, var: str, index: int) -> "_Factor":
        axis = self.vars.index(var)
        return _Factor(
            vars=self.vars[:axis] + self.vars[axis + 1 :],
            table=np.take(self.table, index, axis=axis),
        )

    def marginalize(self, var: str) -> "_Factor":
        axis = self.vars.index(var)
        return _Factor(
            vars=self.vars[:axis] + self.vars[axis + 1 :],
            table=self.table.sum(axis=axis),
        )


def _multiply(a: _Factor, b: _Factor) -> _Factor:
    out_vars = a.vars + tuple(v for v in b.vars if v not in a.vars)
    a_shape = a.table.shape + (1,) * (len(out_vars) - len(a.vars))
    at = a.table.reshape(a_shape)
    perm = [b.vars.index(v) if v in b.vars else None for v in out_vars]
    b_axes = [i for i, p in enumerate(perm) if p is not None]
    bt = np.moveaxis(b.table, [perm[i] for i in b_axes], range(len(b_axes)))
    # b's axes come first in bt after moveaxis ordering; realign to out_vars
    bt_full = bt.reshape(
        tuple(
            b.table.shape[perm[i]] if perm[i] is not None else 1
            for i in range(len(out_vars))
        )
    )
    return _Factor(vars=out_vars, table=at * bt_full)


def _node_factor(net: BayesNet, node: str) -> _Factor:
    cpt = net.cpts[node]
    shape = tuple(net.arity(p) for p in cpt.parent_order) + (net.arity(node),)
    return _Factor(
        vars=cpt.parent_order + (node,), table=cpt.table.reshape(shape)
    )


def _validated(net: BayesNet, evidence: dict[str, str], query: str) -> dict[str, int]:
    if query in evidence:
        raise ValueError(f"query node {query!r} is part of the evidence")
    if query not in net.state_spaces:
        raise KeyError(query)
    ev_idx = {}
    for var, state in evidence.items():
        ev_idx[var] = net.state_spaces[var].index(state)
    return ev_idx


def infer(net: BayesNet, evidence: dict[str, str], query: str) -> Posterior:
    """Posterior P(query | evidence) by variable elimination.

    Unobserved non-query nodes are marginalized out in min-degree order.
    Evidence with probability zero under the network yields a uniform
    posterior flagged as zero_evidence.
    """
    ev_idx = _validated(net, evidence, query)
    factors = []
    for node in net.dag.nodes:
        f = _node_factor(net, node)
        for var, idx in ev_idx.items():
            if var in f.vars:
                f = f.restrict(var, idx)
        factors.append(f)

    hidden = [n for n in net.dag.nodes if n != query and n not in ev_idx]
    # min-degree: eliminate the variable entangled with the fewest others
    while hidden:
        neighbors = {h: set() for h in hidden}
        for f in factors:
            for v in f.vars:
                if v in neighbors:
                    neighbors[v].update(x for x in f.vars if x != v)
        var = min(hidden, key=lambda h: (len(neighbors[h]), hidden.index(h)))
        hidden.remove(var)
        involved = [f for f in factors if var in f.vars]
        rest = [f for f in factors if var not in f.vars]
        prod = involved[0]
        for f in involved[1:]:
            prod = _multiply(prod, f)
        rest.append(prod.marginalize(var))
        factors = rest

    result = factors[0]
    for f in factors[1:]:
        result = _multiply(result, f)
    # remaining factors may be scalars plus the query factor
    if result.vars != (query,):
        axis = result.vars.index(query)
        table = np.moveaxis(result.table, axis, 0)
        table = table.reshape(net.arity(query), -1).sum(axis=1)
    else:
        table = result.table
    total = float(table.sum())
    states = tuple(net.state_spaces[query])
    if total <= 0.0:
        return Posterior(
            query=query,
            states=states,
            probs=np.full(len(states), 1.0 / len(states)),
            zero_evidence=True,
        )
    return Posterior(query=query, states=states, probs=table / total)


def enumerate_joint(net: BayesNet, evidence: dict[str, str], query: str) -> Posterior:
    """Same posterior via brute-force summation of the full joint."""
    ev_idx = _validated(net, evidence, query)
    joint_size = 1
    for n in net.dag.nodes:
        joint_size *= net.arity(n)
    if joint_size > JOINT_LIMIT:
        raise JointTooLarge(f"joint has {joint_size} states (> {JOINT_LIMIT})")

    free = [n for n in net.dag.nodes if n not in ev_idx]
    accum = np.zeros(net.arity(query))
    for combo in itertools.product(*(range(net.arity(n)) for n in free)):
        assignment = dict(ev_idx)
        assignment.update(zip(free, combo))
        p = 1.0
        for node in net.dag.nodes:
            cpt = net.cpts[node]
            arities = [net.arity(par) for par in cpt.parent_order]
            row = cpt.row_index(
                tuple(assignment[par] for par in cpt.parent_order), arities
            )
            p *= cpt.table[row, assignment[node]]
        accum[assignment[query]] += p
    total = accum.sum()
    states = tuple(net.state_spaces[query])
    if total <= 0.0:
        return Posterior(
            query=query,
            states=states,
            probs=np.full(len(states), 1.0 / len(states)),
            zero_evidence=True,
        )
    return Posterior(query=query, states=states, probs=accum / total)
