"""Pure-numpy counting kernels; fallback when the compiled core is absent."""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def contingency(child, parents, parent_arities, child_arity):
    """Count table of shape (prod(parent_arities), child_arity).

    Parent configurations are coded row-major: the first parent is the most
    significant digit.  ``child`` and each parent column are int64 state
    indices of equal length.
    """
    q = 1
    for a in parent_arities:
        q *= int(a)
    if len(parents) == 0:
        code = np.zeros(child.shape[0], dtype=np.int64)
    else:
        code = np.zeros(child.shape[0], dtype=np.int64)
        for col, a in zip(parents, parent_arities):
            code *= int(a)
            code += col
    flat = np.bincount(code * child_arity + child, minlength=q * child_arity)
    return flat.reshape(q, child_arity)


def loglik(counts):
    """Multinomial maximum-likelihood log-likelihood of a count table.

    sum over cells of N_jk * (ln N_jk - ln N_j), with 0 * ln 0 = 0.
    """
    counts = np.asarray(counts, dtype=np.float64)
    rows = counts.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = counts * (np.log(counts) - np.log(rows))
    return float(np.where(counts > 0, terms, 0.0).sum())
