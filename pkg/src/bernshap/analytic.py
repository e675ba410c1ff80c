"""Mean-field binomial-sum and Riemann-sum estimates.

Both reduce the coalition sum to one-dimensional expressions: the binomial
family replaces the coalition products prod(1 - p_j) by powers of their
average q-bar, and the Riemann family discretizes the diagonal integral of
the multilinear extension.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .game import weight_row_float


def qbar(probs: Sequence[float], i: int) -> float:
    """Average complement probability (1/(n-1)) sum_{j != i} (1 - p_j)."""
    arr = [float(p) for p in probs]
    n = len(arr)
    if n < 2:
        raise ValueError("qbar needs at least two players")
    if not 0 <= i < n:
        raise ValueError(f"player index {i} out of range")
    return math.fsum(1.0 - p for j, p in enumerate(arr) if j != i) / (n - 1)


def shapley_binomial_closed(probs: Sequence[float], i: int) -> float:
    """Geometric closed form (p_i/n)(1 - qbar^n)/(1 - qbar).

    This is the size-grouped coalition sum with each size-k product replaced
    by qbar^k and the binom(n-1, k) subset count kept, which collapses the
    weights to 1/n and telescopes; on homogeneous games it equals the exact
    closed form.  At qbar = 1 (all other players certain to stay out) the
    limit value p_i is returned.
    """
    arr = [float(p) for p in probs]
    n = len(arr)
    if not 0 <= i < n:
        raise ValueError(f"player index {i} out of range")
    if n == 1:
        return arr[0]
    q = qbar(arr, i)
    if q == 1.0:
        return arr[i]
    return arr[i] / n * (1.0 - q**n) / (1.0 - q)


def shapley_binomial_literal(probs: Sequence[float], i: int) -> float:
    """Weighted sum p_i sum_k (k!(n-1-k)!/n!) qbar^k with iterative powers.

    Kept for fidelity to the plain weighted binomial-type display, which
    drops the binom(n-1, k) subset count; it is therefore inconsistent with
    the homogeneous closed form (it does not return (1/n)(1-(1-p)^n) on
    constant-p games) and :func:`shapley_binomial_closed` is the default.
    """
    arr = [float(p) for p in probs]
    n = len(arr)
    if not 0 <= i < n:
        raise ValueError(f"player index {i} out of range")
    if n == 1:
        return arr[0]
    q = qbar(arr, i)
    w = weight_row_float(n)
    total = 0.0
    power = 1.0
    for k in range(n):
        total += w[k] * power
        power *= q
    return arr[i] * total


def shapley_riemann(probs: Sequence[float], i: int, nodes: int | None = None) -> float:
    """Right-endpoint Riemann sum of the multilinear-extension integral.

    p_i (1/N) sum_{k=1}^N prod_{j != i} (1 - (k/N) p_j); converges to the
    exact integral closed form with error O(1/N).  The p_i prefactor is part
    of the integrand's derivative and is required for the dummy property
    (p_i = 0 gives 0).  N defaults to n.
    """
    arr = np.asarray(probs, dtype=float)
    n = arr.size
    if not 0 <= i < n:
        raise ValueError(f"player index {i} out of range")
    if nodes is None:
        nodes = n
    if nodes < 1:
        raise ValueError(f"need at least one node, got {nodes}")
    p_i = float(arr[i])
    if p_i == 0.0:
        return 0.0
    others = np.delete(arr, i)
    t = np.arange(1, nodes + 1, dtype=float) / nodes
    prods = np.prod(1.0 - np.outer(t, others), axis=1)
    return p_i * float(prods.sum()) / nodes
