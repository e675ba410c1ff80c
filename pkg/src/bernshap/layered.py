"""Second deterministic estimate: sorted min-subtraction layer decomposition.

Repeatedly subtracting the minimum of the surviving probabilities splits the
sorted sequence into layers (n_k, r_k): r_k is the k-th increment between
successive distinct values and n_k the number of players still above it.
Each layer is a homogeneous game with closed-form per-player value

    phi^(k) = (1/n_k) (1 - (1 - r_k)^{n_k}),

and a player's estimate combines the layers it belongs to.  Two combination
variants ship: LITERAL weights layer k by n_k * r_k; UNWEIGHTED adds the
layer values as they are and is the default because it alone reduces to the
homogeneous closed form on constant-probability games.

The decomposition here sorts once and takes successive differences of the
order statistics, which is equivalent to the quadratic repeated-scan
procedure but runs in O(n log n); ties collapse into a single layer.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .game import ShapleyVector

Number = Union[float, Fraction]

VARIANT_LITERAL = "literal"
VARIANT_UNWEIGHTED = "unweighted"


@dataclass(frozen=True)
class Layer:
    """One homogeneous slab: n_k surviving players sharing increment r_k > 0."""

    n_k: int
    r_k: Number

    def __post_init__(self) -> None:
        if self.n_k < 1:
            raise ValueError("a layer needs at least one surviving player")
        if not self.r_k > 0:
            raise ValueError("layer increments must be positive")


@dataclass(frozen=True)
class LayerDecomposition:
    """Layers plus each player's depth (how many layers it participates in).

    Depth is the rank of p_i among the distinct nonzero probabilities, so
    sum of r_k over a player's layers reconstructs p_i exactly; players with
    p_i = 0 have depth 0.
    """

    layers: tuple[Layer, ...]
    depth: tuple[int, ...]


def decompose_layers(probs: Sequence[Number]) -> LayerDecomposition:
    """Split probabilities into (n_k, r_k) layers; at most one layer per distinct value."""
    vals = list(probs)
    if not vals:
        raise ValueError("cannot decompose an empty probability sequence")
    for p in vals:
        if not 0 <= p <= 1:
            raise ValueError(f"probabilities must be in [0, 1], got {p}")
    distinct = sorted(set(p for p in vals if p > 0))
    nonzero_total = sum(1 for p in vals if p > 0)
    layers = []
    prev: Number = 0
    survivors = nonzero_total
    for v in distinct:
        layers.append(Layer(survivors, v - prev))
        survivors -= sum(1 for p in vals if p == v)
        prev = v
    depth = tuple(bisect.bisect_right(distinct, p) if p > 0 else 0 for p in vals)
    return LayerDecomposition(tuple(layers), depth)


def layer_shapley(layer: Layer) -> float:
    """Per-player value of one homogeneous layer: (1/n_k)(1 - (1 - r_k)^{n_k})."""
    r = float(layer.r_k)
    if r == 1.0:
        return 1.0 / layer.n_k
    return -math.expm1(layer.n_k * math.log1p(-r)) / layer.n_k


def _combine(
    layer_values: np.ndarray, layer_weights: np.ndarray, depth: np.ndarray, variant: str
) -> np.ndarray:
    if variant == VARIANT_LITERAL:
        per_layer = layer_weights * layer_values
    elif variant == VARIANT_UNWEIGHTED:
        per_layer = layer_values
    else:
        raise ValueError(f"variant must be 'literal' or 'unweighted', got {variant!r}")
    prefix = np.concatenate([[0.0], np.cumsum(per_layer)])
    return prefix[depth]


def shapley_layered(
    probs: Sequence[Number] | np.ndarray,
    variant: str = VARIANT_UNWEIGHTED,
    normalize: str = "none",
) -> ShapleyVector:
    """Layer-decomposition estimate for every player.

    ``normalize`` rescales the combined values by a single factor so they
    total T(E) (``'te'``) or 1 (``'one'``); ``'none'`` leaves the raw
    combination.  Accepts a float array (fast vectorized path, fine at
    n = 10^6) or any sequence of floats/Fractions.
    """
    if normalize not in ("none", "te", "one"):
        raise ValueError(f"normalize must be 'none', 'te' or 'one', got {normalize!r}")
    arr = np.asarray(probs, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("probs must be a nonempty 1-d sequence")
    if np.any(arr < 0) or np.any(arr > 1):
        raise ValueError("probabilities must be in [0, 1]")
    mask = arr > 0
    positive = arr[mask]
    meta: dict = {"variant": variant, "normalize": normalize}
    if positive.size == 0:
        return ShapleyVector((0.0,) * arr.size, method="layered", meta=meta | {"all_zero": True})
    distinct, inverse, counts = np.unique(positive, return_inverse=True, return_counts=True)
    survivors = positive.size - np.concatenate([[0], np.cumsum(counts[:-1])])
    increments = np.diff(distinct, prepend=0.0)
    with np.errstate(divide="ignore"):
        log_keep = np.log1p(-increments)  # -inf at r_k = 1 gives the exact limit 0
    layer_vals = -np.expm1(survivors * log_keep) / survivors
    depth = np.zeros(arr.size, dtype=np.int64)
    depth[mask] = inverse + 1  # rank of p_i among the distinct nonzero values
    values = _combine(layer_vals, survivors * increments, depth, variant)
    meta["layers"] = int(distinct.size)
    if normalize != "none":
        if normalize == "te":
            if np.any(arr == 1.0):
                target = 1.0
            else:
                target = -math.expm1(float(np.sum(np.log1p(-arr))))
        else:
            target = 1.0
        total = float(values.sum())
        if total > 0:
            values = values * (target / total)
        meta["target"] = target
    return ShapleyVector(values, method="layered", meta=meta)


@dataclass(frozen=True)
class SecondOrderDiagnostic:
    """Linearization diagnostics for the layered estimate around small p.

    All terms may be negative; they describe error structure, they are not
    estimates.  ``in_validity`` is False once the linearized value itself
    goes negative, which signals the expansion has left its domain.
    """

    linearized: float
    isolation: float
    pairwise: float
    dominant_missing: float

    @property
    def in_validity(self) -> bool:
        return self.linearized >= 0


def second_order_diagnostic(probs: Sequence[float], i: int) -> SecondOrderDiagnostic:
    """First- and second-order structure of the estimate for player i.

    Returns the linearized value p_i (1 - sum_{j != i} p_j / 2), the
    isolation term -p_i (1 - p_i)^{n-1}, the pairwise overcorrection
    sum_{j != i} p_i p_j / 2, and the dominant missing third-order term
    (p_i / 3) e_2((p_j)_{j != i}) computed through the symmetric-sum
    recurrence.
    """
    from .exact import elementary_symmetric_sums

    arr = [float(p) for p in probs]
    n = len(arr)
    if not 0 <= i < n:
        raise ValueError(f"player index {i} out of range")
    p_i = arr[i]
    others = [p for j, p in enumerate(arr) if j != i]
    s1 = math.fsum(others)
    e2 = float(elementary_symmetric_sums(others, k_max=min(2, len(others)))[2]) if len(others) >= 2 else 0.0
    return SecondOrderDiagnostic(
        linearized=p_i * (1.0 - s1 / 2.0),
        isolation=-p_i * (1.0 - p_i) ** (n - 1),
        pairwise=p_i * s1 / 2.0,
        dominant_missing=p_i / 3.0 * e2,
    )


def worst_case_relative_error(probs: Sequence[float], i: int) -> float:
    """Bound (1 - p_i)^{n-1} / (1 - prod_{j != i}(1 - p_j)) on the relative error.

    Infinite when every other player has probability 0 (the denominator
    degenerates: the rest of the game carries no capacity at all).
    """
    arr = [float(p) for p in probs]
    n = len(arr)
    if not 0 <= i < n:
        raise ValueError(f"player index {i} out of range")
    prod = 1.0
    for j, p in enumerate(arr):
        if j != i:
            prod *= 1.0 - p
    denom = 1.0 - prod
    if denom == 0.0:
        return math.inf
    return (1.0 - arr[i]) ** (n - 1) / denom
