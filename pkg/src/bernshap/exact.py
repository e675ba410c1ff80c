"""Ground-truth Shapley computation for Bernoulli random-set games.

Five mutually cross-checking routes are provided:

* subset enumeration over coalitions of the other players (exponential,
  Gray-code order with an incrementally maintained product),
* the generic capacity-table sum, usable for arbitrary set functions,
* the permutation average (tiny n only; n! walks),
* a polynomial-time regrouping of the coalition sum by size through
  elementary symmetric sums of (1 - p_j), which is subtraction-free and is
  the designated ground truth at every n,
* the closed form of the diagonal partial-derivative integral of the
  multilinear extension, an alternating sum evaluated with error-free
  (fsum) summation.

The symmetric and integral routes also run in exact rational arithmetic, in
which case they return :class:`fractions.Fraction`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .game import (
    BernoulliGame,
    Capacity,
    GameSizeError,
    ShapleyVector,
    shapley_weight,
    weight_row_float,
)

#: Default cap for the O(2^(n-1)) enumeration path.
MAX_ENUM_PLAYERS = 24
#: Cap for the n! permutation oracle.
MAX_PERMUTATION_PLAYERS = 8

Number = Union[float, Fraction]


@dataclass(frozen=True)
class SymmetricSums:
    """Elementary symmetric sums e_0..e_k of a value multiset (e_0 = 1)."""

    e: tuple

    def __getitem__(self, k: int) -> Number:
        return self.e[k]

    def __len__(self) -> int:
        return len(self.e)


def elementary_symmetric_sums(values: Sequence[Number], k_max: int | None = None) -> SymmetricSums:
    """e_k = sum over k-subsets T of prod_{j in T} values_j, for k = 0..k_max.

    One pass of the polynomial-product recurrence; for nonnegative inputs
    every operation is an addition of nonnegative terms, so the computation
    is subtraction-free and numerically stable.  Fraction inputs are kept
    exact.
    """
    vals = list(values)
    if k_max is None:
        k_max = len(vals)
    if not 0 <= k_max <= len(vals):
        raise ValueError(f"k_max must be in [0, {len(vals)}], got {k_max}")
    if any(isinstance(v, Fraction) for v in vals):
        e: list[Number] = [Fraction(0)] * (k_max + 1)
        e[0] = Fraction(1)
        for v in vals:
            for k in range(k_max, 0, -1):
                e[k] = e[k] + v * e[k - 1]
        return SymmetricSums(tuple(e))
    arr = np.zeros(k_max + 1, dtype=float)
    arr[0] = 1.0
    for v in vals:
        arr[1:] += float(v) * arr[:-1]
    return SymmetricSums(tuple(arr.tolist()))


def shapley_homogeneous(n: int, p: Number) -> Number:
    """Closed form for equal inclusion probabilities: (1/n)(1 - (1-p)^n) = T(E)/n.

    Exact for Fraction input; numerically stable via expm1/log1p for floats.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if not 0 <= p <= 1:
        raise ValueError(f"need 0 <= p <= 1, got {p}")
    if isinstance(p, (Fraction, int)):
        return (1 - (1 - Fraction(p)) ** n) / n
    if p == 1.0:
        return 1.0 / n
    return -math.expm1(n * math.log1p(-float(p))) / n


def _enum_accumulate(one_minus_p: Sequence, acc: list, *, exact: bool) -> None:
    """Add prod over each subset of ``one_minus_p`` into acc[|subset|].

    Gray-code subset order: each step flips one element in or out, so the
    running product is maintained with a single multiply or divide.  In float
    mode the product is recomputed from scratch every 1024 steps to stop
    divide/multiply drift from accumulating.
    """
    m = len(one_minus_p)
    one = Fraction(1) if exact else 1.0
    acc[0] += one  # empty subset
    prod = one
    size = 0
    mask = 0
    for k in range(1, 1 << m):
        b = (k & -k).bit_length() - 1
        bit = 1 << b
        mask ^= bit
        if mask & bit:
            prod = prod * one_minus_p[b]
            size += 1
        else:
            prod = prod / one_minus_p[b]
            size -= 1
        if not exact and (k & 1023) == 0:
            prod = 1.0
            rem = mask
            while rem:
                j = (rem & -rem).bit_length() - 1
                prod *= one_minus_p[j]
                rem ^= 1 << j
        acc[size] += prod


def shapley_exact_enum(
    game: BernoulliGame, i: int, *, exact: bool = False, max_players: int = MAX_ENUM_PLAYERS
) -> Number:
    """Exact value by brute-force coalition enumeration, O(2^(n-1)).

    phi_i = sum over S not containing i of s!(n-1-s)!/n! * p_i * prod_{j in S}(1 - p_j).
    """
    n = game.n
    if n > max_players:
        raise GameSizeError(f"enumeration is capped at n={max_players}, got n={n}")
    if not 0 <= i < n:
        raise ValueError(f"player index {i} out of range")
    if exact:
        p_i = game.probs[i]
        if p_i == 0:
            return Fraction(0)
        others = [1 - game.probs[j] for j in range(n) if j != i]
        active = [q for q in others if q != 0]
        acc = [Fraction(0)] * (len(active) + 1)
        _enum_accumulate(active, acc, exact=True)
        return p_i * sum(shapley_weight(n, s) * acc[s] for s in range(len(acc)))
    p = game.probs_float
    p_i = float(p[i])
    if p_i == 0.0:
        return 0.0
    # players that always join contribute a zero factor; subsets containing
    # them vanish, so only subsets of the remaining players are enumerated
    active = [1.0 - float(p[j]) for j in range(n) if j != i and p[j] < 1.0]
    acc = [0.0] * (len(active) + 1)
    _enum_accumulate(active, acc, exact=False)
    w = weight_row_float(n)
    return p_i * math.fsum(w[s] * acc[s] for s in range(len(acc)))


def shapley_exact_capacity(cap: Capacity, i: int) -> float:
    """Exact value sum_{S not containing i} w(s) [v(S + i) - v(S)] for any capacity."""
    n = cap.n
    if not 0 <= i < n:
        raise ValueError(f"player index {i} out of range")
    idx = np.arange(1 << n, dtype=np.int64)
    without = idx[(idx >> i) & 1 == 0]
    sizes = np.bitwise_count(without.astype(np.uint64)).astype(np.int64)
    gains = cap.values[without | (1 << i)] - cap.values[without]
    w = weight_row_float(n)
    return float(np.dot(w[sizes], gains.astype(float)))


def shapley_permutation_all(cap: Capacity, max_players: int = MAX_PERMUTATION_PLAYERS) -> np.ndarray:
    """Average marginal contribution over all n! join orders, for every player."""
    n = cap.n
    if n > max_players:
        raise GameSizeError(f"permutation oracle is capped at n={max_players}, got n={n}")
    vals = [float(v) for v in cap.values]
    acc = [0.0] * n
    for perm in itertools.permutations(range(n)):
        mask = 0
        prev = 0.0
        for j in perm:
            mask |= 1 << j
            cur = vals[mask]
            acc[j] += cur - prev
            prev = cur
    scale = 1.0 / math.factorial(n)
    return np.array(acc) * scale


def shapley_permutation_oracle(
    cap: Capacity, i: int, max_players: int = MAX_PERMUTATION_PLAYERS
) -> float:
    """Permutation-definition value of one player; tiny-n oracle, O(n! n)."""
    if not 0 <= i < cap.n:
        raise ValueError(f"player index {i} out of range")
    return float(shapley_permutation_all(cap, max_players=max_players)[i])


def shapley_exact_symmetric(game: BernoulliGame, i: int, *, exact: bool = False) -> Number:
    """Exact value via elementary symmetric sums, polynomial time at any n.

    Groups the coalition sum by size; the sum over size-k coalitions of
    prod(1 - p_j) is exactly e_k of the values (1 - p_j), j != i, so

        phi_i = p_i * sum_k w(n, k) e_k.

    All terms are nonnegative (subtraction-free), which makes this the
    preferred ground-truth oracle.
    """
    n = game.n
    if not 0 <= i < n:
        raise ValueError(f"player index {i} out of range")
    if exact:
        p_i = game.probs[i]
        if p_i == 0:
            return Fraction(0)
        q = [Fraction(1) - game.probs[j] for j in range(n) if j != i]
        e = elementary_symmetric_sums(q)
        return p_i * sum(shapley_weight(n, k) * e[k] for k in range(n))
    p = game.probs_float
    p_i = float(p[i])
    if p_i == 0.0:
        return 0.0
    q = np.delete(1.0 - p, i)
    e = np.zeros(n, dtype=float)
    e[0] = 1.0
    for v in q:
        e[1:] += v * e[:-1]
    return p_i * float(np.dot(weight_row_float(n), e))


def shapley_exact_integral(game: BernoulliGame, i: int, *, exact: bool = False) -> Number:
    """Exact value as the closed form of p_i * integral_0^1 prod_{j != i}(1 - t p_j) dt.

    Expanding the product gives the alternating sum
    p_i * sum_s (-1)^s e_s((p_j)_{j != i}) / (s + 1); evaluated with fsum
    (error-free transformation summation) to tame the cancellation.
    """
    n = game.n
    if not 0 <= i < n:
        raise ValueError(f"player index {i} out of range")
    if exact:
        p_i = game.probs[i]
        if p_i == 0:
            return Fraction(0)
        ps = [game.probs[j] for j in range(n) if j != i]
        e = elementary_symmetric_sums(ps)
        total = Fraction(0)
        for s in range(n):
            term = e[s] / (s + 1)
            total += term if s % 2 == 0 else -term
        return p_i * total
    p = game.probs_float
    p_i = float(p[i])
    if p_i == 0.0:
        return 0.0
    others = np.delete(p, i)
    e = np.zeros(n, dtype=float)
    e[0] = 1.0
    for v in others:
        e[1:] += v * e[:-1]
    terms = [(-1.0) ** s * e[s] / (s + 1) for s in range(n)]
    return p_i * math.fsum(terms)


def shapley_one_vs_mean_reference(p_i: float, p_bar: float, n: int) -> float:
    """Heuristic reference [1 - (1-p_i)(1-p_bar)^(n-1)] / n.

    Coincides with the homogeneous closed form when p_i = p_bar but is *not*
    the exact value off that diagonal; exposed only as the reference term
    inside the estimation-error diagnostic.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if not (0 <= p_i <= 1 and 0 <= p_bar <= 1):
        raise ValueError("probabilities must be in [0, 1]")
    return (1.0 - (1.0 - p_i) * (1.0 - p_bar) ** (n - 1)) / n


def shapley_vector(game: BernoulliGame, method: str = "exact-symmetric", **kwargs) -> ShapleyVector:
    """Full per-player vector through one of the exact engines."""
    per_player = {
        "exact-enum": shapley_exact_enum,
        "exact-symmetric": shapley_exact_symmetric,
        "exact-integral": shapley_exact_integral,
    }
    if method in per_player:
        fn = per_player[method]
        values = tuple(fn(game, i, **kwargs) for i in range(game.n))
        return ShapleyVector(values, method=method)
    raise ValueError(f"unknown exact method {method!r}")
