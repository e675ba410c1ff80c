"""Shared fixtures and the independent brute-force oracle.

The oracle here is deliberately primitive: it walks every coalition with
itertools.combinations and exact Fraction arithmetic, sharing no code with
the library's engines.  Expected values frozen in the tests were produced
by this oracle (or by direct arithmetic for closed forms).
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from bernshap import BernoulliGame, Capacity, mobius_invert


def bruteforce_shapley(probs, i) -> Fraction:
    """sum over coalitions S of s!(n-1-s)!/n! * p_i * prod_{j in S}(1 - p_j), exactly."""
    ps = [Fraction(p) if not isinstance(p, float) else Fraction(repr(p)) for p in probs]
    n = len(ps)
    others = [j for j in range(n) if j != i]
    total = Fraction(0)
    for size in range(n):
        weight = Fraction(
            math.factorial(size) * math.factorial(n - 1 - size), math.factorial(n)
        )
        for coalition in itertools.combinations(others, size):
            prod = Fraction(1)
            for j in coalition:
                prod *= 1 - ps[j]
            total += weight * prod
    return ps[i] * total


def bruteforce_capacity_shapley(values, n, i) -> float:
    """Generic-capacity Shapley via the coalition sum on a dense table."""
    total = 0.0
    for mask in range(1 << n):
        if mask >> i & 1:
            continue
        s = bin(mask).count("1")
        w = math.factorial(s) * math.factorial(n - 1 - s) / math.factorial(n)
        total += w * (float(values[mask | (1 << i)]) - float(values[mask]))
    return total


def random_rational_game(rng: random.Random, n: int, den_max: int = 64) -> BernoulliGame:
    probs = []
    for _ in range(n):
        den = rng.randint(1, den_max)
        probs.append(Fraction(rng.randint(0, den), den))
    return BernoulliGame.from_probs(probs)


def random_dyadic_capacity(rng: random.Random, n: int) -> Capacity:
    """Normalized capacity with binary-fraction entries (exact 1-x arithmetic)."""
    size = 1 << n
    units = np.zeros(size, dtype=np.int64)
    for mask in range(1, size):
        units[mask] = rng.randrange(0, 1 << 8)
    total = int(units.sum())
    denom = 1 << max(total - 1, 0).bit_length()
    units[size - 1] += denom - total
    values = mobius_invert(units.astype(np.longdouble) / np.longdouble(denom), n)
    return Capacity(n, values, normalized=True)


@pytest.fixture
def worked_example() -> BernoulliGame:
    """The three-device network: p = [1/2, 1/3, 1/6]."""
    return BernoulliGame.from_probs(["1/2", "1/3", "1/6"], ids=["web", "db", "iot"])


@pytest.fixture
def seven_player_game() -> BernoulliGame:
    return BernoulliGame.from_probs(["0.2", "0.5", "0.7", "0.3", "0.1", "0.9", "0.4"])


@pytest.fixture
def bimodal_game() -> BernoulliGame:
    return BernoulliGame.from_probs(["0.05", "0.95", "0.95"])
