"""Core types for Bernoulli random-set games.

A game is a set of players that independently join a random coalition,
player ``i`` with probability ``p_i``.  The characteristic function is the
hitting capacity of that random set,

    T(S) = P(X intersects S) = 1 - prod_{j in S} (1 - p_j),

and the companion containment (belief) function is

    Bel(A) = P(X subset of A) = prod_{j not in A} (1 - p_j).

Probabilities are stored as exact rationals (``fractions.Fraction``); all
floating-point views are derived from them, never the other way around.
Dense capacity tables are bitmask-indexed and capped at n = 24 players;
larger games must go through the product-form operations that never
materialize a table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

#: Hard cap for dense 2^n tables (memory / time ceiling of the exponential paths).
MAX_TABLE_PLAYERS = 24

ProbabilityLike = Union[Fraction, int, float, str]
SubsetLike = Union[int, Iterable[int]]


class GameSizeError(ValueError):
    """Raised when an exponential-cost operation is asked to exceed its size cap."""


def parse_probability(value: ProbabilityLike) -> Fraction:
    """Parse a probability into an exact rational in [0, 1].

    Accepts ``Fraction``, ``int``, strings like ``"3/7"`` or ``"0.25"``
    (finite decimals are read exactly, ``0.2 -> 1/5``), and floats, which
    are read through their shortest decimal repr so ``0.1`` means 1/10
    rather than the nearest binary double.
    """
    if isinstance(value, Fraction):
        p = value
    elif isinstance(value, bool):
        raise TypeError("probability must be a number or string, not bool")
    elif isinstance(value, int):
        p = Fraction(value)
    elif isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"probability must be finite, got {value!r}")
        p = Fraction(repr(value))
    elif isinstance(value, str):
        try:
            p = Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse probability {value!r}") from exc
    else:
        raise TypeError(f"cannot parse probability of type {type(value).__name__}")
    if not 0 <= p <= 1:
        raise ValueError(f"probability {value!r} is outside [0, 1]")
    return p


@dataclass(frozen=True)
class BernoulliGame:
    """Ordered players with exact rational inclusion probabilities."""

    players: tuple[tuple[str, Fraction], ...]

    def __post_init__(self) -> None:
        if not self.players:
            raise ValueError("a game needs at least one player")
        ids = [pid for pid, _ in self.players]
        if len(set(ids)) != len(ids):
            raise ValueError("player ids must be unique")
        for pid, p in self.players:
            if not 0 <= p <= 1:
                raise ValueError(f"player {pid!r} has probability {p} outside [0, 1]")

    @classmethod
    def from_probs(
        cls, probs: Sequence[ProbabilityLike], ids: Sequence[str] | None = None
    ) -> "BernoulliGame":
        parsed = [parse_probability(p) for p in probs]
        if ids is None:
            ids = [f"P{i + 1}" for i in range(len(parsed))]
        if len(ids) != len(parsed):
            raise ValueError("ids and probs must have the same length")
        return cls(tuple(zip(ids, parsed)))

    @property
    def n(self) -> int:
        return len(self.players)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(pid for pid, _ in self.players)

    @property
    def probs(self) -> tuple[Fraction, ...]:
        return tuple(p for _, p in self.players)

    @cached_property
    def probs_float(self) -> np.ndarray:
        return np.array([float(p) for _, p in self.players], dtype=float)

    def total_capacity(self) -> float:
        """T(E) = 1 - prod(1 - p_j), computed stably in log space."""
        q = 1.0 - self.probs_float
        if np.any(q == 0.0):
            return 1.0
        return -math.expm1(float(np.sum(np.log1p(-self.probs_float))))

    def total_capacity_exact(self) -> Fraction:
        prod = Fraction(1)
        for p in self.probs:
            prod *= 1 - p
        return 1 - prod


def subset_mask(subset: SubsetLike, n: int) -> int:
    """Normalize a subset given as a bitmask or an iterable of 0-based indices."""
    if isinstance(subset, (int, np.integer)):
        mask = int(subset)
        if mask < 0 or mask >= (1 << n):
            raise ValueError(f"bitmask {subset} out of range for n={n}")
        return mask
    mask = 0
    for j in subset:
        if not 0 <= j < n:
            raise ValueError(f"player index {j} out of range for n={n}")
        mask |= 1 << j
    return mask


def capacity_of_subset(game: BernoulliGame, subset: SubsetLike) -> float:
    """Hitting probability T(S) = 1 - prod_{j in S}(1 - p_j); 0 for the empty set."""
    mask = subset_mask(subset, game.n)
    if mask == 0:
        return 0.0
    prod = 1.0
    p = game.probs_float
    for j in range(game.n):
        if mask >> j & 1:
            prod *= 1.0 - p[j]
    return 1.0 - prod


@dataclass
class Capacity:
    """Dense bitmask-indexed table of a set function v on 2^E, n <= 24.

    ``values[mask]`` is v(S) for the subset with bitmask ``mask``; entry 0 must
    be 0.  Stored in extended precision.  Monotonicity is expected but only
    checked by :func:`validate_capacity`.  ``normalized`` declares v(E) = 1;
    the Bernoulli hitting capacity has T(E) < 1, so the flag is optional.
    """

    n: int
    values: np.ndarray
    normalized: bool = False

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("capacity needs n >= 1")
        if self.n > MAX_TABLE_PLAYERS:
            raise GameSizeError(
                f"dense capacity tables are capped at n={MAX_TABLE_PLAYERS}, got n={self.n}"
            )
        self.values = np.asarray(self.values, dtype=np.longdouble)
        if self.values.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} table entries, got {self.values.shape}")
        # v(empty)=0 and monotonicity are expectations, not construction errors:
        # belief tables of a possibly-empty random set carry Bel(empty) > 0, and
        # validate_capacity() is the one place that reports all violations.
        if self.normalized and self.values[-1] != 1:
            raise ValueError("normalized capacity must have v(E) = 1")

    def __getitem__(self, subset: SubsetLike) -> float:
        return float(self.values[subset_mask(subset, self.n)])


@dataclass
class MassFunction:
    """Nonnegative masses on 2^E; the distribution P(X = F) of a random set."""

    n: int
    masses: np.ndarray

    def __post_init__(self) -> None:
        self.masses = np.asarray(self.masses, dtype=np.longdouble)
        if self.masses.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} masses, got {self.masses.shape}")
        if np.any(self.masses < 0):
            raise ValueError("masses must be nonnegative")

    def total(self) -> float:
        return float(self.masses.sum())

    def __getitem__(self, subset: SubsetLike) -> float:
        return float(self.masses[subset_mask(subset, self.n)])


@dataclass(frozen=True)
class ShapleyVector:
    """Per-player values with the method that produced them and free-form metadata."""

    values: tuple
    method: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        values = self.values
        if isinstance(values, np.ndarray):
            finite = np.isfinite(values)
        else:
            finite = np.isfinite(np.asarray(values, dtype=float))
        if not finite.all():
            bad = int(np.argmin(finite))
            raise ValueError(f"non-finite Shapley value {values[bad]!r} at index {bad}")
        if isinstance(values, np.ndarray):
            object.__setattr__(self, "values", tuple(values.tolist()))
        elif not isinstance(values, tuple):
            object.__setattr__(self, "values", tuple(values))

    @property
    def n(self) -> int:
        return len(self.values)

    def as_floats(self) -> np.ndarray:
        return np.array([float(v) for v in self.values], dtype=float)

    def total(self) -> float:
        return float(math.fsum(float(v) for v in self.values))


def _check_table_size(n: int) -> None:
    if n > MAX_TABLE_PLAYERS:
        raise GameSizeError(
            f"operation materializes a 2^n table and is capped at n={MAX_TABLE_PLAYERS}; got n={n}"
        )


def build_capacity_table(game: BernoulliGame) -> Capacity:
    """Materialize T(S) for every subset (n <= 24)."""
    _check_table_size(game.n)
    prod = np.ones(1, dtype=np.longdouble)
    for p in game.probs_float:
        # appending player i doubles the table; entries with bit i pick up (1-p_i)
        prod = np.concatenate([prod, prod * np.longdouble(1.0 - p)])
    return Capacity(game.n, 1.0 - prod)


def belief_from_game(game: BernoulliGame) -> Capacity:
    """Containment function Bel(A) = prod_{j not in A}(1 - p_j); Bel(E) = 1.

    Bel(empty) = P(X = empty) = prod(1 - p_j) is nonzero whenever the random
    set can be empty, so this table intentionally departs from the v(empty)=0
    convention; its Möbius transform is the random-set distribution itself.
    """
    _check_table_size(game.n)
    bel = np.ones(1, dtype=np.longdouble)
    for p in game.probs_float:
        bel = np.concatenate([bel * np.longdouble(1.0 - p), bel])
    return Capacity(game.n, bel, normalized=True)


def random_set_masses(game: BernoulliGame) -> MassFunction:
    """Product-form distribution P(X = F) = prod_{j in F} p_j * prod_{j not in F}(1 - p_j)."""
    _check_table_size(game.n)
    m = np.ones(1, dtype=np.longdouble)
    for p in game.probs_float:
        m = np.concatenate([m * np.longdouble(1.0 - p), m * np.longdouble(p)])
    return MassFunction(game.n, m)


def mobius_transform(cap: Capacity) -> np.ndarray:
    """Signed mass table m(S) = sum_{T subset S} (-1)^{|S|-|T|} v(T).

    Inverts by subset summation: sum_{T subset S} m(T) = v(S).  The result is
    returned as a raw signed array because capacities that are not belief
    functions (the hitting capacity among them) have negative entries.
    """
    m = cap.values.copy()
    n = cap.n
    for b in range(n):
        step = 1 << b
        view = m.reshape(-1, 2 * step)
        view[:, step:] -= view[:, :step]
    return m


def mobius_invert(masses: np.ndarray, n: int) -> np.ndarray:
    """Subset-sum (zeta) transform; inverse of :func:`mobius_transform`."""
    v = np.asarray(masses, dtype=np.longdouble).copy()
    for b in range(n):
        step = 1 << b
        view = v.reshape(-1, 2 * step)
        view[:, step:] += view[:, :step]
    return v


def hitting_probability(mass: MassFunction, subset: SubsetLike) -> float:
    """P(X intersects S) = sum of masses of all sets meeting S; 0 for empty S."""
    smask = subset_mask(subset, mass.n)
    if smask == 0:
        return 0.0
    idx = np.arange(1 << mass.n)
    return float(mass.masses[(idx & smask) != 0].sum())


def conjugate(cap: Capacity) -> Capacity:
    """Conjugate capacity u(S) = 1 - v(complement of S); an involution.

    Requires v(E) = 1, otherwise u(empty) would not be 0.
    """
    if cap.values[-1] != 1:
        raise ValueError("conjugate requires a normalized capacity (v(E) = 1)")
    full = (1 << cap.n) - 1
    idx = np.arange(1 << cap.n)
    u = np.longdouble(1.0) - cap.values[full ^ idx]
    # u(E) = 1 - v(empty), so the result is normalized exactly when v(empty) = 0
    return Capacity(cap.n, u, normalized=bool(u[-1] == 1))


@dataclass(frozen=True)
class CapacityReport:
    """Result of :func:`validate_capacity`; reports, never raises."""

    empty_is_zero: bool
    normalized: bool
    monotone: bool
    monotonicity_violations: tuple[tuple[int, int], ...]
    mobius_nonnegative: bool
    min_mobius_mass: float

    @property
    def is_belief_function(self) -> bool:
        return self.normalized and self.mobius_nonnegative


def validate_capacity(cap: Capacity, max_violations: int = 50) -> CapacityReport:
    """Check normalization, monotonicity, and Möbius-mass positivity.

    A capacity with all Möbius masses >= 0 (and v(E)=1) is a belief function
    and therefore the containment function of a unique random set; the
    Bernoulli hitting capacity fails this test for n >= 2 whenever all
    probabilities are strictly inside (0, 1).
    """
    values = cap.values
    n = cap.n
    violations: list[tuple[int, int]] = []
    idx = np.arange(1 << n)
    for b in range(n):
        has = (idx >> b & 1) == 1
        sup = idx[has]
        sub = sup ^ (1 << b)
        bad = np.nonzero(values[sup] < values[sub])[0]
        for k in bad[: max(0, max_violations - len(violations))]:
            violations.append((int(sub[k]), int(sup[k])))
    masses = mobius_transform(cap)
    min_mass = float(masses.min())
    # tolerate roundoff from the alternating sums when classifying
    tol = 1e-12 * max(1.0, float(np.abs(masses).max()))
    return CapacityReport(
        empty_is_zero=bool(values[0] == 0),
        normalized=bool(abs(float(values[-1]) - 1.0) <= 1e-12),
        monotone=not violations,
        monotonicity_violations=tuple(violations),
        mobius_nonnegative=bool(min_mass >= -tol),
        min_mobius_mass=min_mass,
    )


@lru_cache(maxsize=None)
def shapley_weight(n: int, s: int) -> Fraction:
    """Coalition weight s!(n-1-s)!/n! as an exact rational."""
    if n < 1 or not 0 <= s <= n - 1:
        raise ValueError(f"need n >= 1 and 0 <= s <= n-1, got n={n}, s={s}")
    return Fraction(math.factorial(s) * math.factorial(n - 1 - s), math.factorial(n))


def beta_weight_identity(n: int, s: int) -> Fraction:
    """Alternating-sum form sum_l binom(n-1-s, l) (-1)^l / (l+s+1) of the weight.

    Evaluates the Beta-integral identity in exact big-integer rationals; the
    sum is catastrophically cancellative in floating point for n above ~15.
    Equals :func:`shapley_weight` exactly.
    """
    if n < 1 or not 0 <= s <= n - 1:
        raise ValueError(f"need n >= 1 and 0 <= s <= n-1, got n={n}, s={s}")
    total = Fraction(0)
    for l in range(n - s):
        term = Fraction(math.comb(n - 1 - s, l), l + s + 1)
        total += term if l % 2 == 0 else -term
    return total


@lru_cache(maxsize=None)
def weight_row_float(n: int) -> np.ndarray:
    """Float view of the weights s!(n-1-s)!/n! for s = 0..n-1, converted once."""
    return np.array([float(shapley_weight(n, s)) for s in range(n)], dtype=float)
