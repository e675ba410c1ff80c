"""Linear-time Shapley estimation through the sub-player (RACS) construction.

Rational probabilities p_i = m_i / l are rewritten over their least common
denominator; player i is then conceptually replaced by m_i independent
clones of probability 1/l, giving a homogeneous game of m = sum m_i
sub-players whose closed form yields the O(n) estimate

    phi_i(mu) = (m_i / m) * (1 - (1 - 1/l)^m).

The estimate is exact when every m_i = 1 and degrades in a regime-dependent
way as r = m/l grows; regime classification, the near-critical and dense
corrections, the mean-field variant, and the error bounds live here too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .game import BernoulliGame, ShapleyVector

#: Denominators beyond this are reported as overflow instead of silently used.
COMMON_DENOMINATOR_CAP = 10**18
#: Largest m for which the exact rational power (1 - 1/l)^m is evaluated.
EXACT_POWER_CAP = 10**4


class CommonDenominatorOverflow(OverflowError):
    """The least common denominator exceeded the practical big-integer cap."""


class RegimeLabel(str, Enum):
    SPARSE = "sparse"
    CRITICAL = "critical"
    DENSE = "dense"


@dataclass(frozen=True)
class Regime:
    """Operating point r = m/l with its classification label."""

    label: RegimeLabel
    r: float


@dataclass(frozen=True, eq=False)
class RationalizedGame:
    """Sub-player counts m_i over a common denominator l.

    ``counts`` may be any integer sequence (a numpy array for bulk games);
    ``source`` optionally points back at the originating game.
    ``rounding_delta`` is max |p_i - m_i/l| and is exactly 0 whenever the
    inputs were rationals with denominators dividing l.
    """

    counts: Sequence[int]
    l: int
    source: BernoulliGame | None = None
    rounding_delta: Fraction = Fraction(0)
    clamped: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.l < 1:
            raise ValueError(f"denominator l must be >= 1, got {self.l}")
        counts = np.asarray(self.counts)
        if counts.size == 0:
            raise ValueError("a rationalized game needs at least one player")
        if np.any(counts < 0) or np.any(counts > self.l):
            raise ValueError("sub-player counts must satisfy 0 <= m_i <= l")

    @property
    def n(self) -> int:
        return len(self.counts)

    @cached_property
    def m(self) -> int:
        """Total sub-player count as a Python int (no fixed-width overflow)."""
        counts = self.counts
        if isinstance(counts, np.ndarray) and counts.size * max(int(counts.max()), 1) < 2**62:
            return int(counts.sum(dtype=np.int64))
        return sum(int(c) for c in counts)

    @cached_property
    def counts_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float)

    @property
    def ids(self) -> tuple[str, ...]:
        if self.source is not None:
            return self.source.ids
        return tuple(f"P{i + 1}" for i in range(self.n))

    def prob(self, i: int) -> Fraction:
        if self.source is not None:
            return self.source.probs[i]
        return Fraction(int(self.counts[i]), self.l)


def common_denominator(fractions: Sequence[Fraction]) -> int:
    """LCM of the denominators, by repeated gcd (no factorization needed)."""
    l = 1
    for f in fractions:
        if not isinstance(f, Fraction):
            raise TypeError("common_denominator expects exact rationals")
        if not 0 < f <= 1:
            raise ValueError(f"probabilities must be in (0, 1], got {f}")
        l = math.lcm(l, f.denominator)
        if l > COMMON_DENOMINATOR_CAP:
            raise CommonDenominatorOverflow(
                f"least common denominator exceeds {COMMON_DENOMINATOR_CAP:.0e}"
            )
    return l


def rationalize(game: BernoulliGame, delta: float | Fraction | None = None) -> RationalizedGame:
    """Express the game over one denominator: p_i = m_i / l.

    Exact mode (``delta=None``) uses the probabilities as stored and has
    rounding_delta = 0.  Delta mode snaps each p_i to the decimal grid 1/P,
    P the smallest power of ten with 1/(2P) < delta, then reduces and takes
    the LCM of the reduced denominators so l is minimal for that grid.  A
    positive p_i that rounds to 0 is clamped to 1/l and flagged.
    """
    probs = game.probs
    if delta is None:
        nonzero = [p for p in probs if p > 0]
        l = common_denominator(nonzero) if nonzero else 1
        counts = tuple(int(p * l) for p in probs)
        return RationalizedGame(counts, l, source=game)
    delta = Fraction(repr(delta)) if isinstance(delta, float) else Fraction(delta)
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    P = 1
    while Fraction(1, 2 * P) >= delta:
        P *= 10
    q = [Fraction(round(p * P), P) for p in probs]
    clamped = tuple(i for i, (qi, pi) in enumerate(zip(q, probs)) if qi == 0 and pi > 0)
    nonzero = [qi for qi in q if qi > 0]
    l = common_denominator(nonzero) if nonzero else P
    counts = [int(qi * l) for qi in q]
    for i in clamped:
        counts[i] = 1
    rounding = max(
        (abs(probs[i] - Fraction(counts[i], l)) for i in range(game.n)), default=Fraction(0)
    )
    return RationalizedGame(tuple(counts), l, source=game, rounding_delta=rounding, clamped=clamped)


def racs_shared_factor(rg: RationalizedGame) -> float:
    """The common factor 1 - (1 - 1/l)^m, via exp(m log1p(-1/l)) for stability."""
    if rg.l == 1:
        return 1.0
    return -math.expm1(rg.m * math.log1p(-1.0 / rg.l))


def shapley_racs(rg: RationalizedGame, *, exact: bool = False) -> ShapleyVector:
    """phi_i(mu) = (m_i / m)(1 - (1 - 1/l)^m) for every player, O(n) total.

    Values are exactly proportional to m_i and sum to the shared factor.
    An all-zero game returns the zero vector with ``meta['all_zero']`` set.
    """
    m = rg.m
    if m == 0:
        values = (Fraction(0),) * rg.n if exact else (0.0,) * rg.n
        return ShapleyVector(values, method="racs", meta={"all_zero": True, "l": rg.l, "m": 0})
    meta = {"l": rg.l, "m": m, "r": m / rg.l}
    if exact:
        if m > EXACT_POWER_CAP:
            raise ValueError(f"exact rational power is capped at m={EXACT_POWER_CAP}, got m={m}")
        factor = 1 - Fraction(rg.l - 1, rg.l) ** m
        values = tuple(Fraction(int(c), m) * factor for c in rg.counts)
        return ShapleyVector(values, method="racs", meta=meta | {"exact": True})
    factor = racs_shared_factor(rg)
    vals = rg.counts_array * (factor / m)
    return ShapleyVector(vals, method="racs", meta=meta | {"factor": factor})


def classify_regime(
    rg: RationalizedGame, sparse_max: float = 0.5, dense_min: float = 2.0
) -> Regime:
    """Sparse / critical / dense operating point from r = m/l = sum p_i."""
    if not sparse_max < dense_min:
        raise ValueError("thresholds must satisfy sparse_max < dense_min")
    r = rg.m / rg.l
    if r <= sparse_max:
        label = RegimeLabel.SPARSE
    elif r <= dense_min:
        label = RegimeLabel.CRITICAL
    else:
        label = RegimeLabel.DENSE
    return Regime(label, r)


def correct_situation2(phi_mu: float) -> float:
    """Near-critical correction x(0.5 + 0.5x) with x = phi_mu / (1 - e^-1).

    Derived for r = m/l near 1, where the raw estimate approaches
    p_i (1 - e^-1) while the true value behaves like p_i (0.5 + 0.5 p_i).
    """
    if phi_mu < 0:
        raise ValueError(f"phi_mu must be nonnegative, got {phi_mu}")
    x = phi_mu / -math.expm1(-1.0)
    return x * (0.5 + 0.5 * x)


def correct_situation3(
    game: BernoulliGame,
    tau_low: float = 0.2,
    tau_high: float = 0.8,
    target: str = "te",
) -> ShapleyVector:
    """Dense-regime (bimodal) correction with a single rescaling.

    Players split at the thresholds: near-certain players (p_i >= tau_high)
    each get raw score 1/|L| since they compete for the pivotal role;
    everyone else gets p_i / n.  Raw scores are then scaled by one factor so
    the total equals T(E) (``target='te'``) or 1 (``target='one'``).  With no
    near-certain players in a dense game the bimodal picture does not apply
    and the uncorrected estimate is returned with a warning flag.
    """
    if not tau_low < tau_high:
        raise ValueError("need tau_low < tau_high")
    if target not in ("te", "one"):
        raise ValueError(f"target must be 'te' or 'one', got {target!r}")
    p = game.probs_float
    n = game.n
    high = p >= tau_high
    if not high.any():
        rg = rationalize(game)
        regime = classify_regime(rg)
        if regime.label is RegimeLabel.DENSE:
            base = shapley_racs(rg)
            meta = dict(base.meta) | {"warning": "no high-probability players; uncorrected"}
            return ShapleyVector(base.values, method="racs-corrected", meta=meta)
    raw = p / n
    if high.any():
        raw = raw.copy()
        raw[high] = 1.0 / int(high.sum())
    total = game.total_capacity() if target == "te" else 1.0
    raw_sum = float(raw.sum())
    values = raw * (total / raw_sum)
    meta = {"target": target, "tau_low": tau_low, "tau_high": tau_high, "n_high": int(high.sum())}
    return ShapleyVector(values, method="racs-corrected", meta=meta)


def meanfield_racs(rg: RationalizedGame) -> ShapleyVector:
    """Mean-field variant (p_i / p~)(1 - e^-p~) with p~ = m/l.

    Replaces (1 - 1/l)^m by e^(-m/l), valid for m <= l^2; beyond that the
    exponential substitution breaks down and a validity error is raised.
    """
    m = rg.m
    if m > rg.l**2:
        raise ValueError(f"mean-field replacement requires m <= l^2 (m={m}, l={rg.l})")
    if m == 0:
        return ShapleyVector((0.0,) * rg.n, method="meanfield", meta={"all_zero": True})
    p_tilde = m / rg.l
    factor = -math.expm1(-p_tilde)
    vals = rg.counts_array * (factor / m)
    return ShapleyVector(
        vals, method="meanfield", meta={"p_tilde": p_tilde, "factor": factor}
    )


@dataclass(frozen=True)
class ErrorReport:
    """Error components for the RACS estimate of one player.

    ``e1``: probability-space error |p_i - (1 - (1-1/l)^{m_i})|.
    ``e2``: estimation error of the estimate against the one-vs-mean
    reference expression.
    ``thm_bound``: leading worst-case bound m_i m / (2 l^2) plus the weight
    discrepancy |m_i/m - w_i/W| (identically zero here, asserted).
    ``residual``: the separately reported higher-order magnitude m_i m^2/l^3,
    never added into the bound.
    """

    e1: float = 0.0
    e2: float = 0.0
    thm_bound: float = 0.0
    weight_discrepancy: float = 0.0
    residual: float = 0.0

    def __post_init__(self) -> None:
        for name in ("e1", "e2", "thm_bound", "weight_discrepancy", "residual"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


def error_bound_thm(rg: RationalizedGame, i: int) -> ErrorReport:
    """Worst-case bound for |phi_i(T) - phi_i(mu)| when the other p_j are small."""
    if not 0 <= i < rg.n:
        raise ValueError(f"player index {i} out of range")
    m_i = int(rg.counts[i])
    m = rg.m
    l = rg.l
    if m == 0:
        return ErrorReport()
    # w_i/W = (m_i/l)/(m/l) reduces to m_i/m identically; keep the exact check
    discrepancy = abs(Fraction(m_i, m) - Fraction(m_i, l) / Fraction(m, l))
    assert discrepancy == 0, "weight discrepancy must vanish for rationalized games"
    leading = m_i * m / (2 * l**2)
    return ErrorReport(
        thm_bound=leading + float(discrepancy),
        weight_discrepancy=float(discrepancy),
        residual=m_i * m**2 / l**3,
    )


def error_decomposition(rg: RationalizedGame, i: int) -> ErrorReport:
    """Split the estimate's error into probability-space and estimation parts."""
    if not 0 <= i < rg.n:
        raise ValueError(f"player index {i} out of range")
    m_i = int(rg.counts[i])
    l = rg.l
    p_i = float(rg.prob(i))
    if m_i == 0:
        e1 = p_i  # (1 - 1/l)^0 = 1, so the approximation of p_i is 0
    elif l == 1:
        e1 = abs(p_i - 1.0)
    else:
        e1 = abs(p_i + math.expm1(m_i * math.log1p(-1.0 / l)))
    if rg.n > 1:
        others = [float(rg.prob(j)) for j in range(rg.n) if j != i]
        p_bar = sum(others) / len(others)
    else:
        p_bar = 0.0
    reference = (1.0 - (1.0 - p_i) * (1.0 - p_bar) ** (rg.n - 1)) / rg.n
    m = rg.m
    estimate = 0.0 if m == 0 else (m_i / m) * racs_shared_factor(rg)
    return ErrorReport(e1=e1, e2=abs(reference - estimate))


def perturbation_bound(delta: float, n: int) -> float:
    """Worst-case Shapley shift delta (n+1)/2 when every p_i moves by <= delta."""
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return delta * (n + 1) / 2


def pick_delta(epsilon: float, n: int) -> float:
    """Largest rounding tolerance guaranteeing a Shapley shift below epsilon."""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return 2 * epsilon / (n + 1)


def racs_corrected(
    game: BernoulliGame,
    rg: RationalizedGame | None = None,
    tau_low: float = 0.2,
    tau_high: float = 0.8,
    target: str = "te",
    sparse_max: float = 0.5,
    dense_min: float = 2.0,
) -> ShapleyVector:
    """Regime-aware estimate: raw in the sparse band, corrected elsewhere."""
    if rg is None:
        rg = rationalize(game)
    regime = classify_regime(rg, sparse_max=sparse_max, dense_min=dense_min)
    if regime.label is RegimeLabel.DENSE:
        out = correct_situation3(game, tau_low=tau_low, tau_high=tau_high, target=target)
        meta = dict(out.meta)
    else:
        base = shapley_racs(rg)
        if regime.label is RegimeLabel.CRITICAL:
            values = tuple(correct_situation2(v) for v in base.values)
        else:
            values = base.values
        out = ShapleyVector(values, method="racs-corrected", meta=dict(base.meta))
        meta = dict(out.meta)
    meta |= {"regime": regime.label.value, "r": regime.r}
    return ShapleyVector(out.values, method="racs-corrected", meta=meta)
