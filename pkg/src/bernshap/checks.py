"""Cross-module verification suites behind the ``verify`` command.

Each check replays an identity or agreement property on deterministic
randomized instances (fixed seeds) and reports pass/fail with a detail
string; nothing here throws on a failed property.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import exact, racs
from .game import (
    BernoulliGame,
    Capacity,
    beta_weight_identity,
    build_capacity_table,
    capacity_of_subset,
    conjugate,
    hitting_probability,
    mobius_invert,
    mobius_transform,
    random_set_masses,
    shapley_weight,
)

SCOPES = ("identity", "oracles", "bounds", "all")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_game(rng: random.Random, n: int, denominator_max: int = 64) -> BernoulliGame:
    probs = []
    for _ in range(n):
        den = rng.randint(1, denominator_max)
        num = rng.randint(0, den)
        probs.append(Fraction(num, den))
    return BernoulliGame.from_probs(probs)


def _random_normalized_capacity(rng: random.Random, n: int) -> Capacity:
    """Random belief-type capacity from dyadic masses on nonempty subsets.

    Masses are k/2^b with a power-of-two total, so every table entry is a
    short binary fraction and 1 - (1 - v) is exact; the conjugacy tests can
    then assert bitwise involution.
    """
    size = 1 << n
    units = np.zeros(size, dtype=np.int64)
    for mask in range(1, size):
        units[mask] = rng.randrange(0, 1 << 10)
    total = int(units.sum())
    denom = 1 << max(total - 1, 0).bit_length()  # next power of two >= total
    units[size - 1] += denom - total  # park the deficit on the full set
    values = mobius_invert(units.astype(np.longdouble) / np.longdouble(denom), n)
    return Capacity(n, values, normalized=True)


def check_beta_identity(n_max: int = 20) -> CheckResult:
    for n in range(1, n_max + 1):
        for s in range(n):
            if beta_weight_identity(n, s) != shapley_weight(n, s):
                return CheckResult(
                    "beta-identity", False, f"mismatch at n={n}, s={s}"
                )
    return CheckResult("beta-identity", True, f"exact equality for all n <= {n_max}")


def check_weight_normalization(n_max: int = 20) -> CheckResult:
    for n in range(1, n_max + 1):
        total = sum(math.comb(n - 1, s) * shapley_weight(n, s) for s in range(n))
        if total != 1:
            return CheckResult("weight-normalization", False, f"sum {total} at n={n}")
    return CheckResult("weight-normalization", True, f"weights sum to 1 for all n <= {n_max}")


def check_oracle_agreement(games: int = 100, seed: int = 2024, tol: float = 1e-10) -> CheckResult:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(games):
        g = _random_game(rng, rng.randint(1, 8))
        cap = build_capacity_table(g)
        perm = exact.shapley_permutation_all(cap)
        for i in range(g.n):
            vals = [
                exact.shapley_exact_enum(g, i),
                exact.shapley_exact_capacity(cap, i),
                float(perm[i]),
                exact.shapley_exact_symmetric(g, i),
                exact.shapley_exact_integral(g, i),
            ]
            spread = max(vals) - min(vals)
            worst = max(worst, spread)
            if spread > tol:
                return CheckResult(
                    "oracle-agreement", False, f"spread {spread:.2e} on n={g.n}, i={i}"
                )
    return CheckResult("oracle-agreement", True, f"{games} games, worst spread {worst:.2e}")


def check_efficiency(games: int = 100, seed: int = 777, tol: float = 1e-10) -> CheckResult:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(games):
        g = _random_game(rng, rng.randint(1, 12))
        total = math.fsum(exact.shapley_exact_symmetric(g, i) for i in range(g.n))
        gap = abs(total - g.total_capacity())
        worst = max(worst, gap)
        if gap > tol:
            return CheckResult("efficiency", False, f"gap {gap:.2e} on n={g.n}")
    return CheckResult("efficiency", True, f"{games} games, worst gap {worst:.2e}")


def check_hitting_roundtrip(games: int = 100, seed: int = 11, tol: float = 1e-12) -> CheckResult:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(games):
        g = _random_game(rng, rng.randint(1, 10))
        masses = random_set_masses(g)
        for smask in range(1 << g.n):
            gap = abs(hitting_probability(masses, smask) - capacity_of_subset(g, smask))
            worst = max(worst, gap)
            if gap > tol:
                return CheckResult(
                    "hitting-roundtrip", False, f"gap {gap:.2e} on n={g.n}, S={smask:b}"
                )
    return CheckResult("hitting-roundtrip", True, f"{games} games, worst gap {worst:.2e}")


def check_mobius_roundtrip(games: int = 50, seed: int = 5, tol: float = 1e-12) -> CheckResult:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(games):
        g = _random_game(rng, rng.randint(1, 10))
        cap = build_capacity_table(g)
        back = mobius_invert(mobius_transform(cap), cap.n)
        gap = float(np.max(np.abs(back - cap.values)))
        worst = max(worst, gap)
        if gap > tol:
            return CheckResult("mobius-roundtrip", False, f"gap {gap:.2e} on n={g.n}")
    return CheckResult("mobius-roundtrip", True, f"{games} games, worst gap {worst:.2e}")


def check_conjugacy(capacities: int = 100, seed: int = 31, tol: float = 1e-10) -> CheckResult:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(capacities):
        n = rng.randint(1, 8)
        cap = _random_normalized_capacity(rng, n)
        conj = conjugate(cap)
        if not np.array_equal(conjugate(conj).values, cap.values):
            return CheckResult("conjugacy", False, f"involution broke at n={n}")
        for i in range(n):
            gap = abs(exact.shapley_exact_capacity(cap, i) - exact.shapley_exact_capacity(conj, i))
            worst = max(worst, gap)
            if gap > tol:
                return CheckResult("conjugacy", False, f"value gap {gap:.2e} at n={n}, i={i}")
    return CheckResult("conjugacy", True, f"{capacities} capacities, worst gap {worst:.2e}")


def _random_sparse_game(rng: random.Random, n: int, budget: float = 0.1) -> BernoulliGame:
    l = rng.randint(200, 1000)
    per_player_cap = max(1, int(budget * l) // n)  # sum p_i <= budget by construction
    counts = [rng.randint(1, per_player_cap) for _ in range(n)]
    return BernoulliGame.from_probs([Fraction(c, l) for c in counts])


def check_sparse_accuracy(games: int = 100, seed: int = 99, rel_tol: float = 0.06) -> CheckResult:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(games):
        g = _random_sparse_game(rng, rng.randint(1, 12))
        rg = racs.rationalize(g)
        est = racs.shapley_racs(rg)
        for i in range(g.n):
            truth = exact.shapley_exact_symmetric(g, i)
            rel = abs(est.values[i] - truth) / truth
            worst = max(worst, rel)
            if rel > rel_tol:
                return CheckResult(
                    "sparse-accuracy", False, f"relative error {rel:.3%} on n={g.n}"
                )
    return CheckResult("sparse-accuracy", True, f"{games} games, worst relative error {worst:.3%}")


def check_perturbation_bound(games: int = 100, seed: int = 4, deltas=(0.01, 0.001)) -> CheckResult:
    rng = random.Random(seed)
    worst_margin = math.inf
    for _ in range(games):
        n = rng.randint(1, 10)
        g = _random_game(rng, n)
        for delta in deltas:
            bound = racs.perturbation_bound(delta, n)
            shifted = []
            for p in g.probs:
                eps = Fraction(rng.randint(-1000, 1000), 1000) * Fraction(repr(delta))
                q = min(max(p + eps, Fraction(0)), Fraction(1))
                shifted.append(q)
            gq = BernoulliGame.from_probs(shifted)
            for i in range(n):
                diff = abs(
                    exact.shapley_exact_symmetric(g, i) - exact.shapley_exact_symmetric(gq, i)
                )
                worst_margin = min(worst_margin, bound - diff)
                if diff > bound:
                    return CheckResult(
                        "perturbation-bound", False, f"|shift| {diff:.2e} > bound {bound:.2e}"
                    )
    return CheckResult(
        "perturbation-bound", True, f"{games} games, smallest slack {worst_margin:.2e}"
    )


def check_thm_bound(games: int = 100, seed: int = 71, residual_c: float = 1.0) -> CheckResult:
    rng = random.Random(seed)
    for _ in range(games):
        n = rng.randint(1, 10)
        l = rng.randint(4 * n, 40 * n)
        counts = [rng.randint(1, max(1, l // (2 * n))) for _ in range(n)]
        if sum(counts) > l // 2:  # keep r = m/l <= 0.5
            counts = [1] * n
        g = BernoulliGame.from_probs([Fraction(c, l) for c in counts])
        rg = racs.RationalizedGame(tuple(counts), l, source=g)
        est = racs.shapley_racs(rg)
        for i in range(n):
            truth = exact.shapley_exact_symmetric(g, i)
            report = racs.error_bound_thm(rg, i)
            allowed = report.thm_bound + residual_c * report.residual
            if abs(est.values[i] - truth) > allowed:
                return CheckResult(
                    "thm-bound",
                    False,
                    f"|err| {abs(est.values[i] - truth):.2e} > {allowed:.2e} (n={n})",
                )
    return CheckResult("thm-bound", True, f"{games} games within bound + residual")


def check_racs_total(games: int = 100, seed: int = 8, tol: float = 1e-12) -> CheckResult:
    rng = random.Random(seed)
    for _ in range(games):
        g = _random_game(rng, rng.randint(1, 12))
        rg = racs.rationalize(g)
        est = racs.shapley_racs(rg)
        expected = racs.racs_shared_factor(rg) if rg.m else 0.0
        if abs(est.total() - expected) > tol:
            return CheckResult("racs-total", False, f"total off by {est.total() - expected:.2e}")
    return CheckResult("racs-total", True, f"{games} games, totals match the shared factor")


def run_checks(scope: str = "all") -> list[CheckResult]:
    if scope not in SCOPES:
        raise ValueError(f"scope must be one of {SCOPES}, got {scope!r}")
    identity = [check_beta_identity, check_weight_normalization]
    oracles = [
        check_oracle_agreement,
        check_efficiency,
        check_hitting_roundtrip,
        check_mobius_roundtrip,
        check_conjugacy,
    ]
    bounds = [
        check_sparse_accuracy,
        check_perturbation_bound,
        check_thm_bound,
        check_racs_total,
    ]
    selected = {
        "identity": identity,
        "oracles": oracles,
        "bounds": bounds,
        "all": identity + oracles + bounds,
    }[scope]
    return [fn() for fn in selected]
