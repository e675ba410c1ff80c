"""Monte Carlo permutation-sampling baseline with reproducible counter seeding.

The deterministic estimators are benchmarked against the classical sampler:
draw K uniformly random join orders and average each player's marginal
contribution.  Walking one permutation left to right while maintaining the
running product prod(1 - p_j) of the players already seated makes every
marginal contribution an O(1) update, and the contributions along a single
permutation telescope to exactly T(E), which gives per-sample efficiency.

Randomness contract: the stream is Philox4x64 keyed by the seed, consumed as
raw 64-bit words.  Each counter step yields a block of 4 words, so every
permutation owns a fixed budget of ceil((n-1)/4) blocks; permutation t reads
its words from block offset t*budget, and Fisher-Yates swap k
(k = n-1 .. 1) uses word n-1-k of the budget reduced mod (k+1).  Chunks
therefore own disjoint counter ranges and are reduced in fixed chunk order,
so the estimate is bit-identical for identical (game, samples, seed, chunk)
no matter how the host schedules the chunks, and the drawn permutations do
not depend on the chunk size at all.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.random import Philox

from .game import BernoulliGame

DEFAULT_CHUNK = 1 << 14


@dataclass(frozen=True)
class McConfig:
    """Sampling budget, seed, and parallel-chunk granularity."""

    samples: int
    seed: int = 0
    chunk: int | None = None

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ValueError(f"need at least one sample, got {self.samples}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.chunk is not None and self.chunk < 1:
            raise ValueError("chunk must be positive")


@dataclass(frozen=True)
class McEstimate:
    """Per-player sample means and standard errors."""

    values: tuple[float, ...]
    stderr: tuple[float, ...]
    samples_used: int


def _chunk_permutations(n: int, seed: int, start: int, count: int) -> np.ndarray:
    """Permutations start..start+count-1 of the seeded stream, one per row."""
    perms = np.tile(np.arange(n), (count, 1))
    if n == 1:
        return perms
    # Philox.advance() steps whole 4-word counter blocks; pad each
    # permutation's budget to a block multiple so any start index is seatable.
    blocks_per_perm = (n - 1 + 3) // 4
    words_per_perm = 4 * blocks_per_perm
    bitgen = Philox(key=seed)
    bitgen.advance(start * blocks_per_perm)
    words = bitgen.random_raw(count * words_per_perm).reshape(count, words_per_perm)
    rows = np.arange(count)
    for k in range(n - 1, 0, -1):
        j = (words[:, n - 1 - k] % np.uint64(k + 1)).astype(np.int64)
        tmp = perms[rows, k].copy()
        perms[rows, k] = perms[rows, j]
        perms[rows, j] = tmp
    return perms


def permutation_marginals(
    game: BernoulliGame, seed: int, start: int, count: int
) -> tuple[np.ndarray, np.ndarray]:
    """(permutations, marginal contributions) for samples start..start+count-1.

    Row c of the marginals holds, position by position, the contribution
    p_player * prod(1 - p_j) over the players seated earlier; each row sums
    to T(E) up to roundoff.
    """
    n = game.n
    perms = _chunk_permutations(n, seed, start, count)
    p = game.probs_float
    q_seq = 1.0 - p[perms]
    prefix = np.ones_like(q_seq)
    if n > 1:
        prefix[:, 1:] = np.cumprod(q_seq[:, :-1], axis=1)
    marginals = p[perms] * prefix
    return perms, marginals


def shapley_mc(game: BernoulliGame, cfg: McConfig) -> McEstimate:
    """Permutation-sampling estimate with per-player standard errors.

    Every player appears exactly once per permutation, so each sample
    contributes one marginal per player; stderr is the per-player sample
    standard deviation divided by sqrt(K).
    """
    n = game.n
    k_total = cfg.samples
    chunk = cfg.chunk or DEFAULT_CHUNK
    # accumulate deviations from the first permutation's marginals: constant
    # marginals then give an exactly-zero variance and an exact mean
    perm0, marg0 = permutation_marginals(game, cfg.seed, 0, 1)
    pivot = np.empty(n)
    pivot[perm0[0]] = marg0[0]
    dev_sum = np.zeros(n)
    dev_sumsq = np.zeros(n)
    start = 0
    while start < k_total:
        count = min(chunk, k_total - start)
        perms, marginals = permutation_marginals(game, cfg.seed, start, count)
        dev = marginals - pivot[perms]
        flat = perms.ravel()
        dev_sum += np.bincount(flat, weights=dev.ravel(), minlength=n)
        dev_sumsq += np.bincount(flat, weights=(dev**2).ravel(), minlength=n)
        start += count
    means = pivot + dev_sum / k_total
    if k_total > 1:
        var = np.maximum(dev_sumsq - dev_sum**2 / k_total, 0.0) / (k_total - 1)
        stderr = np.sqrt(var / k_total)
    else:
        stderr = np.zeros(n)
    return McEstimate(tuple(means.tolist()), tuple(stderr.tolist()), k_total)


def mc_convergence_curve(
    game: BernoulliGame,
    seeds: Sequence[int],
    sample_grid: Sequence[int],
    oracle: Sequence[float] | None = None,
) -> list[dict]:
    """Max-abs-error against the oracle for every (seed, K) cell.

    The oracle defaults to the symmetric-sum exact values.  Returns one row
    per cell: {seed, samples, max_abs_error}.
    """
    if not seeds or not sample_grid:
        raise ValueError("seeds and sample_grid must be nonempty")
    if oracle is None:
        from .exact import shapley_exact_symmetric

        oracle = [shapley_exact_symmetric(game, i) for i in range(game.n)]
    ref = np.asarray(oracle, dtype=float)
    rows = []
    for seed in seeds:
        for k in sample_grid:
            est = shapley_mc(game, McConfig(samples=int(k), seed=int(seed)))
            err = float(np.max(np.abs(np.asarray(est.values) - ref)))
            rows.append({"seed": int(seed), "samples": int(k), "max_abs_error": err})
    return rows
