"""Permutation calibration for the pairwise and ranking two-sample tests.

Every permutation iteration ``l`` draws from its own generator, seeded by
``SeedSequence(seed, spawn_key=(l,))``.  Iterations can therefore be split
across worker threads in any way without changing the resulting p-value.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import PairwiseDataset, RankingArrays, RankingDataset
from .rankbreak import BreakMethod, RankBreaker, break_arrays, complete_comparisons
from .teststat import StatisticValue, TestReport, statistic, statistic_from_slots

DEFAULT_PAIRWISE_ITERATIONS = 5000
DEFAULT_RANKING_ITERATIONS = 200


class Smoothing(str, enum.Enum):
    PAPER_EXACT = "paper-exact"
    ADD_ONE = "add-one"


@dataclass(frozen=True)
class PermutationConfig:
    iterations: int = DEFAULT_PAIRWISE_ITERATIONS
    alpha: float = 0.05
    seed: int = 0
    smoothing: Smoothing = Smoothing.PAPER_EXACT
    workers: int = 1

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "smoothing", Smoothing(self.smoothing))


def iteration_rng(seed: int, iteration: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(int(seed), spawn_key=(int(iteration),))))


def p_value(t: float, permuted: np.ndarray, smoothing: Smoothing) -> float:
    """Fraction of permuted statistics at least as large as ``t``; ties count."""
    hits = int(np.count_nonzero(permuted >= t))
    if Smoothing(smoothing) is Smoothing.ADD_ONE:
        return (1 + hits) / (1 + len(permuted))
    return hits / len(permuted)


def _run_iterations(one: Callable[[int], float], iterations: int, workers: int) -> np.ndarray:
    out = np.empty(iterations, dtype=np.float64)
    if workers == 1 or iterations < 2:
        for ell in range(iterations):
            out[ell] = one(ell)
        return out

    def chunk(bounds):
        lo, hi = bounds
        for ell in range(lo, hi):
            out[ell] = one(ell)

    edges = np.linspace(0, iterations, min(workers, iterations) + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(chunk, zip(edges[:-1], edges[1:])))
    return out


# --- pairwise --------------------------------------------------------------

def _hypergeometric_split(kp, kq, total, rng):
    """X' ~ Hypergeometric(kp + kq trials, total successes, kp draws) per slot."""
    xp = np.zeros_like(kp)
    live = (kp > 0) & (total > 0)
    if live.any():
        good = total[live]
        xp[live] = rng.hypergeometric(good, kp[live] + kq[live] - good, kp[live])
    return xp


def permute_pairwise_once(x: PairwiseDataset, y: PairwiseDataset,
                          rng: np.random.Generator) -> tuple[PairwiseDataset, PairwiseDataset]:
    """Pool each slot's outcomes and redeal ``k^p`` of them to the first population."""
    if x.d != y.d or x.setting != y.setting:
        raise ValueError("datasets are not aligned")
    kp, xv = x.slots()
    kq, yv = y.slots()
    total = xv + yv
    xp = _hypergeometric_split(kp, kq, total, rng)
    return (PairwiseDataset.from_slots(x.d, x.setting, kp, xp),
            PairwiseDataset.from_slots(x.d, x.setting, kq, total - xp))


def pairwise_permutation_test(x: PairwiseDataset, y: PairwiseDataset,
                              cfg: PermutationConfig = PermutationConfig()) -> TestReport:
    stat = statistic(x, y)
    kp, xv = x.slots()
    kq, yv = y.slots()
    total = xv + yv
    # only slots active in T can move it; the rest are dropped up front
    active = (kp > 1) & (kq > 1)
    kp, kq, total = kp[active], kq[active], total[active]

    def one(ell: int) -> float:
        rng = iteration_rng(cfg.seed, ell)
        xp = _hypergeometric_split(kp, kq, total, rng)
        return float(statistic_from_slots(kp, kq, xp, total - xp))

    t = float(statistic_from_slots(kp, kq, xv[active], yv[active]))
    permuted = _run_iterations(one, cfg.iterations, cfg.workers)
    p = p_value(t, permuted, cfg.smoothing)
    return TestReport(StatisticValue(t, stat.active_pairs), reject=p < cfg.alpha, p_value=p,
                      seed=int(cfg.seed), iterations=cfg.iterations)


# --- rankings --------------------------------------------------------------

def ranking_permutation_test(s_p: RankingDataset, s_q: RankingDataset,
                             breaker: RankBreaker = RankBreaker(BreakMethod.COMPLETE),
                             cfg: PermutationConfig = PermutationConfig(
                                 iterations=DEFAULT_RANKING_ITERATIONS)) -> TestReport:
    """Label-shuffling permutation test on rankings.

    The observed statistic breaks both samples with the generator
    ``SeedSequence(seed, spawn_key=(2**32,))``, a key no iteration uses; each iteration then reassigns the pooled rankings
    and re-breaks them using that iteration's own stream.
    """
    if s_p.d != s_q.d:
        raise ValueError(f"dimension mismatch: {s_p.d} vs {s_q.d}")
    if len(s_p) == 0 or len(s_q) == 0:
        raise ValueError("both ranking samples must be non-empty")
    d = s_p.d
    n_p = len(s_p)
    pooled = RankingArrays(d, np.concatenate([s_p.flat.items, s_q.flat.items]),
                           np.concatenate([s_p.flat.lengths, s_q.flat.lengths]))
    n_total = len(pooled)
    method = breaker.method

    observed_rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(int(cfg.seed), spawn_key=(2**32,))))
    x = break_arrays(method, s_p.flat, observed_rng)
    y = break_arrays(method, s_q.flat, observed_rng)
    stat = statistic(x, y)

    if method is BreakMethod.COMPLETE:
        # deterministic breaking: precompute comparisons once, regroup by mask
        src, slot, win, n_slots = complete_comparisons(pooled)

        def one(ell: int) -> float:
            rng = iteration_rng(cfg.seed, ell)
            in_p = np.zeros(n_total, dtype=bool)
            in_p[rng.permutation(n_total)[:n_p]] = True
            mask = in_p[src]
            kp = np.bincount(slot[mask], minlength=n_slots)
            xp = np.bincount(slot[mask], weights=win[mask], minlength=n_slots)
            kq = np.bincount(slot[~mask], minlength=n_slots)
            yq = np.bincount(slot[~mask], weights=win[~mask], minlength=n_slots)
            return float(statistic_from_slots(kp, kq, xp, yq))
    else:
        def one(ell: int) -> float:
            rng = iteration_rng(cfg.seed, ell)
            perm = rng.permutation(n_total)
            xl = break_arrays(method, pooled.take(perm[:n_p]), rng)
            yl = break_arrays(method, pooled.take(perm[n_p:]), rng)
            kp, xv = xl.slots()
            kq, yv = yl.slots()
            return float(statistic_from_slots(kp, kq, xv, yv))

    permuted = _run_iterations(one, cfg.iterations, cfg.workers)
    kp, xv = x.slots()
    kq, yv = y.slots()
    t = float(statistic_from_slots(kp, kq, xv, yv))
    p = p_value(t, permuted, cfg.smoothing)
    return TestReport(StatisticValue(t, stat.active_pairs), reject=p < cfg.alpha, p_value=p,
                      seed=int(cfg.seed), iterations=cfg.iterations)
