"""Rank breaking: turning partial/total rankings into pairwise comparisons."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import PairwiseDataset, RankingArrays, RankingDataset, Setting


class BreakMethod(str, enum.Enum):
    RANDOM_DISJOINT = "random-disjoint"
    DETERMINISTIC_DISJOINT = "deterministic-disjoint"
    COMPLETE = "complete"


@dataclass(frozen=True)
class RankBreaker:
    method: BreakMethod = BreakMethod.COMPLETE

    def __post_init__(self):
        object.__setattr__(self, "method", BreakMethod(self.method))

    def apply(self, s: RankingDataset, rng: Optional[np.random.Generator] = None) -> PairwiseDataset:
        if self.method is not BreakMethod.COMPLETE and rng is None:
            raise ValueError(f"{self.method.value} breaking needs a random generator")
        return break_arrays(self.method, s.flat, rng)


@dataclass(frozen=True)
class RoundRobinSchedule:
    d: int
    rounds: tuple[tuple[tuple[int, int], ...], ...]

    def __len__(self) -> int:
        return len(self.rounds)


def round_robin(d: int) -> RoundRobinSchedule:
    """Circle-method schedule covering every unordered pair of range(d) once.

    For even d the last item stays put while 0..d-2 rotate; it meets the head
    of the rotated list and the remaining positions pair up from the outside
    in.  Odd d adds a phantom item whose partner sits out that round.
    """
    if d < 2:
        raise ValueError("round robin needs d >= 2")
    n = d if d % 2 == 0 else d + 1
    fixed = n - 1
    rounds = []
    for r in range(n - 1):
        rot = [(r + i) % (n - 1) for i in range(n - 1)]
        pairs = [(rot[0], fixed)] + [(rot[i], rot[n - 1 - i]) for i in range(1, n // 2)]
        rounds.append(tuple(p for p in pairs if d not in p))
    return RoundRobinSchedule(d, tuple(rounds))


def _to_dataset(d: int, winners: np.ndarray, losers: np.ndarray) -> PairwiseDataset:
    lo = np.minimum(winners, losers)
    hi = np.maximum(winners, losers)
    flat = lo * d + hi
    counts = np.bincount(flat, minlength=d * d).reshape(d, d)
    wins = np.bincount(flat[winners < losers], minlength=d * d).reshape(d, d)
    return PairwiseDataset(counts, wins, Setting.SYMMETRIC)


def _segment_local_index(lengths: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    seg = np.repeat(np.arange(len(lengths)), lengths)
    starts = np.cumsum(lengths) - lengths
    return seg, np.arange(int(lengths.sum())) - starts[seg]


def random_disjoint_pairs(arrays: RankingArrays, rng: np.random.Generator):
    """(winners, losers) of a uniform random matching inside every ranking.

    One block of uniforms is drawn for all positions at once and each
    ranking's positions are ordered by their keys; consecutive positions of
    that random order are paired and an odd leftover is dropped.
    """
    if len(arrays) == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    keys = rng.random(len(arrays.items))
    seg, local = _segment_local_index(arrays.lengths)
    # per-segment shuffle of global positions; segment layout is unchanged
    order = np.lexsort((keys, seg))
    lengths_at = arrays.lengths[seg]
    first = (local % 2 == 0) & (local + 1 < lengths_at)
    a = order[first]
    b = order[np.nonzero(first)[0] + 1]
    # the higher-ranked item (smaller position) wins
    winner_pos = np.minimum(a, b)
    loser_pos = np.maximum(a, b)
    return arrays.items[winner_pos], arrays.items[loser_pos]


def complete_comparisons(arrays: RankingArrays):
    """All implied comparisons as (source ranking, symmetric slot id, win flag, n_slots).

    Slot ids follow the canonical symmetric slot order (row-major over i < j).
    """
    d = arrays.d
    src, winners, losers = [], [], []
    offsets = arrays.offsets
    for m in np.unique(arrays.lengths):
        which = np.nonzero(arrays.lengths == m)[0]
        iu, ju = np.triu_indices(int(m), 1)
        pos = offsets[which][:, None]
        winners.append(arrays.items[pos + iu].ravel())
        losers.append(arrays.items[pos + ju].ravel())
        src.append(np.repeat(which, len(iu)))
    if not src:
        z = np.zeros(0, dtype=np.int64)
        return z, z, z.astype(float), d * (d - 1) // 2
    src = np.concatenate(src)
    w = np.concatenate(winners)
    l = np.concatenate(losers)
    lo, hi = np.minimum(w, l), np.maximum(w, l)
    # row-major index of (lo, hi) among i < j
    slot = lo * d - lo * (lo + 1) // 2 + (hi - lo - 1)
    return src, slot, (w < l).astype(np.float64), d * (d - 1) // 2


def break_random_disjoint(s: RankingDataset, rng: np.random.Generator) -> PairwiseDataset:
    return _to_dataset(s.d, *random_disjoint_pairs(s.flat, rng))


def break_complete(s: RankingDataset) -> PairwiseDataset:
    return _break_complete_arrays(s.flat)


def _break_complete_arrays(arrays: RankingArrays) -> PairwiseDataset:
    d = arrays.d
    _, slot, win, n_slots = complete_comparisons(arrays)
    counts = np.bincount(slot, minlength=n_slots)
    wins = np.bincount(slot, weights=win, minlength=n_slots).astype(np.int64)
    return PairwiseDataset.from_slots(d, Setting.SYMMETRIC, counts, wins)


def deterministic_disjoint_pairs(arrays: RankingArrays, rng: np.random.Generator):
    d = arrays.d
    n = len(arrays)
    if n < d:
        raise ValueError(f"deterministic-disjoint breaking needs at least d={d} rankings, got {n}")
    if np.any(arrays.lengths != d):
        raise ValueError("deterministic-disjoint breaking needs total rankings (length d)")
    drop = n % d
    keep = np.ones(n, dtype=bool)
    if drop:
        keep[rng.choice(n, size=drop, replace=False)] = False
    kept = np.nonzero(keep)[0]
    groups = len(kept) // d
    rankings = arrays.items.reshape(n, d)[kept]
    position = np.empty_like(rankings)
    position[np.arange(len(kept))[:, None], rankings] = np.arange(d)[None, :]

    schedule = round_robin(d)
    rank_idx, a_items, b_items = [], [], []
    for r, pairs in enumerate(schedule.rounds):
        pa = np.array([p[0] for p in pairs])
        pb = np.array([p[1] for p in pairs])
        rows = np.arange(groups) * d + r
        rank_idx.append(np.repeat(rows, len(pairs)))
        a_items.append(np.tile(pa, groups))
        b_items.append(np.tile(pb, groups))
    rank_idx = np.concatenate(rank_idx)
    a = np.concatenate(a_items)
    b = np.concatenate(b_items)
    a_first = position[rank_idx, a] < position[rank_idx, b]
    return np.where(a_first, a, b), np.where(a_first, b, a)


def break_deterministic_disjoint(s: RankingDataset, rng: np.random.Generator) -> PairwiseDataset:
    """Round-robin breaking: every unordered pair gets exactly floor(N / d) comparisons.

    ``N mod d`` rankings are discarded at random, the rest are grouped in
    input order, and ranking r of each group contributes round r of the
    round-robin schedule.
    """
    return _to_dataset(s.d, *deterministic_disjoint_pairs(s.flat, rng))


def break_arrays(method: BreakMethod, arrays: RankingArrays,
                 rng: Optional[np.random.Generator]) -> PairwiseDataset:
    method = BreakMethod(method)
    if method is BreakMethod.COMPLETE:
        return _break_complete_arrays(arrays)
    if method is BreakMethod.RANDOM_DISJOINT:
        return _to_dataset(arrays.d, *random_disjoint_pairs(arrays, rng))
    return _to_dataset(arrays.d, *deterministic_disjoint_pairs(arrays, rng))
