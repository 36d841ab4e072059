"""The pairwise two-sample statistic T, its fixed-threshold test, and moment oracles."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .core import PairwiseDataset, ProbabilityMatrix, Setting, pair_slots

PAPER_THRESHOLD_FACTOR = 11.0


@dataclass(frozen=True)
class StatisticValue:
    value: float
    active_pairs: int


@dataclass(frozen=True)
class FixedTestConfig:
    nu: float = 1.0 / 3.0
    threshold_override: Optional[float] = None
    paper_exact: bool = False

    def __post_init__(self):
        if not 0.0 < self.nu < 1.0:
            raise ValueError(f"nu must lie in (0, 1), got {self.nu}")


@dataclass(frozen=True)
class TestReport:
    statistic: StatisticValue
    reject: bool
    threshold: Optional[float] = None
    p_value: Optional[float] = None
    seed: Optional[int] = None
    iterations: Optional[int] = None

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if (self.threshold is None) == (self.p_value is None):
            raise ValueError("exactly one of threshold and p_value must be set")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["statistic"] = self.statistic.value
        out["active_pairs"] = self.statistic.active_pairs
        return out


def _check_aligned(x: PairwiseDataset, y: PairwiseDataset) -> None:
    if x.d != y.d:
        raise ValueError(f"dimension mismatch: {x.d} vs {y.d}")
    if x.setting != y.setting:
        raise ValueError(f"setting mismatch: {x.setting.value} vs {y.setting.value}")


def slot_terms(kp: np.ndarray, kq: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-slot contributions to T; the last axis runs over pair slots.

    Slots with fewer than two comparisons in either population contribute an
    exact zero, and the (k - 1) denominators are only formed where both
    counts exceed one.
    """
    kp = np.asarray(kp, dtype=np.float64)
    kq = np.asarray(kq, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    kp, kq, x, y = np.broadcast_arrays(kp, kq, x, y)
    active = (kp > 1) & (kq > 1)
    out = np.zeros(kp.shape, dtype=np.float64)
    a, b, xa, ya = kp[active], kq[active], x[active], y[active]
    num = b * (b - 1) * (xa * xa - xa) + a * (a - 1) * (ya * ya - ya) \
        - 2 * (a - 1) * (b - 1) * xa * ya
    out[active] = num / ((a - 1) * (b - 1) * (a + b))
    return out


def statistic_from_slots(kp, kq, x, y) -> np.ndarray:
    """T for one or many (batched along leading axes) slot vectors.

    Summation is numpy's pairwise reduction over the contiguous slot axis, so
    a batched row and the same row computed alone agree bit for bit.
    """
    terms = np.ascontiguousarray(slot_terms(kp, kq, x, y))
    return np.add.reduce(terms, axis=-1)


def statistic(x: PairwiseDataset, y: PairwiseDataset) -> StatisticValue:
    _check_aligned(x, y)
    kp, xv = x.slots()
    kq, yv = y.slots()
    active = int(np.count_nonzero((kp > 1) & (kq > 1)))
    if active == 0:
        return StatisticValue(0.0, 0)
    return StatisticValue(float(statistic_from_slots(kp, kq, xv, yv)), active)


def threshold(d: int, nu: float = 1.0 / 3.0) -> float:
    """Chebyshev threshold d * sqrt(24 (2 - nu) / nu) for total error nu."""
    if not 0.0 < nu < 1.0:
        raise ValueError(f"nu must lie in (0, 1), got {nu}")
    if d < 1:
        raise ValueError("d must be positive")
    return d * math.sqrt(24.0 * (2.0 - nu) / nu)


def _threshold_for(d: int, cfg: FixedTestConfig) -> float:
    if cfg.threshold_override is not None:
        return float(cfg.threshold_override)
    if cfg.paper_exact:
        return PAPER_THRESHOLD_FACTOR * d
    return threshold(d, cfg.nu)


def fixed_test(x: PairwiseDataset, y: PairwiseDataset,
               cfg: FixedTestConfig = FixedTestConfig()) -> TestReport:
    stat = statistic(x, y)
    t = _threshold_for(x.d, cfg)
    return TestReport(stat, reject=stat.value >= t, threshold=t)


def majority_test(slices: Sequence[tuple[PairwiseDataset, PairwiseDataset]],
                  cfg: FixedTestConfig = FixedTestConfig()) -> bool:
    """Run the fixed test on independent data slices and return the majority vote.

    Ties (even number of slices, half rejecting) resolve to not rejecting.
    """
    if not slices:
        raise ValueError("need at least one slice")
    votes = sum(fixed_test(x, y, cfg).reject for x, y in slices)
    return 2 * votes > len(slices)


# --- moment oracles --------------------------------------------------------

def _slot_counts(counts, d: int, setting: Setting) -> np.ndarray:
    if isinstance(counts, PairwiseDataset):
        return counts.slots()[0].astype(np.float64)
    c = np.asarray(counts)
    if c.shape != (d, d):
        raise ValueError(f"counts must have shape {(d, d)}, got {c.shape}")
    return c[pair_slots(d, setting)].astype(np.float64)


def oracle_conditional_mean(p: ProbabilityMatrix, q: ProbabilityMatrix,
                            counts_p, counts_q) -> float:
    """E[T | counts] = sum over slots of I * kp kq / (kp + kq) * (p - q)^2.

    Evaluated directly from the closed form, independently of the statistic
    code path.
    """
    if p.d != q.d or p.setting != q.setting:
        raise ValueError("p and q must share d and setting")
    kp = _slot_counts(counts_p, p.d, p.setting)
    kq = _slot_counts(counts_q, p.d, p.setting)
    diff2 = (p.slot_values() - q.slot_values()) ** 2
    total = 0.0
    for a, b, d2 in zip(kp, kq, diff2):
        if a > 1 and b > 1:
            total += a * b / (a + b) * d2
    return total


def oracle_variance_bound(p: ProbabilityMatrix, q: ProbabilityMatrix, counts_p, counts_q,
                          under_null: bool) -> float:
    """Upper bound on Var[T]: 24 d^2 under the null, 24 d^2 + 4 k ||P - Q||_F^2
    under a fixed design with k comparisons per slot in both populations."""
    if p.d != q.d or p.setting != q.setting:
        raise ValueError("p and q must share d and setting")
    d = p.d
    kp = _slot_counts(counts_p, d, p.setting)
    kq = _slot_counts(counts_q, d, p.setting)
    base = 24.0 * d * d
    if under_null:
        return base
    if kp.size == 0:
        return base
    k = kp[0]
    if not (np.all(kp == k) and np.all(kq == k)):
        raise ValueError("the alternate bound needs a fixed design (equal counts everywhere)")
    diff = p.entries - q.entries
    np.fill_diagonal(diff, 0.0)
    return base + 4.0 * k * float(np.sum(diff * diff))
