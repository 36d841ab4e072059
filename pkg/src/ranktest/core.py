"""Domain types for comparison and ranking data, plus model-class validators."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

TOL = 1e-9


class Setting(str, enum.Enum):
    SYMMETRIC = "symmetric"
    ASYMMETRIC = "asymmetric"


def pair_slots(d: int, setting: Setting) -> tuple[np.ndarray, np.ndarray]:
    """Row and column indices of the free pair slots, in canonical order.

    Symmetric data lives on i < j (row-major); asymmetric data on every
    ordered pair i != j (row-major).
    """
    setting = Setting(setting)
    if setting is Setting.SYMMETRIC:
        return np.triu_indices(d, 1)
    rows, cols = np.nonzero(~np.eye(d, dtype=bool))
    return rows, cols


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ProbabilityMatrix:
    """A d x d win-probability matrix; ``entries[i, j]`` = Pr(i beats j)."""

    entries: np.ndarray
    setting: Setting = Setting.SYMMETRIC

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError(f"probability matrix must be square, got shape {m.shape}")
        setting = Setting(self.setting)
        off = ~np.eye(m.shape[0], dtype=bool)
        if not np.all(np.isfinite(m)):
            raise ValueError("probability matrix has non-finite entries")
        if np.any(m[off] < 0.0) or np.any(m[off] > 1.0):
            raise ValueError("probability matrix entries must lie in [0, 1]")
        if setting is Setting.SYMMETRIC:
            gap = np.abs(m + m.T - 1.0)[off]
            if gap.size and gap.max() > 1e-12:
                raise ValueError("symmetric setting requires M[j, i] = 1 - M[i, j]")
        object.__setattr__(self, "entries", _frozen(m))
        object.__setattr__(self, "setting", setting)

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def half(cls, d: int, setting: Setting = Setting.SYMMETRIC) -> "ProbabilityMatrix":
        return cls(np.full((d, d), 0.5), setting)

    @classmethod
    def from_upper(cls, upper: np.ndarray) -> "ProbabilityMatrix":
        """Symmetric matrix from its strict upper triangle; the rest is implied."""
        upper = np.asarray(upper, dtype=float)
        d = upper.shape[0]
        iu = np.triu_indices(d, 1)
        m = np.full((d, d), 0.5)
        m[iu] = upper[iu]
        m.T[iu] = 1.0 - upper[iu]
        return cls(m, Setting.SYMMETRIC)

    def slot_values(self) -> np.ndarray:
        return self.entries[pair_slots(self.d, self.setting)]

    def __eq__(self, other):
        if not isinstance(other, ProbabilityMatrix):
            return NotImplemented
        return self.setting == other.setting and np.array_equal(self.entries, other.entries)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class PairwiseDataset:
    """Per-pair trial counts and win counts for one population.

    ``wins[i, j]`` is the number of times i beat j out of ``counts[i, j]``
    comparisons of the slot (i, j).  In the symmetric setting only i < j is
    populated.
    """

    counts: np.ndarray
    wins: np.ndarray
    setting: Setting = Setting.SYMMETRIC

    def __post_init__(self):
        k = np.asarray(self.counts)
        x = np.asarray(self.wins)
        if k.ndim != 2 or k.shape[0] != k.shape[1] or k.shape != x.shape:
            raise ValueError("counts and wins must be square arrays of equal shape")
        if not (np.issubdtype(k.dtype, np.integer) or np.all(k == np.round(k))):
            raise ValueError("counts must be integers")
        if not (np.issubdtype(x.dtype, np.integer) or np.all(x == np.round(x))):
            raise ValueError("wins must be integers")
        k = k.astype(np.int64)
        x = x.astype(np.int64)
        setting = Setting(self.setting)
        if np.any(k < 0) or np.any(x < 0) or np.any(x > k):
            raise ValueError("need 0 <= wins <= counts for every pair")
        if np.any(np.diag(k) != 0):
            raise ValueError("counts on the diagonal must be zero")
        if setting is Setting.SYMMETRIC and np.any(np.tril(k) != 0):
            raise ValueError("symmetric datasets store only i < j slots")
        object.__setattr__(self, "counts", _frozen(k))
        object.__setattr__(self, "wins", _frozen(x))
        object.__setattr__(self, "setting", setting)

    @property
    def d(self) -> int:
        return self.counts.shape[0]

    @property
    def n_comparisons(self) -> int:
        return int(self.counts.sum())

    @classmethod
    def empty(cls, d: int, setting: Setting = Setting.SYMMETRIC) -> "PairwiseDataset":
        z = np.zeros((d, d), dtype=np.int64)
        return cls(z, z, setting)

    @classmethod
    def from_slots(cls, d: int, setting: Setting, counts: np.ndarray,
                   wins: np.ndarray) -> "PairwiseDataset":
        rows, cols = pair_slots(d, setting)
        k = np.zeros((d, d), dtype=np.int64)
        x = np.zeros((d, d), dtype=np.int64)
        k[rows, cols] = counts
        x[rows, cols] = wins
        return cls(k, x, setting)

    def slots(self) -> tuple[np.ndarray, np.ndarray]:
        """(counts, wins) flattened over the canonical pair slots."""
        rows, cols = pair_slots(self.d, self.setting)
        return self.counts[rows, cols], self.wins[rows, cols]

    def __eq__(self, other):
        if not isinstance(other, PairwiseDataset):
            return NotImplemented
        return (self.setting == other.setting
                and np.array_equal(self.counts, other.counts)
                and np.array_equal(self.wins, other.wins))

    __hash__ = None


@dataclass(frozen=True)
class PartialRanking:
    """Distinct items, best first."""

    items: tuple[int, ...]

    def __post_init__(self):
        items = tuple(int(i) for i in self.items)
        if len(items) < 2:
            raise ValueError("a ranking needs at least two items")
        if len(set(items)) != len(items):
            raise ValueError(f"duplicate item in ranking {items}")
        if min(items) < 0:
            raise ValueError("item indices must be non-negative")
        object.__setattr__(self, "items", items)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


@dataclass(frozen=True)
class RankingDataset:
    d: int
    rankings: tuple[PartialRanking, ...] = field(default_factory=tuple)

    def __post_init__(self):
        rankings = tuple(r if isinstance(r, PartialRanking) else PartialRanking(tuple(r))
                         for r in self.rankings)
        for r in rankings:
            if len(r) > self.d:
                raise ValueError(f"ranking of length {len(r)} exceeds d={self.d}")
            if max(r.items) >= self.d:
                raise ValueError(f"item index out of range in ranking {r.items}")
        object.__setattr__(self, "rankings", rankings)

    def __len__(self) -> int:
        return len(self.rankings)

    @cached_property
    def flat(self) -> "RankingArrays":
        return RankingArrays.from_rankings(self.d, self.rankings)


@dataclass(frozen=True, eq=False)
class RankingArrays:
    """Flat array view of a ranking multiset: concatenated items + lengths.

    Used by the rank breakers and the permutation engine so that subsets of
    rankings can be gathered without building Python objects.
    """

    d: int
    items: np.ndarray
    lengths: np.ndarray

    @classmethod
    def from_rankings(cls, d: int, rankings: Sequence[PartialRanking]) -> "RankingArrays":
        lengths = np.fromiter((len(r) for r in rankings), dtype=np.int64, count=len(rankings))
        if len(rankings):
            items = np.fromiter((i for r in rankings for i in r.items), dtype=np.int64,
                                count=int(lengths.sum()))
        else:
            items = np.zeros(0, dtype=np.int64)
        return cls(d, items, lengths)

    @cached_property
    def offsets(self) -> np.ndarray:
        out = np.zeros(len(self.lengths) + 1, dtype=np.int64)
        np.cumsum(self.lengths, out=out[1:])
        return out

    def __len__(self) -> int:
        return len(self.lengths)

    def take(self, idx: np.ndarray) -> "RankingArrays":
        idx = np.asarray(idx, dtype=np.int64)
        lengths = self.lengths[idx]
        starts = self.offsets[:-1][idx]
        if lengths.sum() == 0:
            return RankingArrays(self.d, np.zeros(0, dtype=np.int64), lengths)
        seg = np.repeat(np.arange(len(idx)), lengths)
        local = np.arange(int(lengths.sum())) - np.repeat(np.cumsum(lengths) - lengths, lengths)
        return RankingArrays(self.d, self.items[starts[seg] + local], lengths)

    def to_dataset(self) -> RankingDataset:
        off = self.offsets
        return RankingDataset(self.d, tuple(
            PartialRanking(tuple(self.items[off[i]:off[i + 1]].tolist()))
            for i in range(len(self))))


def frobenius_separation(p: ProbabilityMatrix, q: ProbabilityMatrix) -> float:
    """Scaled Frobenius distance (1/d) * ||P - Q||_F over off-diagonal entries."""
    if p.d != q.d:
        raise ValueError(f"dimension mismatch: {p.d} vs {q.d}")
    if p.setting != q.setting:
        raise ValueError("setting mismatch")
    diff = p.entries - q.entries
    np.fill_diagonal(diff, 0.0)
    return float(np.sqrt(np.sum(diff * diff)) / p.d)


# --- model classes ---------------------------------------------------------

class ModelClass(str, enum.Enum):
    WST = "wst"
    MST = "mst"
    SST = "sst"
    PARAMETER_BASED = "parameter-based"
    ANY = "any"


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    model_class: ModelClass
    violation: Optional[str] = None
    triple: Optional[tuple[int, ...]] = None
    ordering: Optional[tuple[int, ...]] = None

    def __bool__(self) -> bool:
        return self.valid


def row_sum_ordering(m: ProbabilityMatrix) -> np.ndarray:
    """Items sorted by row sum, strongest first; ties keep index order."""
    a = m.entries.copy()
    np.fill_diagonal(a, 0.5)
    return np.argsort(-a.sum(axis=1), kind="stable")


def validate_model(m: ProbabilityMatrix, model_class: ModelClass | str = ModelClass.ANY,
                   ordering: Optional[Sequence[int]] = None, *,
                   link: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                   weights: Optional[Sequence[float]] = None,
                   tol: float = TOL) -> ValidationReport:
    """Check membership of ``m`` in a stochastic-transitivity or parametric class.

    For WST/MST/SST the check is made against a single item ordering: the one
    given, or else items sorted by descending row sum.  MST is checked together
    with the WST half-condition, so the nested hierarchy SST ⊂ MST ⊂ WST holds
    for the validator as well.  Parameter-based checks need ``link`` and
    ``weights``.  The report carries the first violated index tuple, in the
    original item labels.
    """
    cls = ModelClass(model_class)
    a = m.entries.copy()
    d = m.d
    np.fill_diagonal(a, 0.5)

    if cls is ModelClass.ANY:
        return ValidationReport(True, cls)

    if cls is ModelClass.PARAMETER_BASED:
        if link is None or weights is None:
            raise ValueError("parameter-based validation needs link and weights")
        w = np.asarray(weights, dtype=float)
        if w.shape != (d,):
            raise ValueError("weights must have length d")
        expected = np.asarray(link(w[:, None] - w[None, :]), dtype=float)
        err = np.abs(a - expected)
        np.fill_diagonal(err, 0.0)
        if err.max(initial=0.0) > tol:
            i, j = np.unravel_index(np.argmax(err), err.shape)
            return ValidationReport(False, cls, f"M[{i},{j}]={a[i, j]:.12g} != "
                                    f"f(w_i - w_j)={expected[i, j]:.12g}", (int(i), int(j)))
        return ValidationReport(True, cls)

    gap = np.abs(a + a.T - 1.0)
    if gap.max(initial=0.0) > tol:
        i, j = np.unravel_index(np.argmax(gap), gap.shape)
        return ValidationReport(False, cls, f"shifted-skew-symmetry fails at ({i},{j})",
                                (int(i), int(j)))

    order = np.asarray(ordering if ordering is not None else row_sum_ordering(m), dtype=np.int64)
    if sorted(order.tolist()) != list(range(d)):
        raise ValueError("ordering must be a permutation of range(d)")
    b = a[np.ix_(order, order)]
    order_t = tuple(int(i) for i in order)

    def fail(msg, idx):
        return ValidationReport(False, cls, msg, tuple(order_t[i] for i in idx), order_t)

    # WST: every item beats everything ranked below it with probability >= 1/2
    upper = np.triu(np.ones((d, d), dtype=bool), 1)
    bad = upper & (b < 0.5 - tol)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        if cls is ModelClass.SST:
            # report as a column-monotonicity failure against the diagonal
            return fail(f"M[{order_t[i]},{order_t[j]}]={b[i, j]:.12g} < M[j,j]=0.5", (i, j, j))
        return fail(f"M[{order_t[i]},{order_t[j]}]={b[i, j]:.12g} < 1/2", (i, j))

    if cls is ModelClass.SST:
        # column-wise nonincreasing down the ordering
        drop = b[1:, :] - b[:-1, :]
        bad = drop > tol
        if bad.any():
            r, col = np.argwhere(bad)[0]
            return fail(f"M[{order_t[r]},{order_t[col]}]={b[r, col]:.12g} < "
                        f"M[{order_t[r + 1]},{order_t[col]}]={b[r + 1, col]:.12g}",
                        (r, r + 1, col))
    elif cls is ModelClass.MST:
        for j in range(1, d - 1):
            lo = np.minimum(b[:j, j][:, None], b[j, j + 1:][None, :])
            bad = b[:j, j + 1:] < lo - tol
            if bad.any():
                i, l_off = np.argwhere(bad)[0]
                ell = j + 1 + l_off
                return fail(f"M[{order_t[i]},{order_t[ell]}]={b[i, ell]:.12g} < "
                            f"min(M[i,j], M[j,l])={lo[i, l_off]:.12g}", (i, j, ell))
    return ValidationReport(True, cls, ordering=order_t)


# --- aggregation -----------------------------------------------------------

def aggregate(observations: Iterable[Sequence[int]], d: int,
              setting: Setting = Setting.SYMMETRIC) -> PairwiseDataset:
    """Count comparisons into a dataset.

    Symmetric: each observation is ``(winner, loser)``.  Asymmetric: each is
    ``(i, j, i_won)`` for the ordered context slot (i, j).
    """
    setting = Setting(setting)
    k = np.zeros((d, d), dtype=np.int64)
    x = np.zeros((d, d), dtype=np.int64)
    for obs in observations:
        if setting is Setting.SYMMETRIC:
            w, l = (int(v) for v in obs)
            _check_pair(w, l, d)
            i, j = min(w, l), max(w, l)
            k[i, j] += 1
            x[i, j] += w < l
        else:
            i, j, won = obs
            i, j = int(i), int(j)
            _check_pair(i, j, d)
            k[i, j] += 1
            x[i, j] += bool(won)
    return PairwiseDataset(k, x, setting)


def _check_pair(i: int, j: int, d: int) -> None:
    if not (0 <= i < d and 0 <= j < d):
        raise ValueError(f"item index out of range for d={d}: ({i}, {j})")
    if i == j:
        raise ValueError(f"an item cannot be compared with itself: ({i}, {j})")
