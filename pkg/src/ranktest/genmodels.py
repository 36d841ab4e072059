"""Synthetic models: probability-matrix constructions, count designs, samplers."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special, stats

from .core import (PairwiseDataset, PartialRanking, ProbabilityMatrix, RankingDataset, Setting,
                   pair_slots)

MAX_REJECTIONS = 10**6


# --- link functions ----------------------------------------------------------

class Link(str, enum.Enum):
    BTL = "btl"
    THURSTONE = "thurstone"
    CUSTOM = "custom"


def link_function(link: Link | str, custom: Optional[Callable] = None) -> Callable:
    link = Link(link)
    if link is Link.BTL:
        return special.expit
    if link is Link.THURSTONE:
        return special.ndtr
    if custom is None:
        raise ValueError("custom link needs a function")
    return custom


def _check_link(f: Callable) -> None:
    grid = np.linspace(-8.0, 8.0, 161)
    vals = np.asarray(f(grid), dtype=float)
    if np.any(vals < 0) or np.any(vals > 1):
        raise ValueError("link must map into [0, 1]")
    if np.any(np.diff(vals) < -1e-12):
        raise ValueError("link must be nondecreasing")
    if np.max(np.abs(vals + vals[::-1] - 1.0)) > 1e-9:
        raise ValueError("link must satisfy f(t) = 1 - f(-t)")


def parametric_matrix(w: Sequence[float], link: Link | str = Link.BTL,
                      custom: Optional[Callable] = None) -> ProbabilityMatrix:
    """M[i, j] = f(w_i - w_j) in the symmetric setting."""
    w = np.asarray(w, dtype=float)
    f = link_function(link, custom)
    m = np.asarray(f(w[:, None] - w[None, :]), dtype=float)
    # build from the upper triangle so M + M^T = 1 holds exactly
    return ProbabilityMatrix.from_upper(m)


def _inverse_link(f: Callable, target: float, link: Link) -> float:
    """Solve f(t) = target for t >= 0."""
    if link is Link.BTL:
        return float(special.logit(target))
    if link is Link.THURSTONE:
        return float(special.ndtri(target))
    lo, hi = 0.0, 1.0
    while f(hi) < target:
        hi *= 2.0
        if hi > 1e6:
            raise ValueError(f"link never reaches {target}")
    return _bisect(lambda t: float(f(t)) - target, lo, hi)


def _bisect(g: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12) -> float:
    glo = g(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


# --- parameter types ---------------------------------------------------------

@dataclass(frozen=True)
class PLWeights:
    w: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(v) for v in self.w)
        if not all(math.isfinite(v) for v in w):
            raise ValueError("weights must be finite")
        object.__setattr__(self, "w", w)

    @property
    def d(self) -> int:
        return len(self.w)

    def centered(self) -> "PLWeights":
        a = np.asarray(self.w)
        return PLWeights(tuple(a - a.mean()))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.w, dtype=float)


@dataclass(frozen=True)
class ConstructionParams:
    d: int
    epsilon: float = 0.0
    eta: Optional[float] = None
    delta: Optional[float] = None
    kappa: int = 0
    link: Link = Link.BTL
    custom_link: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("d must be at least 2")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.eta is not None and not 0.0 < self.eta <= 0.5:
            raise ValueError("eta must lie in (0, 1/2]")
        if self.kappa < 0 or self.kappa > self.d // 2:
            raise ValueError("kappa must lie in [0, d/2]")
        object.__setattr__(self, "link", Link(self.link))


class CountKind(str, enum.Enum):
    FIXED = "fixed"
    BINOMIAL = "binomial"
    POISSON = "poisson"
    GEOMETRIC = "geometric"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class CountDistribution:
    """Distribution of per-slot comparison counts.

    ``Geometric(a)`` counts failures before the first success, so its support
    starts at zero.  ``Uniform(n)`` is the discrete uniform on {0, ..., n}.
    """

    kind: CountKind
    n: int = 0
    a: float = 1.0
    lam: float = 0.0

    def __post_init__(self):
        kind = CountKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind in (CountKind.FIXED, CountKind.BINOMIAL, CountKind.UNIFORM) and self.n < 0:
            raise ValueError("n must be non-negative")
        if kind is CountKind.BINOMIAL and not 0.0 <= self.a <= 1.0:
            raise ValueError("binomial a must lie in [0, 1]")
        if kind is CountKind.GEOMETRIC and not 0.0 < self.a <= 1.0:
            raise ValueError("geometric a must lie in (0, 1]")
        if kind is CountKind.POISSON and self.lam < 0:
            raise ValueError("poisson rate must be non-negative")

    @classmethod
    def fixed(cls, k: int) -> "CountDistribution":
        return cls(CountKind.FIXED, n=k)

    @classmethod
    def binomial(cls, n: int, a: float) -> "CountDistribution":
        return cls(CountKind.BINOMIAL, n=n, a=a)

    @classmethod
    def poisson(cls, lam: float) -> "CountDistribution":
        return cls(CountKind.POISSON, lam=lam)

    @classmethod
    def geometric(cls, a: float) -> "CountDistribution":
        return cls(CountKind.GEOMETRIC, a=a)

    @classmethod
    def uniform(cls, n: int) -> "CountDistribution":
        return cls(CountKind.UNIFORM, n=n)

    def _frozen_dist(self):
        k = self.kind
        if k is CountKind.BINOMIAL:
            return stats.binom(self.n, self.a)
        if k is CountKind.POISSON:
            return stats.poisson(self.lam)
        if k is CountKind.GEOMETRIC:
            return stats.geom(self.a, loc=-1)
        if k is CountKind.UNIFORM:
            return stats.randint(0, self.n + 1)
        return None

    @property
    def mean(self) -> float:
        dist = self._frozen_dist()
        return float(self.n) if dist is None else float(dist.mean())

    @property
    def std(self) -> float:
        dist = self._frozen_dist()
        return 0.0 if dist is None else float(dist.std())

    @property
    def p1(self) -> float:
        dist = self._frozen_dist()
        if dist is None:
            return 1.0 if self.n == 1 else 0.0
        return float(dist.pmf(1))

    def moment_report(self) -> dict:
        mu, sigma, p1 = self.mean, self.std, self.p1
        return {
            "mean": mu,
            "std": sigma,
            "p1": p1,
            "c1": mu / p1 if p1 > 0 else math.inf,
            "c2": mu / sigma if sigma > 0 else math.inf,
            "mean_exceeds_p1": mu > p1,
        }

    def sample(self, size, rng: np.random.Generator) -> np.ndarray:
        k = self.kind
        if k is CountKind.FIXED:
            return np.full(size, self.n, dtype=np.int64)
        if k is CountKind.BINOMIAL:
            return rng.binomial(self.n, self.a, size=size).astype(np.int64)
        if k is CountKind.POISSON:
            return rng.poisson(self.lam, size=size).astype(np.int64)
        if k is CountKind.GEOMETRIC:
            return (rng.geometric(self.a, size=size) - 1).astype(np.int64)
        return rng.integers(0, self.n + 1, size=size, dtype=np.int64)


# --- samplers ----------------------------------------------------------------

def sample_counts(dist: CountDistribution, d: int, setting: Setting,
                  rng: np.random.Generator) -> np.ndarray:
    """d x d count matrix with i.i.d. draws on the free slots and zeros elsewhere."""
    rows, cols = pair_slots(d, setting)
    k = np.zeros((d, d), dtype=np.int64)
    k[rows, cols] = dist.sample(len(rows), rng)
    return k


def sample_comparisons(m: ProbabilityMatrix, counts: np.ndarray,
                       rng: np.random.Generator) -> PairwiseDataset:
    counts = np.asarray(counts)
    if counts.shape != (m.d, m.d):
        raise ValueError(f"counts must have shape {(m.d, m.d)}")
    rows, cols = pair_slots(m.d, m.setting)
    k = counts[rows, cols]
    x = rng.binomial(k, m.entries[rows, cols])
    return PairwiseDataset.from_slots(m.d, m.setting, k, x)


def sample_pl_ranking(w: PLWeights, subset: Sequence[int],
                      rng: np.random.Generator) -> PartialRanking:
    """Sequential Plackett-Luce draw over ``subset``, best item first."""
    remaining = [int(i) for i in subset]
    if len(remaining) < 2:
        raise ValueError("subset needs at least two items")
    if len(set(remaining)) != len(remaining):
        raise ValueError("subset items must be distinct")
    weights = w.as_array()
    out = []
    while len(remaining) > 1:
        logits = weights[remaining]
        probs = np.exp(logits - logits.max())
        probs /= probs.sum()
        pick = int(rng.choice(len(remaining), p=probs))
        out.append(remaining.pop(pick))
    out.append(remaining[0])
    return PartialRanking(tuple(out))


def sample_pl_rankings(w: PLWeights, n: int, m: int,
                       rng: np.random.Generator) -> RankingDataset:
    """``n`` rankings, each over ``m`` items chosen uniformly at random.

    Uses Gumbel-perturbed weights: sorting w_i + G_i in decreasing order is
    distributed exactly as the sequential Plackett-Luce draw.
    """
    d = w.d
    if not 2 <= m <= d:
        raise ValueError(f"ranking length must lie in [2, {d}]")
    weights = w.as_array()
    if m == d:
        subsets = np.broadcast_to(np.arange(d), (n, d))
    else:
        subsets = np.argsort(rng.random((n, d)), axis=1)[:, :m]
    scores = weights[subsets] + rng.gumbel(size=(n, m))
    order = np.argsort(-scores, axis=1, kind="stable")
    ranked = np.take_along_axis(subsets, order, axis=1)
    return RankingDataset(d, tuple(PartialRanking(tuple(r)) for r in ranked.tolist()))


def pl_marginal_matrix(w: PLWeights) -> ProbabilityMatrix:
    """Pairwise marginals exp(w_i) / (exp(w_i) + exp(w_j))."""
    return parametric_matrix(w.w, Link.BTL)


# --- constructions -----------------------------------------------------------

def _half(d: int, setting: Setting) -> ProbabilityMatrix:
    return ProbabilityMatrix.half(d, setting)


def _from_slot_delta(d: int, setting: Setting, delta: np.ndarray) -> ProbabilityMatrix:
    rows, cols = pair_slots(d, setting)
    q = np.full((d, d), 0.5)
    q[rows, cols] = 0.5 + delta
    if setting is Setting.SYMMETRIC:
        q[cols, rows] = 0.5 - delta
    return ProbabilityMatrix(q, setting)


def _slot_scale(setting: Setting) -> float:
    # full-matrix norm counts each symmetric slot twice
    return math.sqrt(2.0) if Setting(setting) is Setting.SYMMETRIC else 1.0


def gen_model_free(d: int, epsilon: float, setting: Setting | str,
                   rng: np.random.Generator,
                   max_rejections: int = MAX_REJECTIONS) -> tuple[ProbabilityMatrix, ProbabilityMatrix]:
    """P = all-1/2 and Q = P + Delta with Delta uniform on {(1/d)||Delta||_F = eps} ∩ box.

    The direction is an isotropic Gaussian over the free slots; draws that
    leave [0, 1] are rejected.
    """
    setting = Setting(setting)
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    p = _half(d, setting)
    if epsilon == 0:
        return p, p
    n_slots = len(pair_slots(d, setting)[0])
    radius = epsilon * d / _slot_scale(setting)
    if radius > 0.5 * math.sqrt(n_slots):
        raise ValueError(f"epsilon={epsilon} is unreachable inside [0, 1] for d={d}")
    for _ in range(max_rejections):
        g = rng.standard_normal(n_slots)
        delta = g * (radius / np.linalg.norm(g))
        if np.max(np.abs(delta)) <= 0.5:
            return p, _from_slot_delta(d, setting, delta)
    raise RuntimeError(f"no admissible perturbation after {max_rejections} draws; "
                       f"epsilon={epsilon} is too large for d={d}")


def parameter_based_weights(params: ConstructionParams,
                            rng: np.random.Generator) -> tuple[np.ndarray, float]:
    """Weights with floor(d/2) entries +delta, floor(d/2) entries -delta (one 0 if d is odd),
    and delta solved so that the induced matrix sits at distance epsilon from all-1/2."""
    d, eps = params.d, params.epsilon
    f = link_function(params.link, params.custom_link)
    if params.link is Link.CUSTOM:
        _check_link(f)
    half = d // 2
    signs = np.zeros(d)
    signs[:half] = 1.0
    signs[half:2 * half] = -1.0
    signs = rng.permutation(signs)

    if params.delta is not None:
        return signs * params.delta, float(params.delta)
    if eps == 0:
        return signs * 0.0, 0.0
    if d % 2 == 0:
        eta = eps * math.sqrt(2.0)
        if eta >= 0.5:
            raise ValueError(f"epsilon={eps} needs eta={eta:.4f} >= 1/2")
        delta = _inverse_link(f, 0.5 + eta, params.link) / 2.0
        return signs * delta, delta

    def sep(delta: float) -> float:
        w = signs * delta
        m = np.asarray(f(w[:, None] - w[None, :]), dtype=float) - 0.5
        np.fill_diagonal(m, 0.0)
        return math.sqrt(float(np.sum(m * m))) / d - eps

    hi = 1.0
    while sep(hi) < 0:
        hi *= 2.0
        if hi > 1e4:
            raise ValueError(f"epsilon={eps} is not reachable for d={d}")
    delta = _bisect(sep, 0.0, hi)
    return signs * delta, delta


def gen_parameter_based(params: ConstructionParams,
                        rng: np.random.Generator) -> tuple[ProbabilityMatrix, ProbabilityMatrix]:
    w, _ = parameter_based_weights(params, rng)
    p = _half(params.d, Setting.SYMMETRIC)
    return p, parametric_matrix(w, params.link, params.custom_link)


def gen_btl(d: int, epsilon: float, rng: np.random.Generator):
    return gen_parameter_based(ConstructionParams(d, epsilon, link=Link.BTL), rng)


def gen_sst(d: int, epsilon: float,
            rng: np.random.Generator) -> tuple[ProbabilityMatrix, ProbabilityMatrix]:
    """Staircase perturbation: sorted uniforms laid out along antidiagonals.

    The largest values go to the top-right corner, so Delta[i, j] is
    nonincreasing down each column and nondecreasing along each row of the
    upper triangle; that keeps Q = 1/2 + Delta strongly stochastically
    transitive under the identity ordering.
    """
    p = _half(d, Setting.SYMMETRIC)
    if epsilon == 0:
        return p, p
    rows, cols = np.triu_indices(d, 1)
    vals = np.sort(rng.random(len(rows)))[::-1]
    order = np.lexsort((rows, rows - cols))
    delta = np.empty(len(rows))
    delta[order] = vals
    delta *= (epsilon * d / math.sqrt(2.0)) / np.linalg.norm(delta)
    if delta.max() > 0.5:
        raise ValueError(f"epsilon={epsilon} pushes Q outside [0, 1] for d={d}")
    return p, _from_slot_delta(d, Setting.SYMMETRIC, delta)


def gen_mst_theta(d: int, eta: float, rng: np.random.Generator) -> ProbabilityMatrix:
    """One +eta entry per row and column of the upper-right quadrant, rest 1/2."""
    if d % 2:
        raise ValueError("the MST construction needs even d")
    if not 0.0 <= eta < 0.5:
        raise ValueError("eta must lie in [0, 1/2)")
    h = d // 2
    upper = np.full((d, d), 0.5)
    perm = rng.permutation(h)
    upper[np.arange(h), h + perm] = 0.5 + eta
    return ProbabilityMatrix.from_upper(upper)


def gen_planted_clique_sst(d: int, kappa: int, rng: np.random.Generator) -> ProbabilityMatrix:
    """All-1/2 matrix with a kappa x kappa block of ones in the upper-right quadrant.

    Block rows are a random index set R of the top half and block columns are
    the same set shifted into the bottom half.  Ordering R first and R + d/2
    last makes the matrix SST.
    """
    if d % 2:
        raise ValueError("the planted-clique construction needs even d")
    h = d // 2
    if not 0 <= kappa <= h:
        raise ValueError(f"kappa must lie in [0, {h}]")
    upper = np.full((d, d), 0.5)
    if kappa:
        rows = np.sort(rng.choice(h, size=kappa, replace=False))
        upper[np.ix_(rows, rows + h)] = 1.0
    return ProbabilityMatrix.from_upper(upper)


def planted_clique_ordering(q: ProbabilityMatrix) -> np.ndarray:
    """Clique rows first, clique columns last, everything else in between."""
    a = q.entries
    h = q.d // 2
    rows = np.nonzero(np.any(a[:h, h:] == 1.0, axis=1))[0]
    cols = rows + h
    middle = np.setdiff1d(np.arange(q.d), np.concatenate([rows, cols]))
    return np.concatenate([rows, middle, cols])
