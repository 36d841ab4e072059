import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ranktest.core import PartialRanking, RankingDataset
from ranktest.genmodels import PLWeights, sample_pl_rankings
from ranktest.rankbreak import (BreakMethod, RankBreaker, break_complete,
                                break_deterministic_disjoint, break_random_disjoint,
                                random_disjoint_pairs, round_robin)


def _ranking_strategy(d):
    return st.permutations(range(d)).flatmap(
        lambda p: st.integers(2, d).map(lambda m: PartialRanking(tuple(p[:m]))))


def _pairs_from(ds):
    """Reconstruct the multiset of (winner, loser) from a symmetric dataset."""
    out = []
    iu, ju = np.triu_indices(ds.d, 1)
    for i, j in zip(iu, ju):
        out += [(i, j)] * int(ds.wins[i, j]) + [(j, i)] * int(ds.counts[i, j] - ds.wins[i, j])
    return sorted(out)


class TestRoundRobin:
    def test_d4(self):
        assert round_robin(4).rounds == (((0, 3), (1, 2)), ((1, 3), (2, 0)), ((2, 3), (0, 1)))

    def test_d2(self):
        assert round_robin(2).rounds == (((0, 1),),)

    def test_d5_bye(self):
        sched = round_robin(5)
        assert len(sched) == 5
        assert all(len(r) == 2 for r in sched.rounds)
        idle = [set(range(5)) - {i for p in r for i in p} for r in sched.rounds]
        assert sorted(i for s in idle for i in s) == list(range(5))

    @pytest.mark.parametrize("d", range(2, 16))
    def test_one_factorization(self, d):
        sched = round_robin(d)
        assert len(sched) == (d - 1 if d % 2 == 0 else d)
        seen = [frozenset(p) for r in sched.rounds for p in r]
        assert len(seen) == len(set(seen)) == d * (d - 1) // 2
        for r in sched.rounds:
            items = [i for p in r for i in p]
            assert len(items) == len(set(items)) == 2 * (d // 2)

    def test_too_small(self):
        with pytest.raises(ValueError):
            round_robin(1)


class TestComplete:
    def test_three_items(self):
        s = RankingDataset(3, (PartialRanking((2, 0, 1)),))
        assert _pairs_from(break_complete(s)) == sorted([(2, 0), (2, 1), (0, 1)])

    def test_m10_yields_45(self):
        s = RankingDataset(12, (PartialRanking(tuple(range(11, 1, -1))),))
        assert break_complete(s).n_comparisons == 45

    @settings(max_examples=60, deadline=None)
    @given(st.lists(_ranking_strategy(7), min_size=1, max_size=12))
    def test_matches_itertools(self, rankings):
        s = RankingDataset(7, tuple(rankings))
        expected = sorted(pair for r in rankings for pair in itertools.combinations(r.items, 2))
        assert _pairs_from(break_complete(s)) == expected


class TestRandomDisjoint:
    def test_two_items(self, rng):
        s = RankingDataset(4, (PartialRanking((3, 1)),))
        assert _pairs_from(break_random_disjoint(s, rng)) == [(3, 1)]

    @settings(max_examples=60, deadline=None)
    @given(st.lists(_ranking_strategy(8), min_size=1, max_size=10), st.integers(0, 2**31))
    def test_disjoint_and_consistent(self, rankings, seed):
        s = RankingDataset(8, tuple(rankings))
        winners, losers = random_disjoint_pairs(s.flat, np.random.default_rng(seed))
        assert len(winners) == sum(len(r) // 2 for r in rankings)
        # walk the output ranking by ranking: floor(m/2) pairs each
        start = 0
        for r in rankings:
            k = len(r) // 2
            w, l = winners[start:start + k], losers[start:start + k]
            start += k
            used = list(w) + list(l)
            assert len(used) == len(set(used))
            pos = {item: i for i, item in enumerate(r.items)}
            assert all(pos[a] < pos[b] for a, b in zip(w, l))

    def test_pair_frequency(self, rng):
        # uniform m=10 rankings over d=100: a given pair appears w.p. m/(d(d-1)) per ranking
        d, m, n = 100, 10, 60_000
        s = sample_pl_rankings(PLWeights(tuple(np.zeros(d))), n, m, rng)
        counts = break_random_disjoint(s, rng).counts[np.triu_indices(d, 1)]
        p = m / (d * (d - 1))
        assert counts.sum() == n * m // 2
        assert counts.mean() / n == pytest.approx(p)
        se = np.sqrt(p * (1 - p) / n)
        assert abs(counts[0] / n - p) < 4 * se
        # spread across pairs matches binomial variance
        assert np.var(counts / n) == pytest.approx(p * (1 - p) / n, rel=0.1)


class TestDeterministicDisjoint:
    def test_n_equals_d(self, rng):
        d = 6
        s = sample_pl_rankings(PLWeights(tuple(np.zeros(d))), d, d, rng)
        out = break_deterministic_disjoint(s, rng)
        iu = np.triu_indices(d, 1)
        assert np.all(out.counts[iu] == 1)

    def test_discards_remainder(self, rng):
        d = 4
        s = sample_pl_rankings(PLWeights(tuple(np.zeros(d))), 2 * d + 3, d, rng)
        out = break_deterministic_disjoint(s, rng)
        assert np.all(out.counts[np.triu_indices(d, 1)] == 2)

    def test_consistent_rankings(self, rng):
        d = 5
        s = RankingDataset(d, tuple(PartialRanking(tuple(range(d))) for _ in range(d)))
        out = break_deterministic_disjoint(s, rng)
        assert np.array_equal(out.wins, out.counts)

    @pytest.mark.parametrize(("d", "n"), [(5, 5), (8, 17), (9, 30)])
    def test_total_count(self, rng, d, n):
        s = sample_pl_rankings(PLWeights(tuple(np.zeros(d))), n, d, rng)
        out = break_deterministic_disjoint(s, rng)
        assert out.n_comparisons == (n // d) * d * (d - 1) // 2

    def test_needs_total_rankings(self, rng):
        s = RankingDataset(4, tuple(PartialRanking((0, 1, 2)) for _ in range(4)))
        with pytest.raises(ValueError, match="total"):
            break_deterministic_disjoint(s, rng)

    def test_needs_enough_rankings(self, rng):
        s = RankingDataset(4, (PartialRanking((0, 1, 2, 3)),))
        with pytest.raises(ValueError, match="at least"):
            break_deterministic_disjoint(s, rng)


class TestRankBreaker:
    def test_random_methods_need_rng(self):
        s = RankingDataset(3, (PartialRanking((0, 1)),))
        with pytest.raises(ValueError, match="generator"):
            RankBreaker(BreakMethod.RANDOM_DISJOINT).apply(s)

    def test_complete_without_rng(self):
        s = RankingDataset(3, (PartialRanking((0, 1, 2)),))
        assert RankBreaker("complete").apply(s).n_comparisons == 3

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            RankBreaker("bogus")
