import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ranktest.core import PairwiseDataset, PartialRanking, RankingDataset, Setting, pair_slots
from ranktest.io import (DataFormatError, default_names, pairwise_csv_text, ranking_csv_text,
                         read_pairwise_csv, read_ranking_csv)


def _csv(text):
    return io.StringIO(text)


class TestPairwiseReader:
    def test_counting_example(self):
        data = read_pairwise_csv(_csv("population,winner,loser\nP,a,b\nP,b,a\nQ,a,b\n"))
        assert data.items == ("a", "b")
        assert data.p.counts[0, 1] == 2 and data.p.wins[0, 1] == 1
        assert data.q.counts[0, 1] == 1 and data.q.wins[0, 1] == 1

    def test_lexicographic_index_map(self):
        data = read_pairwise_csv(_csv("population,winner,loser\nQ,z,x\nP,y,z\n"))
        assert data.items == ("x", "y", "z")
        assert data.q.counts[0, 2] == 1 and data.q.wins[0, 2] == 0

    def test_row_order_irrelevant(self):
        rows = ["P,a,b", "Q,c,a", "P,b,c", "Q,a,b"]
        a = read_pairwise_csv(_csv("population,winner,loser\n" + "\n".join(rows)))
        b = read_pairwise_csv(_csv("population,winner,loser\n" + "\n".join(rows[::-1])))
        assert a == b

    def test_result_column(self):
        text = "population,winner,loser,result\nP,a,b,loss\nP,a,b,win\nQ,a,b,draw\nQ,b,a,win\n"
        data = read_pairwise_csv(_csv(text), drop_ties=True)
        assert data.p.counts[0, 1] == 2 and data.p.wins[0, 1] == 1
        assert data.dropped_draws == 1

    def test_draw_without_flag(self):
        with pytest.raises(DataFormatError, match="line 2.*draw"):
            read_pairwise_csv(_csv("population,winner,loser,result\nP,a,b,draw\n"))

    def test_asymmetric_context(self):
        text = "population,winner,loser,result\nP,a,b,win\nP,b,a,loss\nQ,b,a,win\n"
        data = read_pairwise_csv(_csv(text), Setting.ASYMMETRIC)
        assert data.p.counts[0, 1] == 1 and data.p.wins[0, 1] == 1
        assert data.p.counts[1, 0] == 1 and data.p.wins[1, 0] == 0
        assert data.q.wins[1, 0] == 1

    @pytest.mark.parametrize(("text", "match"), [
        ("", "empty file"),
        ("population,winner,loser\n", "no observations"),
        ("pop,w,l\nP,a,b\n", "line 1"),
        ("population,winner,loser\nP,a,b\nR,a,b\n", "line 3.*population"),
        ("population,winner,loser\nP,a,a\n", "line 2.*itself"),
        ("population,winner,loser\nP,a\n", "line 2.*fields"),
        ("population,winner,loser\nP,,b\n", "line 2.*empty"),
        ("population,winner,loser,result\nP,a,b,tie\n", "line 2.*result"),
    ])
    def test_errors(self, text, match):
        with pytest.raises(DataFormatError, match=match):
            read_pairwise_csv(_csv(text))

    def test_blank_lines_skipped(self):
        data = read_pairwise_csv(_csv("population,winner,loser\n\nP,a,b\n\n"))
        assert data.p.n_comparisons == 1

    def test_reads_path(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("population,winner,loser\nP,a,b\n")
        assert read_pairwise_csv(str(path)).p.n_comparisons == 1


class TestRankingReader:
    def test_single(self):
        data = read_ranking_csv(_csv("population,ranking\nP,a>b>c\n"))
        assert data.p.rankings == (PartialRanking((0, 1, 2)),)
        assert len(data.q) == 0

    def test_mixed_lengths(self):
        rows = [f"P,{'>'.join(f'x{i}' for i in range(m))}" for m in range(2, 11)]
        data = read_ranking_csv(_csv("population,ranking\n" + "\n".join(rows) + "\n"))
        assert [len(r) for r in data.p.rankings] == list(range(2, 11))

    @pytest.mark.parametrize(("text", "match"), [
        ("population,ranking\nP,a>a\n", "duplicate"),
        ("population,ranking\nP,a\n", "at least two"),
        ("population,ranking\nP,a>>b\n", "empty item"),
        ("population,ranking\n", "no observations"),
    ])
    def test_errors(self, text, match):
        with pytest.raises(DataFormatError, match=match):
            read_ranking_csv(_csv(text))


class TestRoundTrip:
    @settings(max_examples=40, deadline=None)
    @given(d=st.integers(2, 12), seed=st.integers(0, 2**32 - 1),
           setting=st.sampled_from(list(Setting)))
    def test_pairwise(self, d, seed, setting):
        rng = np.random.default_rng(seed)
        n = len(pair_slots(d, setting)[0])
        kp, kq = rng.integers(1, 4, (2, n))
        p = PairwiseDataset.from_slots(d, setting, kp, rng.binomial(kp, 0.5))
        q = PairwiseDataset.from_slots(d, setting, kq, rng.binomial(kq, 0.5))
        back = read_pairwise_csv(_csv(pairwise_csv_text(p, q)), setting)
        assert back.p == p and back.q == q
        assert back.items == default_names(d)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.permutations(range(6)).map(lambda p: PartialRanking(tuple(p[:4]))),
                    min_size=1, max_size=8),
           st.lists(st.permutations(range(6)).map(lambda p: PartialRanking(tuple(p))),
                    min_size=1, max_size=8))
    def test_ranking(self, rp, rq):
        p, q = RankingDataset(6, tuple(rp)), RankingDataset(6, tuple(rq))
        used = sorted({i for r in rp + rq for i in r.items})
        back = read_ranking_csv(_csv(ranking_csv_text(p, q)))
        names = default_names(6)
        assert back.items == tuple(names[i] for i in used)
        remap = {i: k for k, i in enumerate(used)}
        assert [tuple(remap[i] for i in r.items) for r in rp] == [r.items for r in back.p.rankings]

    def test_default_names_sort(self):
        names = default_names(12)
        assert list(names) == sorted(names) and names[0] == "i00"

    def test_bad_names(self):
        p = PairwiseDataset.empty(2)
        with pytest.raises(ValueError):
            pairwise_csv_text(p, p, names=["b", "a"])
