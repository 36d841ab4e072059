
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_matrix
from ranktest.core import (ModelClass, PairwiseDataset, PartialRanking, ProbabilityMatrix,
                           RankingArrays, RankingDataset, Setting, aggregate,
                           frobenius_separation, pair_slots, row_sum_ordering, validate_model)
from ranktest.genmodels import gen_sst


class TestProbabilityMatrix:
    def test_symmetric_complement_enforced(self):
        with pytest.raises(ValueError, match="1 - M"):
            ProbabilityMatrix(np.array([[0.5, 0.7], [0.4, 0.5]]))

    def test_entries_in_unit_interval(self):
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            ProbabilityMatrix(np.array([[0.5, 1.2], [0.1, 0.5]]), Setting.ASYMMETRIC)

    def test_asymmetric_allows_free_entries(self):
        m = ProbabilityMatrix(np.array([[0.5, 0.7], [0.7, 0.5]]), Setting.ASYMMETRIC)
        assert m.d == 2

    def test_from_upper_is_exact_complement(self, rng):
        m = ProbabilityMatrix.from_upper(rng.random((6, 6)))
        iu = np.triu_indices(6, 1)
        assert np.all(m.entries.T[iu] == 1.0 - m.entries[iu])

    def test_read_only(self):
        m = ProbabilityMatrix.half(3)
        with pytest.raises(ValueError):
            m.entries[0, 1] = 0.9

    @pytest.mark.parametrize(("setting", "n"), [(Setting.SYMMETRIC, 10), (Setting.ASYMMETRIC, 20)])
    def test_slot_count(self, setting, n):
        assert ProbabilityMatrix.half(5, setting).slot_values().shape == (n,)


class TestPairwiseDataset:
    def test_wins_bounded_by_counts(self):
        with pytest.raises(ValueError, match="wins"):
            PairwiseDataset(np.array([[0, 1], [0, 0]]), np.array([[0, 2], [0, 0]]))

    def test_symmetric_lower_triangle_rejected(self):
        with pytest.raises(ValueError, match="i < j"):
            PairwiseDataset(np.array([[0, 0], [1, 0]]), np.zeros((2, 2), int))

    def test_from_slots_round_trip(self, rng):
        for setting in Setting:
            n = len(pair_slots(5, setting)[0])
            k = rng.integers(0, 9, n)
            x = rng.binomial(k, 0.3)
            ds = PairwiseDataset.from_slots(5, setting, k, x)
            kk, xx = ds.slots()
            assert np.array_equal(kk, k) and np.array_equal(xx, x)

    def test_empty(self):
        assert PairwiseDataset.empty(4).n_comparisons == 0


class TestFrobenius:
    def test_identical_is_zero(self, rng):
        p = random_matrix(7, Setting.SYMMETRIC, rng)
        assert frobenius_separation(p, p) == 0.0

    def test_two_by_two(self):
        p = ProbabilityMatrix.from_upper(np.array([[0.5, 0.5], [0, 0.5]]))
        q = ProbabilityMatrix.from_upper(np.array([[0.5, 0.6], [0, 0.5]]))
        assert frobenius_separation(p, q) == pytest.approx(0.0707106781, abs=1e-9)

    def test_mismatched_dims(self):
        with pytest.raises(ValueError):
            frobenius_separation(ProbabilityMatrix.half(3), ProbabilityMatrix.half(4))


class TestValidateModel:
    @pytest.mark.parametrize("cls", list(ModelClass))
    def test_all_half_passes_everything(self, cls):
        m = ProbabilityMatrix.half(5)
        kw = {}
        if cls is ModelClass.PARAMETER_BASED:
            kw = dict(link=lambda x: 1 / (1 + np.exp(-x)), weights=np.zeros(5))
        assert validate_model(m, cls, **kw).valid

    def test_mst_counterexample(self):
        upper = np.array([[0.5, 0.6, 0.55], [0, 0.5, 0.6], [0, 0, 0.5]])
        report = validate_model(ProbabilityMatrix.from_upper(upper), ModelClass.MST,
                                ordering=[0, 1, 2])
        assert not report
        assert report.triple == (0, 1, 2)

    def test_same_matrix_is_wst(self):
        upper = np.array([[0.5, 0.6, 0.55], [0, 0.5, 0.6], [0, 0, 0.5]])
        assert validate_model(ProbabilityMatrix.from_upper(upper), ModelClass.WST, [0, 1, 2])

    def test_wst_failure_reports_pair(self):
        upper = np.array([[0.5, 0.4, 0.6], [0, 0.5, 0.6], [0, 0, 0.5]])
        report = validate_model(ProbabilityMatrix.from_upper(upper), ModelClass.WST, [0, 1, 2])
        assert not report and report.triple == (0, 1)

    def test_staircase_output_is_sst(self, rng):
        _, q = gen_sst(8, 0.08, rng)
        assert validate_model(q, ModelClass.SST, ordering=range(8))

    def test_hierarchy(self, rng):
        # anything SST-valid is MST- and WST-valid under the same ordering
        for _ in range(20):
            _, q = gen_sst(6, 0.1, rng)
            order = row_sum_ordering(q)
            for cls in (ModelClass.SST, ModelClass.MST, ModelClass.WST):
                assert validate_model(q, cls, order)

    def test_parameter_based_mismatch(self):
        m = ProbabilityMatrix.from_upper(np.array([[0.5, 0.6], [0, 0.5]]))
        report = validate_model(m, ModelClass.PARAMETER_BASED,
                                link=lambda x: 1 / (1 + np.exp(-x)), weights=[0.0, 0.0])
        assert not report and report.triple == (0, 1)

    def test_bad_ordering(self):
        with pytest.raises(ValueError, match="permutation"):
            validate_model(ProbabilityMatrix.half(3), ModelClass.SST, ordering=[0, 0, 1])

    def test_row_sum_ordering(self):
        upper = np.array([[0.5, 0.2, 0.3], [0, 0.5, 0.4], [0, 0, 0.5]])
        assert row_sum_ordering(ProbabilityMatrix.from_upper(upper)).tolist() == [2, 1, 0]


class TestAggregate:
    def test_empty(self):
        ds = aggregate([], 3)
        assert ds.n_comparisons == 0

    def test_counts_and_wins(self):
        ds = aggregate([(0, 1), (1, 0), (0, 1)], 2)
        assert ds.counts[0, 1] == 3 and ds.wins[0, 1] == 2

    def test_single(self):
        ds = aggregate([(2, 5)], 6)
        assert ds.counts[2, 5] == 1 and ds.wins[2, 5] == 1

    def test_asymmetric_keeps_context(self):
        ds = aggregate([(1, 0, True), (0, 1, False)], 2, Setting.ASYMMETRIC)
        assert ds.counts[1, 0] == 1 and ds.wins[1, 0] == 1
        assert ds.counts[0, 1] == 1 and ds.wins[0, 1] == 0

    @pytest.mark.parametrize("obs", [[(0, 0)], [(0, 3)]])
    def test_invalid(self, obs):
        with pytest.raises(ValueError):
            aggregate(obs, 3)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)).filter(lambda t: t[0] != t[1]),
                    max_size=40))
    def test_total_preserved(self, obs):
        assert aggregate(obs, 5).n_comparisons == len(obs)


class TestRankings:
    def test_partial_ranking_rejects_duplicates(self):
        with pytest.raises(ValueError):
            PartialRanking((0, 1, 0))

    def test_flat_round_trip(self):
        s = RankingDataset(5, (PartialRanking((0, 1)), PartialRanking((4, 2, 3))))
        flat = s.flat
        assert isinstance(flat, RankingArrays)
        assert flat.lengths.tolist() == [2, 3]
        assert flat.to_dataset() == s

    def test_take(self):
        s = RankingDataset(5, (PartialRanking((0, 1)), PartialRanking((4, 2, 3)),
                               PartialRanking((1, 3))))
        sub = s.flat.take(np.array([2, 0]))
        assert [r.items for r in sub.to_dataset().rankings] == [(1, 3), (0, 1)]

    def test_item_out_of_range(self):
        with pytest.raises(ValueError):
            RankingDataset(3, (PartialRanking((0, 5)),))
