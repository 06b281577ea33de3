import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from mcrcf.baselines import BruteForce, acs, brute_knn, co_rated_stats, jaccard, pearson, wacs
from mcrcf.ratings import compute_means

from conftest import make_dataset

U = {1: 5, 2: 3, 3: 4}
A = {1: 4, 2: 2, 4: 5}


class TestHandExamples:
    def test_pair_means_differ_by_side(self):
        st_ = co_rated_stats(U, A)
        assert st_.overlap == {1, 2}
        assert (st_.pair_mean_left, st_.pair_mean_right) == (4.0, 3.0)

    def test_pearson(self):
        assert pearson(U, A) == pytest.approx(1.0)

    def test_acs(self):
        assert acs(U, A, 4.0, 11 / 3) == pytest.approx(3 / math.sqrt(13), abs=1e-12)
        assert acs(U, A, 4.0, 11 / 3) == pytest.approx(0.83205, abs=5e-6)

    def test_pearson_and_acs_disagree(self):
        assert abs(pearson(U, A) - acs(U, A, 4.0, 11 / 3)) > 0.1

    def test_jaccard(self):
        assert jaccard(U.keys(), A.keys()) == 0.5
        assert jaccard({1, 2}, {1, 2}) == 1.0
        assert jaccard({1}, {2}) == 0.0
        assert jaccard(set(), set()) == 0.0

    def test_wacs(self):
        assert wacs(U, A, 4.0, 11 / 3) == pytest.approx(0.41603, abs=5e-6)
        assert wacs({1: 5}, {2: 1}, 3, 3) == 0.0
        assert wacs(U, U, 4.0, 4.0) == acs(U, U, 4.0, 4.0)


class TestDegenerate:
    def test_self_correlation(self):
        assert pearson(U, U) == pytest.approx(1.0)

    def test_single_overlap_flagged(self):
        assert pearson({1: 5, 2: 4}, {1: 3, 3: 1}, return_flag=True) == (0.0, False)

    def test_constant_side_flagged(self):
        assert pearson({1: 3, 2: 3}, {1: 1, 2: 5}, return_flag=True) == (0.0, False)

    def test_acs_empty_overlap(self):
        assert acs({1: 5}, {2: 5}, 3, 3, return_flag=True) == (0.0, False)

    def test_parallel_and_antiparallel(self):
        a = {1: 5, 2: 1, 3: 3}
        b = {1: 4, 2: 2, 3: 3}  # MCRs (1, -1, 0) vs (2, -2, 0) around 3
        c = {1: 2, 2: 4, 3: 3}
        assert acs(a, b, 3, 3) == pytest.approx(1.0)
        assert acs(a, c, 3, 3) == pytest.approx(-1.0)


class TestBruteKnn:
    # user 1 = U, user 2 = A, user 3 = {1:1, 3:2, 4:4}; means 4, 11/3, 7/3
    ACS = {(1, 2): 3 / math.sqrt(13), (1, 3): -4 / math.sqrt(17), (2, 3): 16 / math.sqrt(697)}
    PEARSON = {(1, 2): 1.0, (1, 3): -1.0, (2, 3): 1.0}

    def test_acs_table(self, tiny):
        means = compute_means(tiny)
        for q in (1, 2, 3):
            got = brute_knn(tiny, means, q, "user_based", 5, "acs")
            want = sorted(
                ((o, self.ACS[tuple(sorted((q, o)))]) for o in (1, 2, 3) if o != q),
                key=lambda t: (-t[1], t[0]),
            )
            assert [n.neighbor_id for n in got] == [w[0] for w in want]
            assert [n.similarity for n in got] == pytest.approx([w[1] for w in want], abs=1e-12)

    def test_pearson_table_ties_by_id(self, tiny):
        got = brute_knn(tiny, compute_means(tiny), 2, "user_based", 5, "pearson")
        assert [(n.neighbor_id, round(n.similarity, 12)) for n in got] == [(1, 1.0), (3, 1.0)]
        got = brute_knn(tiny, compute_means(tiny), 1, "user_based", 5, "pearson")
        assert [(n.neighbor_id, round(n.similarity, 12)) for n in got] == [(2, 1.0), (3, -1.0)]

    def test_wacs_halves(self, tiny):
        got = brute_knn(tiny, compute_means(tiny), 1, "user_based", 5, "wacs")
        assert got[0].similarity == pytest.approx(0.5 * 3 / math.sqrt(13))

    def test_k_exceeds_candidates(self, tiny):
        assert len(brute_knn(tiny, compute_means(tiny), 1, "user_based", 50)) == 2

    def test_no_overlap_ties_by_id(self):
        ds = make_dataset([(9, 1, 5), (9, 2, 1), (4, 3, 2), (2, 4, 5), (7, 5, 1)])
        got = brute_knn(ds, compute_means(ds), 9, "user_based", 5)
        assert got == [(2, 0.0), (4, 0.0), (7, 0.0)]

    def test_flagged_zero_below_positive(self):
        ds = make_dataset([(1, 1, 5), (1, 2, 1), (2, 1, 5), (2, 2, 1), (3, 3, 4), (3, 4, 2)])
        got = brute_knn(ds, compute_means(ds), 1, "user_based", 5)
        assert [n.neighbor_id for n in got] == [2, 3]
        assert got[0].similarity > 0 == got[1].similarity

    def test_unknown(self, tiny):
        with pytest.raises(ValueError):
            brute_knn(tiny, compute_means(tiny), 1, "user_based", 5, "cosine")
        with pytest.raises(KeyError):
            brute_knn(tiny, compute_means(tiny), 99, "user_based", 5)

    def test_item_orientation(self, tiny):
        means = compute_means(tiny)
        got = brute_knn(tiny, means, 1, "item_based", 5)
        for n in got:
            want = acs(tiny.by_item[1], tiny.by_item[n.neighbor_id], means.item_mean[1], means.item_mean[n.neighbor_id])
            assert n.similarity == pytest.approx(want, abs=1e-12)


# properties -----------------------------------------------------------------

profiles = st.dictionaries(st.integers(1, 8), st.integers(1, 5), min_size=1, max_size=8)
means_ = st.floats(1, 5)


@settings(max_examples=200, deadline=None)
@given(profiles, profiles, means_, means_)
def test_symmetry_and_range(x, y, mx, my):
    assert pearson(x, y) == pytest.approx(pearson(y, x), abs=1e-12)
    assert acs(x, y, mx, my) == pytest.approx(acs(y, x, my, mx), abs=1e-12)
    for v in (pearson(x, y), acs(x, y, mx, my), wacs(x, y, mx, my)):
        assert -1 <= v <= 1
    assert abs(wacs(x, y, mx, my)) <= abs(acs(x, y, mx, my)) + 1e-15


@settings(max_examples=100, deadline=None)
@given(profiles, st.floats(0.1, 10))
def test_acs_positive_scaling(x, c):
    # scaling one side's MCRs by c > 0 leaves the cosine unchanged
    y = {i: 3 + c * (r - 3) for i, r in x.items()}
    v, ok = acs(x, y, 3, 3, return_flag=True)
    assume(ok)
    assert v == pytest.approx(1.0, abs=1e-9)


triples = st.lists(
    st.tuples(st.integers(1, 12), st.integers(1, 10), st.integers(1, 5)),
    min_size=2,
    max_size=70,
    unique_by=lambda t: t[:2],
)


@settings(max_examples=60, deadline=None)
@given(triples, st.sampled_from(["user_based", "item_based"]))
def test_dense_brute_force_matches_scalar(ts, mode):
    ds = make_dataset(ts)
    means = compute_means(ds)
    bf = BruteForce(ds, means, mode)
    prof = ds.profiles(mode)
    mu = means.of(mode)
    for q in list(prof)[:4]:
        out = bf.all_scores(q)
        for sim in ("pearson", "acs", "wacs"):
            ids, vals = out[sim]
            for cid, v in zip(ids.tolist(), vals.tolist()):
                if sim == "pearson":
                    want = pearson(prof[q], prof[cid])
                elif sim == "acs":
                    want = acs(prof[q], prof[cid], mu[q], mu[cid])
                else:
                    want = wacs(prof[q], prof[cid], mu[q], mu[cid])
                assert v == pytest.approx(want, abs=1e-9), (sim, q, cid)


def test_dense_matches_scalar_on_random_corpus():
    rng = np.random.default_rng(5)
    ts = {(int(u), int(i)): int(r) for u, i, r in zip(rng.integers(1, 60, 900), rng.integers(1, 40, 900), rng.integers(1, 6, 900))}
    ds = make_dataset([(u, i, r) for (u, i), r in ts.items()])
    means = compute_means(ds)
    bf = BruteForce(ds, means, "user_based")
    for q in (1, 17, 33):
        ids, vals = bf.scores(q, "pearson")
        for cid, v in zip(ids.tolist(), vals.tolist()):
            assert v == pytest.approx(pearson(ds.by_user[q], ds.by_user[cid]), abs=1e-9)
