"""Scorers: frozen hand-corpus values, scalar vs. vectorized agreement, limits."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcrcf.encoder import EncodedDocument, TermId, flip, norm
from mcrcf.index import build_index, search
from mcrcf.scorers import (
    ScorerConfig,
    score_bm25,
    score_dirichlet,
    score_document,
    score_jelinek_mercer,
    score_tf,
    score_tfidf,
)


def T(s):
    return TermId.parse(s)


def doc(doc_id, terms, mean=3.0):
    prate = {T(k): v for k, v in terms.items()}
    return EncodedDocument(doc_id, prate, flip(prate), mean, norm(prate))


D1 = {"p1": 3, "n2": 1}
D2 = {"p1": 1, "p3": 2}
D3 = {"n2": 2, "p3": 1, "p4": 4}
Q = {T("p1"): 2, T("p3"): 1}

# Values from an independent scratch evaluation of the textbook formulas
# over plain string-keyed dicts.
TFIDF_2DOC = [1.0371775414881972, 1.2973624459996826]
BM25_3DOC = [1.5238012400809113, 1.819262460442485, 0.39019169220400696]
DIRICHLET_2DOC_MU2000 = [0.0012471160845571204, 0.0019950131305199637]
DIRICHLET_2DOC_MU05 = [0.4902449160659694, 0.7621400520468966]
JM_2DOC = [5.100842513797254, 6.7562053808549365]


def index_of(*docs):
    return build_index([doc(i + 1, d) for i, d in enumerate(docs)], "user_based", 100)


def scores_by_search(index, cfg, query=Q):
    hits = search(index, "PRATE", query, 100, cfg)
    return {h.doc_id: h.score for h in hits}


def scalar(index, cfg, doc_id, query=Q):
    return score_document(cfg, query, index.document_terms(doc_id), index.stats("PRATE"))


class TestTf:
    def test_worked_example(self):
        d = {T("p37"): 5, T("n24"): 4}
        q = {T("p37"): 3, T("p24"): 6}
        s = score_tf(q, d, math.sqrt(41))
        assert s == pytest.approx(15 / math.sqrt(41), rel=1e-12)
        assert s / math.sqrt(45) == pytest.approx(15 / (math.sqrt(45) * math.sqrt(41)), rel=1e-12)

    def test_self_similarity(self):
        d = {T("p1"): 3, T("n2"): 4}
        assert score_tf(d, d, 5.0) == pytest.approx(5.0)
        assert score_tf(d, d, 5.0) / 5.0 == pytest.approx(1.0)

    def test_disjoint(self):
        assert score_tf({T("p1"): 1}, {T("p2"): 1}, 1.0) == 0.0


class TestTfidf:
    def test_hand_corpus(self):
        idx = index_of(D1, D2)
        got = scores_by_search(idx, ScorerConfig("tfidf"))
        assert [got[1], got[2]] == pytest.approx(TFIDF_2DOC, rel=1e-12)
        assert scalar(idx, ScorerConfig("tfidf"), 1) == pytest.approx(TFIDF_2DOC[0], rel=1e-12)

    def test_single_doc_ranking_matches_tf(self):
        idx = index_of(D3)
        assert search(idx, "PRATE", Q, 5, ScorerConfig("tfidf"))[0].doc_id == 1

    def test_rarer_term_weighs_more(self):
        idx = index_of({"p1": 1, "p2": 1}, {"p1": 1}, {"p1": 1})
        d = idx.document_terms(1)
        st_ = idx.stats("PRATE")
        common = score_tfidf({T("p1"): 1}, d, st_)
        rare = score_tfidf({T("p2"): 1}, d, st_)
        assert rare > common


class TestBm25:
    def test_hand_corpus(self):
        idx = index_of(D1, D2, D3)
        got = scores_by_search(idx, ScorerConfig("bm25"))
        assert [got[1], got[2], got[3]] == pytest.approx(BM25_3DOC, rel=1e-12)

    def test_saturation(self):
        idx = index_of({"p1": 10**9}, {"p2": 1})
        st_ = idx.stats("PRATE")
        from mcrcf.scorers import bm25_idf

        bound = float(bm25_idf(2, 1)) * 2 * (1.2 + 1)
        s = score_bm25({T("p1"): 2}, idx.document_terms(1), st_)
        assert s == pytest.approx(bound, rel=1e-6)
        assert s < bound

    def test_b_zero_ignores_length(self):
        idx = index_of({"p1": 3}, {"p1": 3, "p2": 50})
        st_ = idx.stats("PRATE")
        q = {T("p1"): 1}
        a = score_bm25(q, idx.document_terms(1), st_, b=0.0)
        b = score_bm25(q, idx.document_terms(2), st_, b=0.0)
        assert a == b
        assert score_bm25(q, idx.document_terms(1), st_) != score_bm25(q, idx.document_terms(2), st_)


class TestDirichlet:
    @pytest.mark.parametrize("mu, expected", [(2000.0, DIRICHLET_2DOC_MU2000), (0.5, DIRICHLET_2DOC_MU05)])
    def test_hand_corpus(self, mu, expected):
        idx = index_of(D1, D2)
        cfg = ScorerConfig("dirichlet", dirichlet_mu=mu)
        got = scores_by_search(idx, cfg)
        assert [got[1], got[2]] == pytest.approx(expected, rel=1e-12)

    def test_tf_monotone(self):
        idx = index_of({"p1": 9, "p2": 1}, {"p1": 1, "p2": 9}, {"p3": 10})
        got = scores_by_search(idx, ScorerConfig("dirichlet", dirichlet_mu=5.0), {T("p1"): 1})
        assert got[1] > got[2]

    def test_large_mu_goes_to_zero(self):
        idx = index_of(D1, D2)
        st_ = idx.stats("PRATE")
        s = [score_dirichlet(Q, idx.document_terms(1), st_, mu) for mu in (1e2, 1e4, 1e8)]
        assert s[0] >= s[1] >= s[2] >= 0
        assert s[2] < 1e-6

    def test_unseen_term_skipped(self):
        idx = index_of(D1)
        q = {T("p1"): 1, T("p99"): 5}
        assert score_dirichlet(q, idx.document_terms(1), idx.stats("PRATE"), 1.0) == score_dirichlet(
            {T("p1"): 1}, idx.document_terms(1), idx.stats("PRATE"), 1.0
        )


class TestJelinekMercer:
    def test_hand_corpus(self):
        idx = index_of(D1, D2)
        got = scores_by_search(idx, ScorerConfig("jelinek_mercer"))
        assert [got[1], got[2]] == pytest.approx(JM_2DOC, rel=1e-12)

    def test_lambda_to_one(self):
        idx = index_of(D1, D2)
        s = score_jelinek_mercer(Q, idx.document_terms(2), idx.stats("PRATE"), 1 - 1e-12)
        assert s == pytest.approx(0.0, abs=1e-9)

    def test_relative_frequency_monotone(self):
        idx = index_of({"p1": 2, "p2": 2}, {"p1": 2, "p2": 8})
        got = scores_by_search(idx, ScorerConfig("jelinek_mercer"), {T("p1"): 1})
        assert got[1] > got[2]


def test_config_validation():
    with pytest.raises(ValueError):
        ScorerConfig("cosine")
    with pytest.raises(ValueError):
        ScorerConfig("jelinek_mercer", jm_lambda=1.0)
    with pytest.raises(ValueError):
        ScorerConfig("dirichlet", dirichlet_mu=0)


# property tests over random corpora -----------------------------------------

term = st.builds(TermId, st.sampled_from("pn"), st.integers(1, 12))
terms = st.dictionaries(term, st.integers(1, 300), min_size=1, max_size=8)
corpora = st.lists(terms, min_size=1, max_size=6)
kinds = st.sampled_from(["tf", "tfidf", "bm25", "dirichlet", "jelinek_mercer"])


def _index(corpus):
    docs = [EncodedDocument(i + 1, c, flip(c), 3.0, norm(c)) for i, c in enumerate(corpus)]
    return build_index(docs, "user_based", 100)


@settings(max_examples=150, deadline=None)
@given(corpora, terms, kinds)
def test_vectorized_matches_scalar(corpus, query, kind):
    idx = _index(corpus)
    cfg = ScorerConfig(kind, dirichlet_mu=50.0)
    got = scores_by_search(idx, cfg, query)
    for doc_id in idx.doc_ids.tolist():
        d = idx.document_terms(doc_id)
        if not set(d) & set(query):
            assert doc_id not in got
            continue
        want = score_document(cfg, query, d, idx.stats("PRATE"))
        assert got[doc_id] == pytest.approx(want, rel=1e-9, abs=1e-12)
        assert got[doc_id] >= 0


@settings(max_examples=100, deadline=None)
@given(corpora, terms)
def test_tf_is_cosine(corpus, query):
    idx = _index(corpus)
    got = scores_by_search(idx, ScorerConfig("tf"), query)
    qn = norm(query)
    for doc_id, s in got.items():
        d = idx.document_terms(doc_id)
        direct = sum(query[t] * d[t] for t in query if t in d) / (qn * norm(d))
        assert s / qn == pytest.approx(direct, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(corpora, terms, st.sampled_from(["tf", "tfidf", "bm25"]))
def test_extra_term_keeps_overlap_contributions(corpus, query, kind):
    idx = _index(corpus)
    extra = {TermId("p", 999): 7}
    cfg = ScorerConfig(kind)
    a = scores_by_search(idx, cfg, query)
    b = scores_by_search(idx, cfg, {**query, **extra})
    assert a == pytest.approx(b)


@settings(max_examples=100, deadline=None)
@given(corpora, terms, kinds, st.randoms())
def test_order_invariance(corpus, query, kind, rnd):
    idx = _index(corpus)
    cfg = ScorerConfig(kind, dirichlet_mu=50.0)
    items = list(query.items())
    rnd.shuffle(items)
    a = scores_by_search(idx, cfg, query)
    b = scores_by_search(idx, cfg, dict(items))
    assert a.keys() == b.keys()
    for k in a:
        assert a[k] == pytest.approx(b[k], rel=1e-9)
