import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from comptra.errors import DimensionMismatch, EmptyPool, ZeroVector
from comptra.retrieval import (
    LcsRetriever,
    bm25_top_k,
    build_bm25_index,
    cosine_top_k,
    lcs_length,
    lcs_top_k,
    load_embedding_matrix,
    tokenize_retrieval,
)

from .conftest import make_corpus


def test_tokenize_basic():
    assert tokenize_retrieval("The cat, sat.") == ["the", "cat", "sat"]
    assert tokenize_retrieval("") == []
    assert tokenize_retrieval("Mallzee  was") == ["mallzee", "was"]
    assert tokenize_retrieval("...!!!") == []
    assert tokenize_retrieval("«Bonjour», dit-il") == ["bonjour", "dit-il"]


THREE_DOCS = ["the cat sat", "the dog sat", "cats and dogs"]


def test_build_index_counts():
    index = build_bm25_index(make_corpus(THREE_DOCS))
    assert index.doc_freq["the"] == 2
    assert index.doc_freq["sat"] == 2
    assert index.n_docs == 3
    assert index.avg_doc_len == pytest.approx(3.0)
    assert index.eligible == [True, True, True]


def test_build_index_empty_pool():
    corpus = make_corpus([])
    with pytest.raises(EmptyPool):
        build_bm25_index(corpus)


def test_build_index_empty_target_ineligible():
    corpus = make_corpus([("a b", "x"), ("c d", ""), ("e f", "y")])
    index = build_bm25_index(corpus)
    assert index.eligible == [True, False, True]
    # stats still cover all docs
    assert index.n_docs == 3 and index.avg_doc_len == pytest.approx(2.0)


def test_bm25_top1_matches_hand_formula():
    index = build_bm25_index(make_corpus(THREE_DOCS))
    top = bm25_top_k(index, "the cat", 1)
    assert top[0].pool_id == 0
    # doc 0 contribution by the stated formula
    k1, b, n = 1.5, 0.75, 3
    idf = lambda df: math.log(1 + (n - df + 0.5) / (df + 0.5))
    norm = k1 * (1 - b + b * 3 / 3)
    expected = idf(2) * (1 * (k1 + 1)) / (1 + norm) + idf(1) * (1 * (k1 + 1)) / (1 + norm)
    assert top[0].score == pytest.approx(expected)


def test_bm25_empty_query():
    index = build_bm25_index(make_corpus(THREE_DOCS))
    assert bm25_top_k(index, "", 3) == []
    assert bm25_top_k(index, "?!", 3) == []


def test_bm25_exact_doc_query_ranks_first():
    docs = ["alpha beta gamma", "delta epsilon zeta", "eta theta iota"]
    index = build_bm25_index(make_corpus(docs))
    for j, doc in enumerate(docs):
        assert bm25_top_k(index, doc, 1)[0].pool_id == j


def test_bm25_zero_fill_and_ineligible():
    corpus = make_corpus([("cat", "x"), ("dog", ""), ("bird", "y"), ("fish", "z")])
    index = build_bm25_index(corpus)
    got = bm25_top_k(index, "cat", 3)
    # doc 0 positive; docs 2,3 fill with score 0; doc 1 ineligible
    assert [c.pool_id for c in got] == [0, 2, 3]
    assert got[1].score == 0.0


def test_lcs_length_cases():
    assert lcs_length(["a", "b", "c"], ["a", "x", "b"]) == 2
    assert lcs_length(["x", "y"], ["x", "y"]) == 2
    assert lcs_length([], ["a", "b"]) == 0


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.sampled_from("abcde"), max_size=12),
    st.lists(st.sampled_from("abcde"), max_size=12),
)
def test_lcs_properties(a, b):
    ab = lcs_length(a, b)
    assert ab == lcs_length(b, a)
    assert ab <= min(len(a), len(b))
    assert lcs_length(a, a) == len(a)


def test_lcs_top_k_rules():
    corpus = make_corpus(["a b c", "a b", "z z z"])
    got = lcs_top_k(corpus, "a b c", 5)
    # whole eligible pool back, ranked; zero-score doc fills last
    assert [c.pool_id for c in got] == [0, 1, 2]
    assert [c.score for c in got] == [3.0, 2.0, 0.0]


def test_lcs_tie_breaks_by_id():
    corpus = make_corpus(["x a", "a y", "b b"])
    got = lcs_top_k(corpus, "a", 2)
    assert [c.pool_id for c in got] == [0, 1]


def test_lcs_append_doc_preserves_relative_order():
    docs = ["a b c d", "b c", "a d e", "q r s"]
    query = "a b c"
    before = [c.pool_id for c in lcs_top_k(make_corpus(docs), query, len(docs))]
    after = [c.pool_id for c in lcs_top_k(make_corpus(docs + ["a b c x"]), query, len(docs) + 1)]
    after_filtered = [i for i in after if i < len(docs)]
    assert after_filtered == before


def test_cosine_examples():
    vectors = np.array([[1.0, 0.0], [0.0, 1.0]])
    got = cosine_top_k(vectors, [0.6, 0.8], 2)
    assert [c.pool_id for c in got] == [1, 0]
    assert got[0].score == pytest.approx(0.8)
    assert got[1].score == pytest.approx(0.6)
    # self similarity
    got = cosine_top_k(vectors, [2.0, 0.0], 1)
    assert got[0].pool_id == 0 and got[0].score == pytest.approx(1.0, abs=1e-9)


def test_cosine_orthogonal_query_scores_zero():
    vectors = np.array([[1.0, 0.0], [2.0, 0.0]])
    got = cosine_top_k(vectors, [0.0, 1.0], 2)
    assert [c.pool_id for c in got] == [0, 1]
    assert all(c.score == pytest.approx(0.0, abs=1e-12) for c in got)


def test_cosine_errors():
    with pytest.raises(DimensionMismatch):
        cosine_top_k(np.eye(2), [1.0, 0.0, 0.0], 1)
    with pytest.raises(ZeroVector) as err:
        cosine_top_k(np.array([[1.0, 0.0], [0.0, 0.0]]), [1.0, 0.0], 1)
    assert err.value.index == 1


def test_bm25_append_doc_changes_scores_only_through_stats():
    """A doc's score is a pure function of (N, avgdl, df, tf, |d|): after a
    pool grows, recomputing with the new statistics reproduces the new
    index's scores for the old documents."""
    docs = ["cat dog sun", "dog dog run", "sea sun", "cat cat cat sea"]
    query = "cat dog sea"
    k1, b = 1.5, 0.75
    grown = build_bm25_index(make_corpus(docs + ["cat sea run extra words"]))

    n = grown.n_docs
    avgdl = grown.avg_doc_len
    for doc_id, doc in enumerate(docs):
        tokens = doc.split()
        norm = k1 * (1 - b + b * len(tokens) / avgdl)
        expected = 0.0
        for tok in query.split():
            tf = tokens.count(tok)
            if tf == 0:
                continue
            df = grown.doc_freq[tok]
            expected += math.log(1 + (n - df + 0.5) / (df + 0.5)) * (tf * (k1 + 1)) / (tf + norm)
        got = [c for c in bm25_top_k(grown, query, n) if c.pool_id == doc_id]
        assert got[0].score == pytest.approx(expected, rel=1e-12)


def test_load_embedding_matrix(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("2 3\n1 0 0\n0 0.5 0.5\n", encoding="utf-8")
    m = load_embedding_matrix(path)
    assert m.shape == (2, 3) and m[1, 2] == 0.5


def test_load_embedding_matrix_shape_mismatch(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("3 3\n1 0 0\n0 1 0\n", encoding="utf-8")
    with pytest.raises(DimensionMismatch):
        load_embedding_matrix(path)


def test_fetch_embeddings(monkeypatch):
    import comptra.retrieval as rt

    class FakeResponse:
        def raise_for_status(self):
            pass

        def json(self):
            return {"embeddings": [[1.0, 2.0], [3.0, 4.0]]}

    seen = {}

    def fake_post(url, json=None, timeout=None):
        seen["url"], seen["json"] = url, json
        return FakeResponse()

    monkeypatch.setattr(rt.httpx, "post", fake_post)
    got = rt.fetch_embeddings("http://emb.test", ["a", "b"])
    assert seen["json"] == {"input": ["a", "b"]}
    assert got.shape == (2, 2) and got[1, 0] == 3.0


# -- brute-force oracle equivalence -------------------------------------------

def oracle_bm25_rank(docs, eligible, query, k, k1=1.5, b=0.75):
    """Naive loops implementing the documented scoring and ranking rules."""
    doc_tokens = [d.split() for d in docs]
    n = len(docs)
    avgdl = sum(len(t) for t in doc_tokens) / n
    df = {}
    for tokens in doc_tokens:
        for tok in set(tokens):
            df[tok] = df.get(tok, 0) + 1
    scores = []
    for tokens in doc_tokens:
        dl = len(tokens)
        norm = k1 * (1 - b + b * dl / (avgdl if avgdl > 0 else 1.0))
        s = 0.0
        for q in query.split():
            tf = tokens.count(q)
            if tf == 0 or q not in df:
                continue
            idf = math.log(1 + (n - df[q] + 0.5) / (df[q] + 0.5))
            s += idf * (tf * (k1 + 1)) / (tf + norm)
        scores.append(s)
    return oracle_rank(scores, eligible, k)


def oracle_lcs_rank(docs, eligible, query, k):
    def lcs(a, b):
        table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
        for i in range(1, len(a) + 1):
            for j in range(1, len(b) + 1):
                if a[i - 1] == b[j - 1]:
                    table[i][j] = table[i - 1][j - 1] + 1
                else:
                    table[i][j] = max(table[i - 1][j], table[i][j - 1])
        return table[len(a)][len(b)]

    q = query.split()
    scores = [lcs(q, d.split()) for d in docs]
    return oracle_rank(scores, eligible, k)


def oracle_rank(scores, eligible, k):
    order = sorted((i for i in range(len(scores)) if eligible[i]), key=lambda i: (-scores[i], i))
    out = [i for i in order if scores[i] > 0][:k]
    for i in order:
        if len(out) >= k:
            break
        if scores[i] <= 0:
            out.append(i)
    return out


def random_pool(rng, max_docs=50, vocab=("cat", "dog", "sun", "sea", "run", "red", "big", "old")):
    n = rng.randint(1, max_docs)
    docs = [" ".join(rng.choices(vocab, k=rng.randint(1, 8))) for _ in range(n)]
    eligible = [rng.random() > 0.15 for _ in range(n)]
    rows = [(d, "t" if e else "") for d, e in zip(docs, eligible)]
    query = " ".join(rng.choices(vocab, k=rng.randint(1, 10)))
    return docs, eligible, rows, query


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_bm25_matches_bruteforce(seed):
    rng = random.Random(seed)
    for _ in range(40):
        docs, eligible, rows, query = random_pool(rng)
        k = rng.randint(1, 8)
        index = build_bm25_index(make_corpus(rows))
        got = [c.pool_id for c in bm25_top_k(index, query, k)]
        want = oracle_bm25_rank(docs, eligible, query, k)
        assert got == want


@pytest.mark.parametrize("seed", [4, 5, 6])
def test_lcs_matches_bruteforce(seed):
    rng = random.Random(seed)
    for _ in range(40):
        docs, eligible, rows, query = random_pool(rng)
        k = rng.randint(1, 8)
        retriever = LcsRetriever(make_corpus(rows))
        got = [c.pool_id for c in retriever.top_k(query, k)]
        want = oracle_lcs_rank(docs, eligible, query, k)
        assert got == want


def test_scores_non_increasing_with_id_ties():
    rng = random.Random(9)
    for _ in range(20):
        docs, eligible, rows, query = random_pool(rng)
        index = build_bm25_index(make_corpus(rows))
        got = bm25_top_k(index, query, len(docs))
        for a, b in zip(got, got[1:]):
            assert a.score > b.score or (a.score == b.score and a.pool_id < b.pool_id)
