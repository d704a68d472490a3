"""Rank selection-pool sentences against a query.

Three scorers share one ranking contract: scores non-increasing, ties by
ascending pool id, and zero-score documents only used to fill up to k when
there are not enough positive-score documents. Documents whose target side
is empty are never returned (a demonstration without a translation is
useless in a few-shot prompt).
"""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from dataclasses import dataclass, field

import httpx
import numpy as np

from . import _kernels
from .corpus import ParallelCorpus
from .errors import DimensionMismatch, EmptyPool, ZeroVector

DEFAULT_K1 = 1.5
DEFAULT_B = 0.75


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _strip_punct(token: str) -> str:
    start = 0
    end = len(token)
    while start < end and _is_punct(token[start]):
        start += 1
    while end > start and _is_punct(token[end - 1]):
        end -= 1
    return token[start:end]


def tokenize_retrieval(text: str, lowercase: bool = True) -> list[str]:
    """Whitespace tokens, lowercased, with leading/trailing punctuation
    codepoints stripped; empty tokens dropped."""
    if lowercase:
        text = text.lower()
    tokens = []
    for raw in text.split():
        tok = _strip_punct(raw)
        if tok:
            tokens.append(tok)
    return tokens


@dataclass(frozen=True)
class ScoredCandidate:
    pool_id: int
    score: float


def rank_candidates(scores, eligible, k: int) -> list[ScoredCandidate]:
    """Apply the shared ranking contract to a full score vector.

    Positive-score eligible docs come first, sorted by descending score and
    ascending id; if fewer than k, the remaining eligible docs fill the list
    in the same order (all-zero ties therefore appear by ascending id).
    """
    order = sorted(
        (i for i in range(len(scores)) if eligible[i]),
        key=lambda i: (-scores[i], i),
    )
    positive = [i for i in order if scores[i] > 0]
    chosen = positive[:k]
    if len(chosen) < k:
        rest = [i for i in order if scores[i] <= 0]
        chosen.extend(rest[: k - len(chosen)])
    return [ScoredCandidate(pool_id=i, score=float(scores[i])) for i in chosen]


@dataclass
class RetrievalIndex:
    """BM25 sufficient statistics over a tokenized pool.

    Statistics (doc_freq, avg_doc_len) cover all documents; ``eligible``
    only gates which documents may be returned.
    """

    doc_tokens: list[list[str]]
    doc_freq: dict[str, int]
    avg_doc_len: float
    n_docs: int
    k1: float = DEFAULT_K1
    b: float = DEFAULT_B
    eligible: list[bool] = field(default_factory=list)

    # internal acceleration structures
    _postings: dict[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict, repr=False)
    _norms: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)

    def idf(self, token: str) -> float:
        df = self.doc_freq.get(token, 0)
        return math.log(1.0 + (self.n_docs - df + 0.5) / (df + 0.5))


def build_bm25_index(corpus: ParallelCorpus, k1: float = DEFAULT_K1, b: float = DEFAULT_B) -> RetrievalIndex:
    if len(corpus) == 0:
        raise EmptyPool("cannot index an empty corpus")

    doc_tokens = [tokenize_retrieval(p.source) for p in corpus.pairs]
    eligible = [bool(p.target) for p in corpus.pairs]

    doc_freq: Counter[str] = Counter()
    by_token: dict[str, list[tuple[int, int]]] = {}
    for doc_id, tokens in enumerate(doc_tokens):
        counts = Counter(tokens)
        for token, tf in counts.items():
            doc_freq[token] += 1
            by_token.setdefault(token, []).append((doc_id, tf))

    lengths = np.array([len(t) for t in doc_tokens], dtype=np.float64)
    avg_len = float(lengths.mean())
    # all-empty pools never match anything; avoid 0/0 in the norm table
    denom = avg_len if avg_len > 0 else 1.0
    norms = k1 * (1.0 - b + b * lengths / denom)

    postings = {
        token: (
            np.array([d for d, _ in entries], dtype=np.int32),
            np.array([tf for _, tf in entries], dtype=np.float64),
        )
        for token, entries in by_token.items()
    }

    return RetrievalIndex(
        doc_tokens=doc_tokens,
        doc_freq=dict(doc_freq),
        avg_doc_len=avg_len,
        n_docs=len(doc_tokens),
        k1=k1,
        b=b,
        eligible=eligible,
        _postings=postings,
        _norms=norms,
    )


def bm25_scores(index: RetrievalIndex, query: str) -> np.ndarray:
    """Okapi BM25 scores for every pool document.

    idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5)); each query token (counted
    with multiplicity) contributes idf * tf*(k1+1) / (tf + k1*(1-b+b*|d|/avgdl)).
    """
    scores = np.zeros(index.n_docs, dtype=np.float64)
    for token in tokenize_retrieval(query):
        entry = index._postings.get(token)
        if entry is None:
            continue
        doc_ids, tfs = entry
        _kernels.bm25_accumulate(doc_ids, tfs, index.idf(token), index.k1, index._norms, scores)
    return scores


def bm25_top_k(index: RetrievalIndex, query: str, k: int) -> list[ScoredCandidate]:
    if k < 1:
        raise ValueError("k must be >= 1")
    if not tokenize_retrieval(query):
        return []
    return rank_candidates(bm25_scores(index, query), index.eligible, k)


def lcs_length(a: list[str], b: list[str]) -> int:
    """Longest common subsequence length over token sequences."""
    if not a or not b:
        return 0
    vocab: dict[str, int] = {}
    ids_a = np.array([vocab.setdefault(t, len(vocab)) for t in a], dtype=np.int32)
    ids_b = np.array([vocab.setdefault(t, len(vocab)) for t in b], dtype=np.int32)
    return int(_kernels.lcs_length_ids(ids_a, ids_b))


class LcsRetriever:
    """Pre-tokenized pool for repeated LCS queries."""

    def __init__(self, corpus: ParallelCorpus):
        if len(corpus) == 0:
            raise EmptyPool("cannot index an empty corpus")
        self.eligible = [bool(p.target) for p in corpus.pairs]
        self._vocab: dict[str, int] = {}
        self._doc_ids: list[np.ndarray] = []
        self._doc_token_sets: list[set[int]] = []
        for p in corpus.pairs:
            ids = np.array(
                [self._vocab.setdefault(t, len(self._vocab)) for t in tokenize_retrieval(p.source)],
                dtype=np.int32,
            )
            self._doc_ids.append(ids)
            self._doc_token_sets.append(set(ids.tolist()))

    def scores(self, query: str) -> np.ndarray:
        q_tokens = tokenize_retrieval(query)
        scores = np.zeros(len(self._doc_ids), dtype=np.float64)
        q_ids_list = [self._vocab.get(t, -1) for t in q_tokens]
        q_ids = np.array(q_ids_list, dtype=np.int32)
        q_set = set(i for i in q_ids_list if i >= 0)
        for d, ids in enumerate(self._doc_ids):
            if q_set.isdisjoint(self._doc_token_sets[d]):
                continue  # no shared token, LCS is 0
            scores[d] = _kernels.lcs_length_ids(q_ids, ids)
        return scores

    def top_k(self, query: str, k: int) -> list[ScoredCandidate]:
        if k < 1:
            raise ValueError("k must be >= 1")
        if not tokenize_retrieval(query):
            return []
        return rank_candidates(self.scores(query), self.eligible, k)


def lcs_top_k(corpus: ParallelCorpus, query: str, k: int) -> list[ScoredCandidate]:
    """One-shot LCS ranking; build an LcsRetriever for repeated queries."""
    return LcsRetriever(corpus).top_k(query, k)


def cosine_top_k(vectors: np.ndarray, query_vec, k: int, eligible=None) -> list[ScoredCandidate]:
    """Rank pool embedding rows by cosine similarity to the query vector."""
    if k < 1:
        raise ValueError("k must be >= 1")
    vectors = np.asarray(vectors, dtype=np.float64)
    query = np.asarray(query_vec, dtype=np.float64).reshape(-1)
    if vectors.ndim != 2 or vectors.shape[1] != query.shape[0]:
        got = vectors.shape[1] if vectors.ndim == 2 else None
        raise DimensionMismatch(query.shape[0], got)
    norms = np.linalg.norm(vectors, axis=1)
    zero = np.nonzero(norms == 0)[0]
    if zero.size:
        raise ZeroVector(int(zero[0]))
    q_norm = np.linalg.norm(query)
    if q_norm == 0:
        raise ZeroVector(-1)
    scores = (vectors @ query) / (norms * q_norm)
    if eligible is None:
        eligible = [True] * vectors.shape[0]
    return rank_candidates(scores, eligible, k)


def load_embedding_matrix(path) -> np.ndarray:
    """Read the text matrix format: first line ``n_docs dim``, then one
    whitespace-separated row per document."""
    with open(path, encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 2:
            raise ValueError("matrix header must be 'n_docs dim'")
        n_docs, dim = int(header[0]), int(header[1])
        matrix = np.loadtxt(f, dtype=np.float64, ndmin=2)
    if matrix.shape != (n_docs, dim):
        raise DimensionMismatch((n_docs, dim), tuple(matrix.shape))
    return matrix


def fetch_embeddings(endpoint_url: str, texts: list[str], timeout_s: float = 120.0) -> np.ndarray:
    """Fetch embeddings from an HTTP service: ``{"input": [...]}`` in,
    ``{"embeddings": [[...], ...]}`` out."""
    resp = httpx.post(endpoint_url, json={"input": texts}, timeout=timeout_s)
    resp.raise_for_status()
    return np.asarray(resp.json()["embeddings"], dtype=np.float64)
