"""Parity between the compiled and pure-Python kernel backends."""

import importlib
import random

import numpy as np
import pytest

from comptra._kernels import _fallback

try:
    from comptra._kernels import _speedups
except ImportError:
    _speedups = None

needs_ext = pytest.mark.skipif(_speedups is None, reason="compiled kernels not built")


def random_ids(rng, max_len=40, vocab=12):
    n = rng.randint(0, max_len)
    return np.array([rng.randrange(vocab) for _ in range(n)], dtype=np.int32)


@needs_ext
def test_lcs_parity():
    rng = random.Random(0)
    for _ in range(300):
        a = random_ids(rng)
        b = random_ids(rng)
        assert _speedups.lcs_length_ids(a, b) == _fallback.lcs_length_ids(a, b)


@needs_ext
def test_bm25_accumulate_parity():
    rng = random.Random(1)
    for _ in range(100):
        n_docs = rng.randint(1, 30)
        n_postings = rng.randint(0, n_docs)
        doc_ids = np.array(sorted(rng.sample(range(n_docs), n_postings)), dtype=np.int32)
        tfs = np.array([rng.randint(1, 5) for _ in range(n_postings)], dtype=np.float64)
        norms = np.array([0.5 + rng.random() for _ in range(n_docs)], dtype=np.float64)
        idf = rng.random() * 3
        k1 = 1.5
        s1 = np.zeros(n_docs)
        s2 = np.zeros(n_docs)
        _speedups.bm25_accumulate(doc_ids, tfs, idf, k1, norms, s1)
        _fallback.bm25_accumulate(doc_ids, tfs, idf, k1, norms, s2)
        assert np.array_equal(s1, s2)


def test_fallback_lcs_edges():
    empty = np.array([], dtype=np.int32)
    one = np.array([3], dtype=np.int32)
    assert _fallback.lcs_length_ids(empty, one) == 0
    assert _fallback.lcs_length_ids(one, one) == 1


def test_forced_pure_python_backend(monkeypatch):
    monkeypatch.setenv("COMPTRA_PURE_PYTHON", "1")
    import comptra._kernels as kernels

    reloaded = importlib.reload(kernels)
    try:
        assert reloaded.BACKEND == "python"
    finally:
        monkeypatch.delenv("COMPTRA_PURE_PYTHON")
        importlib.reload(kernels)
