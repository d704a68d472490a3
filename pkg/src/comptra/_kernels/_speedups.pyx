# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: token-LCS dynamic programming and BM25 posting
accumulation. Signatures mirror comptra._kernels._fallback exactly."""

import numpy as np

cimport cython
from libc.stdlib cimport free, malloc


def lcs_length_ids(int[:] a, int[:] b):
    """Length of the longest common subsequence of two int sequences."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    if n == 0 or m == 0:
        return 0
    cdef int *prev = <int *> malloc((m + 1) * sizeof(int))
    cdef int *curr = <int *> malloc((m + 1) * sizeof(int))
    if prev == NULL or curr == NULL:
        if prev != NULL:
            free(prev)
        if curr != NULL:
            free(curr)
        raise MemoryError()
    cdef Py_ssize_t i, j
    cdef int *tmp
    cdef int ai, best
    try:
        for j in range(m + 1):
            prev[j] = 0
            curr[j] = 0
        for i in range(1, n + 1):
            ai = a[i - 1]
            curr[0] = 0
            for j in range(1, m + 1):
                if ai == b[j - 1]:
                    curr[j] = prev[j - 1] + 1
                else:
                    best = prev[j]
                    if curr[j - 1] > best:
                        best = curr[j - 1]
                    curr[j] = best
            tmp = prev
            prev = curr
            curr = tmp
        return prev[m]
    finally:
        free(prev)
        free(curr)


def bm25_accumulate(int[:] doc_ids, double[:] tfs, double idf,
                    double k1, double[:] norms, double[:] scores):
    """Add one query term's BM25 contribution to ``scores`` in place.

    ``doc_ids``/``tfs`` are the term's postings; ``norms`` holds the
    per-document length normalization k1 * (1 - b + b * |d| / avgdl).
    """
    cdef Py_ssize_t i, d
    cdef double tf
    for i in range(doc_ids.shape[0]):
        d = doc_ids[i]
        tf = tfs[i]
        scores[d] += idf * (tf * (k1 + 1.0)) / (tf + norms[d])
