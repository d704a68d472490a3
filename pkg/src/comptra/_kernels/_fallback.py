"""Pure-Python kernels, used when the compiled extension is unavailable
(or forced via COMPTRA_PURE_PYTHON=1). Same signatures and results as
comptra._kernels._speedups."""


def lcs_length_ids(a, b) -> int:
    """Length of the longest common subsequence of two int sequences."""
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return 0
    if m > n:  # keep the DP row short
        a, b = b, a
        n, m = m, n
    prev = [0] * (m + 1)
    for i in range(1, n + 1):
        ai = a[i - 1]
        curr = [0] * (m + 1)
        for j in range(1, m + 1):
            if ai == b[j - 1]:
                curr[j] = prev[j - 1] + 1
            else:
                left = curr[j - 1]
                up = prev[j]
                curr[j] = left if left > up else up
        prev = curr
    return prev[m]


def bm25_accumulate(doc_ids, tfs, idf, k1, norms, scores) -> None:
    """Add one query term's BM25 contribution to ``scores`` in place."""
    k1p1 = k1 + 1.0
    for i in range(len(doc_ids)):
        d = doc_ids[i]
        tf = tfs[i]
        scores[d] += idf * (tf * k1p1) / (tf + norms[d])
