"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--pool-size N] [--queries N]

Exercises the two hot paths behind retrieval: token-LCS dynamic programming
(quadratic per document pair, the cost center of LCS ranking over a real
selection pool) and BM25 posting accumulation. The same synthetic workload
runs against both backends; the pure path is what you get when the
extension is not built (COMPTRA_PURE_PYTHON=1 forces it at import time).
"""

import argparse
import random
import time

import numpy as np

from comptra._kernels import _fallback

try:
    from comptra._kernels import _speedups
except ImportError:
    _speedups = None


def make_workload(rng, pool_size, doc_len=20, vocab=5000):
    docs = [
        np.array([rng.randrange(vocab) for _ in range(rng.randint(5, doc_len))], dtype=np.int32)
        for _ in range(pool_size)
    ]
    return docs


def bench_lcs(impl, docs, queries):
    t0 = time.perf_counter()
    total = 0
    for query in queries:
        for doc in docs:
            total += impl.lcs_length_ids(query, doc)
    return time.perf_counter() - t0, total


def bench_bm25(impl, pool_size, n_terms, rng):
    norms = np.array([0.5 + rng.random() for _ in range(pool_size)], dtype=np.float64)
    postings = []
    for _ in range(n_terms):
        n_docs = rng.randint(pool_size // 4, pool_size)
        doc_ids = np.array(sorted(rng.sample(range(pool_size), n_docs)), dtype=np.int32)
        tfs = np.array([float(rng.randint(1, 4)) for _ in range(n_docs)], dtype=np.float64)
        postings.append((doc_ids, tfs, rng.random() * 3))
    scores = np.zeros(pool_size)
    t0 = time.perf_counter()
    for doc_ids, tfs, idf in postings:
        impl.bm25_accumulate(doc_ids, tfs, idf, 1.5, norms, scores)
    return time.perf_counter() - t0, float(scores.sum())


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pool-size", type=int, default=1000)
    parser.add_argument("--queries", type=int, default=50)
    parser.add_argument("--bm25-terms", type=int, default=2000)
    args = parser.parse_args()

    rng = random.Random(0)
    docs = make_workload(rng, args.pool_size)
    queries = make_workload(rng, args.queries)

    backends = [("python", _fallback)]
    if _speedups is not None:
        backends.insert(0, ("c", _speedups))
    else:
        print("compiled kernels not built; benchmarking the fallback only\n")

    print(f"LCS: {args.queries} queries x {args.pool_size} docs")
    results = {}
    for name, impl in backends:
        elapsed, checksum = bench_lcs(impl, docs, queries)
        results[name] = elapsed
        print(f"  {name:>7}: {elapsed * 1000:9.1f} ms  (checksum {checksum})")
    if len(results) == 2:
        print(f"  speedup: {results['python'] / results['c']:.1f}x")

    print(f"\nBM25 accumulate: {args.bm25_terms} terms over {args.pool_size} docs")
    results = {}
    for name, impl in backends:
        elapsed, checksum = bench_bm25(impl, args.pool_size, args.bm25_terms, random.Random(1))
        results[name] = elapsed
        print(f"  {name:>7}: {elapsed * 1000:9.1f} ms  (checksum {checksum:.3f})")
    if len(results) == 2:
        print(f"  speedup: {results['python'] / results['c']:.1f}x")


if __name__ == "__main__":
    main()
