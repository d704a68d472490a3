"""Corpus-level BLEU and chrF++ plus paired bootstrap resampling.

Both metrics are computed from per-sentence sufficient statistics that sum
across the corpus, so bootstrap resamples only re-aggregate precomputed
count vectors. The bootstrap PRNG is a splitmix64 counter stream, fully
specified here, so results reproduce across platforms and runs.
"""

from __future__ import annotations

import math
import string
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import LengthMismatch
from .retrieval import tokenize_retrieval


@dataclass(frozen=True)
class BleuConfig:
    max_n: int = 4
    smoothing: str = "exp"
    tokenizer: str = "whitespace_punct"  # or "external" (pre-tokenized input)


@dataclass(frozen=True)
class ChrfConfig:
    char_n: int = 6
    word_n: int = 2
    beta: float = 2.0
    effective_order: bool = True
    whitespace_in_chars: bool = False

    def __post_init__(self):
        if self.char_n < 1 or self.word_n < 0 or self.beta <= 0:
            raise ValueError("invalid chrF++ configuration")

    @property
    def order(self) -> int:
        return self.char_n + self.word_n


@dataclass(frozen=True)
class MetricConfig:
    metric: str = "chrfpp"  # chrfpp | bleu
    bleu: BleuConfig = field(default_factory=BleuConfig)
    chrfpp: ChrfConfig = field(default_factory=ChrfConfig)


# ---------------------------------------------------------------------------
# BLEU
# ---------------------------------------------------------------------------

def bleu_tokenize(text: str, mode: str = "whitespace_punct") -> list[str]:
    """Case-preserving tokenization. "external" expects pre-tokenized text
    and only splits on whitespace."""
    if mode == "external":
        return text.split()
    if mode == "whitespace_punct":
        return tokenize_retrieval(text, lowercase=False)
    raise ValueError(f"unknown BLEU tokenizer: {mode!r}")


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu_sentence_stats(hyp_tokens: list[str], ref_tokens: list[str], max_n: int = 4) -> np.ndarray:
    """[sys_len, ref_len, correct_1..n, total_1..n]; sums across sentences
    give the corpus statistics."""
    stats = np.zeros(2 + 2 * max_n, dtype=np.float64)
    stats[0] = len(hyp_tokens)
    stats[1] = len(ref_tokens)
    for n in range(1, max_n + 1):
        hyp_ngrams = _ngram_counts(hyp_tokens, n)
        if not hyp_ngrams:
            continue
        ref_ngrams = _ngram_counts(ref_tokens, n)
        overlap = hyp_ngrams & ref_ngrams
        stats[1 + n] = sum(overlap.values())
        stats[1 + max_n + n] = sum(hyp_ngrams.values())
    return stats


def bleu_score_from_stats(stats: np.ndarray, cfg: BleuConfig | None = None) -> float:
    """Corpus BLEU in [0, 100] from aggregated statistics.

    Precisions use "exp" smoothing: the k-th zero-match order is replaced
    by 1 / (2^k * total_n). The geometric mean runs over all max_n orders;
    an order with no hypothesis n-grams at all zeroes the score. Brevity
    penalty is min(1, e^(1 - ref_len/sys_len)).
    """
    cfg = cfg or BleuConfig()
    max_n = cfg.max_n
    sys_len, ref_len = stats[0], stats[1]
    correct = stats[2:2 + max_n]
    total = stats[2 + max_n:2 + 2 * max_n]

    precisions = [0.0] * max_n
    smooth_scale = 1.0
    for n in range(max_n):
        if total[n] == 0:
            break
        if correct[n] == 0:
            if cfg.smoothing == "exp":
                smooth_scale *= 2.0
                precisions[n] = 100.0 / (smooth_scale * total[n])
            # smoothing "none": precision stays 0
        else:
            precisions[n] = 100.0 * correct[n] / total[n]

    if any(p == 0.0 for p in precisions):
        return 0.0
    if sys_len == 0:
        return 0.0
    bp = 1.0 if sys_len >= ref_len else math.exp(1.0 - ref_len / sys_len)
    return bp * math.exp(sum(math.log(p) for p in precisions) / max_n)


def bleu_corpus(hyps: list[str], refs: list[str], cfg: BleuConfig | None = None) -> float:
    if len(hyps) != len(refs) or not hyps:
        raise LengthMismatch(len(hyps), len(refs))
    cfg = cfg or BleuConfig()
    agg = np.zeros(2 + 2 * cfg.max_n, dtype=np.float64)
    for hyp, ref in zip(hyps, refs):
        agg += bleu_sentence_stats(
            bleu_tokenize(hyp, cfg.tokenizer), bleu_tokenize(ref, cfg.tokenizer), cfg.max_n
        )
    return bleu_score_from_stats(agg, cfg)


# ---------------------------------------------------------------------------
# chrF++
# ---------------------------------------------------------------------------

_PUNCTUATION = set(string.punctuation)


def chrf_word_tokens(text: str) -> list[str]:
    """Whitespace tokens with a single leading OR trailing ASCII
    punctuation character split off (chrF++ word tokenization)."""
    tokens: list[str] = []
    for w in text.split():
        if len(w) == 1:
            tokens.append(w)
        elif w[-1] in _PUNCTUATION:
            tokens.extend((w[:-1], w[-1]))
        elif w[0] in _PUNCTUATION:
            tokens.extend((w[0], w[1:]))
        else:
            tokens.append(w)
    return tokens


def _char_ngram_counts(chars: str, n: int) -> Counter:
    return Counter(chars[i:i + n] for i in range(len(chars) - n + 1))


def chrf_sentence_stats(hyp: str, ref: str, cfg: ChrfConfig | None = None) -> np.ndarray:
    """Per order (char 1..char_n, then word 1..word_n) a [hyp_count,
    ref_count, match_count] triple, flattened; sums give corpus stats."""
    cfg = cfg or ChrfConfig()
    stats = np.zeros(3 * cfg.order, dtype=np.float64)

    hyp_chars = hyp if cfg.whitespace_in_chars else "".join(hyp.split())
    ref_chars = ref if cfg.whitespace_in_chars else "".join(ref.split())
    for n in range(1, cfg.char_n + 1):
        hyp_ngrams = _char_ngram_counts(hyp_chars, n)
        ref_ngrams = _char_ngram_counts(ref_chars, n)
        base = 3 * (n - 1)
        stats[base] = sum(hyp_ngrams.values())
        stats[base + 1] = sum(ref_ngrams.values())
        if hyp_ngrams and ref_ngrams:
            stats[base + 2] = sum((hyp_ngrams & ref_ngrams).values())

    if cfg.word_n:
        hyp_words = chrf_word_tokens(hyp)
        ref_words = chrf_word_tokens(ref)
        for n in range(1, cfg.word_n + 1):
            hyp_ngrams = _ngram_counts(hyp_words, n)
            ref_ngrams = _ngram_counts(ref_words, n)
            base = 3 * (cfg.char_n + n - 1)
            stats[base] = sum(hyp_ngrams.values())
            stats[base + 1] = sum(ref_ngrams.values())
            if hyp_ngrams and ref_ngrams:
                stats[base + 2] = sum((hyp_ngrams & ref_ngrams).values())
    return stats


def chrf_score_from_stats(stats: np.ndarray, cfg: ChrfConfig | None = None) -> float:
    """chrF++ in [0, 100] from aggregated statistics.

    Precision and recall are macro-averaged across n-gram orders, then
    combined once with F_beta. With effective-order handling, orders with
    no n-grams on either side are left out of the average.
    """
    cfg = cfg or ChrfConfig()
    avg_prec = 0.0
    avg_rec = 0.0
    effective = 0
    for i in range(cfg.order):
        n_hyp, n_ref, n_match = stats[3 * i:3 * i + 3]
        if n_hyp > 0 and n_ref > 0:
            avg_prec += n_match / n_hyp
            avg_rec += n_match / n_ref
            effective += 1
        elif not cfg.effective_order:
            effective += 1
    if effective == 0:
        return 0.0
    avg_prec /= effective
    avg_rec /= effective
    denom = cfg.beta ** 2 * avg_prec + avg_rec
    if denom == 0:
        return 0.0
    return 100.0 * (1 + cfg.beta ** 2) * avg_prec * avg_rec / denom


def chrfpp_corpus(hyps: list[str], refs: list[str], cfg: ChrfConfig | None = None) -> float:
    if len(hyps) != len(refs) or not hyps:
        raise LengthMismatch(len(hyps), len(refs))
    cfg = cfg or ChrfConfig()
    agg = np.zeros(3 * cfg.order, dtype=np.float64)
    for hyp, ref in zip(hyps, refs):
        agg += chrf_sentence_stats(hyp, ref, cfg)
    return chrf_score_from_stats(agg, cfg)


# ---------------------------------------------------------------------------
# paired bootstrap
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX_1 = 0xBF58476D1CE4E5B9
_MIX_2 = 0x94D049BB133111EB


def splitmix64(seed: int, n: int) -> np.ndarray:
    """First ``n`` outputs of the splitmix64 generator seeded with ``seed``.

    The i-th output (1-based) mixes state seed + i * 0x9E3779B97F4A7C15:
    z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
    z *= 0x94D049BB133111EB; z ^= z >> 31. All arithmetic mod 2^64.
    """
    with np.errstate(over="ignore"):
        z = np.uint64(seed & _MASK64) + np.uint64(_GAMMA) * np.arange(1, n + 1, dtype=np.uint64)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_2)
        z = z ^ (z >> np.uint64(31))
    return z


def bootstrap_indices(seed: int, sample_index: int, sample_size: int, n_sentences: int) -> np.ndarray:
    """Indices (with replacement) for one resample; the per-sample seed is
    seed + sample_index."""
    draws = splitmix64(seed + sample_index, sample_size)
    return (draws % np.uint64(n_sentences)).astype(np.int64)


@dataclass(frozen=True)
class SignificanceResult:
    score_a: float
    score_b: float
    wins_a: int
    wins_b: int
    ties: int
    p_value: float
    significant: bool
    n_samples: int
    alpha: float


def _stats_matrix(metric: str, hyps, refs, cfg: MetricConfig):
    if metric == "bleu":
        rows = [
            bleu_sentence_stats(
                bleu_tokenize(h, cfg.bleu.tokenizer),
                bleu_tokenize(r, cfg.bleu.tokenizer),
                cfg.bleu.max_n,
            )
            for h, r in zip(hyps, refs)
        ]
        return np.vstack(rows), lambda agg: bleu_score_from_stats(agg, cfg.bleu)
    if metric == "chrfpp":
        rows = [chrf_sentence_stats(h, r, cfg.chrfpp) for h, r in zip(hyps, refs)]
        return np.vstack(rows), lambda agg: chrf_score_from_stats(agg, cfg.chrfpp)
    raise ValueError(f"unknown metric: {metric!r}")


def paired_bootstrap(
    hyps_a: list[str],
    hyps_b: list[str],
    refs: list[str],
    metric_cfg: MetricConfig | None = None,
    n_samples: int = 300,
    sample_size: int = 500,
    alpha: float = 0.05,
    seed: int = 0,
) -> SignificanceResult:
    """Paired bootstrap test of "system A better than system B".

    Each of ``n_samples`` resamples draws ``sample_size`` sentence indices
    with replacement, scores both systems on the drawn subset, and counts
    strict wins. p = 1 - wins_a / n_samples; significant iff p < alpha.
    """
    if not (len(hyps_a) == len(hyps_b) == len(refs)) or not refs:
        raise LengthMismatch(len(hyps_a), len(refs))
    metric_cfg = metric_cfg or MetricConfig()

    stats_a, score_fn = _stats_matrix(metric_cfg.metric, hyps_a, refs, metric_cfg)
    stats_b, _ = _stats_matrix(metric_cfg.metric, hyps_b, refs, metric_cfg)

    wins_a = wins_b = ties = 0
    n = len(refs)
    for i in range(n_samples):
        idx = bootstrap_indices(seed, i, sample_size, n)
        sample_a = score_fn(stats_a[idx].sum(axis=0))
        sample_b = score_fn(stats_b[idx].sum(axis=0))
        if sample_a > sample_b:
            wins_a += 1
        elif sample_b > sample_a:
            wins_b += 1
        else:
            ties += 1

    p_value = 1.0 - wins_a / n_samples
    return SignificanceResult(
        score_a=score_fn(stats_a.sum(axis=0)),
        score_b=score_fn(stats_b.sum(axis=0)),
        wins_a=wins_a,
        wins_b=wins_b,
        ties=ties,
        p_value=p_value,
        significant=p_value < alpha,
        n_samples=n_samples,
        alpha=alpha,
    )
