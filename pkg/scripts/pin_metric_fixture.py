"""Regenerate tests/data/metric_fixture.json.

Builds 50 deterministic (hypothesis, reference) pairs and pins corpus
chrF++ (nc:6, nw:2, beta 2, effective order, whitespace excluded from char
n-grams) and BLEU (max order 4, exp smoothing, case-kept punctuation-strip
tokenization) values computed by the reference oracle below.

The oracle is written independently of comptra.metrics on purpose: plain
dict counting, per-pair accumulation, textbook formulas. Keep it that way;
it is the second route that validates the package implementation.
"""

import json
import math
import random
import string
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"

WORDS = (
    "the a this that government said new report health market water city "
    "people children school plan group last first region country price "
    "minister week virus team game storm river border train station signed "
    "announced approved rejected confirmed found lost built opened closed "
    "increased dropped"
).split()
PUNCT_TAILS = ["", "", "", ".", ",", "!", "?", '"']


def sentence(rng, lo=4, hi=18):
    n = rng.randint(lo, hi)
    toks = []
    for _ in range(n):
        w = rng.choice(WORDS)
        if rng.random() < 0.1:
            w = w.capitalize()
        toks.append(w + rng.choice(PUNCT_TAILS))
    return " ".join(toks)


def corrupt(rng, text):
    """Derive a hypothesis from a reference: drop/substitute/insert words."""
    toks = text.split()
    out = []
    for t in toks:
        roll = rng.random()
        if roll < 0.12:
            continue  # deletion
        if roll < 0.30:
            out.append(rng.choice(WORDS))  # substitution
        else:
            out.append(t)
        if rng.random() < 0.08:
            out.append(rng.choice(WORDS))  # insertion
    return " ".join(out) if out else rng.choice(WORDS)


# --- oracle: BLEU ------------------------------------------------------------

def oracle_tokenize(text):
    toks = []
    for raw in text.split():
        tok = raw.strip(string.punctuation + "…“”‘’")
        # strip() with an explicit set approximates the package tokenizer;
        # fixture sentences only use ASCII punctuation so it is exact here
        if tok:
            toks.append(tok)
    return toks


def ngrams(tokens, n):
    table = {}
    for i in range(len(tokens) - n + 1):
        key = tuple(tokens[i:i + n])
        table[key] = table.get(key, 0) + 1
    return table


def oracle_bleu(hyps, refs):
    sys_len = ref_len = 0
    correct = [0] * 4
    total = [0] * 4
    for hyp, ref in zip(hyps, refs):
        h = oracle_tokenize(hyp)
        r = oracle_tokenize(ref)
        sys_len += len(h)
        ref_len += len(r)
        for n in range(1, 5):
            hg = ngrams(h, n)
            rg = ngrams(r, n)
            total[n - 1] += sum(hg.values())
            for gram, count in hg.items():
                correct[n - 1] += min(count, rg.get(gram, 0))
    precisions = []
    smooth = 1.0
    for n in range(4):
        if total[n] == 0:
            return 0.0
        if correct[n] == 0:
            smooth *= 2.0
            precisions.append(100.0 / (smooth * total[n]))
        else:
            precisions.append(100.0 * correct[n] / total[n])
    if min(precisions) == 0.0 or sys_len == 0:
        return 0.0
    log_mean = sum(math.log(p) for p in precisions) / 4.0
    bp = 1.0 if sys_len >= ref_len else math.exp(1.0 - ref_len / sys_len)
    return bp * math.exp(log_mean)


# --- oracle: chrF++ ----------------------------------------------------------

def oracle_chrf_words(text):
    out = []
    for w in text.split():
        if len(w) > 1 and w[-1] in string.punctuation:
            out.extend([w[:-1], w[-1]])
        elif len(w) > 1 and w[0] in string.punctuation:
            out.extend([w[0], w[1:]])
        else:
            out.append(w)
    return out


def char_ngrams(text, n):
    table = {}
    for i in range(len(text) - n + 1):
        key = text[i:i + n]
        table[key] = table.get(key, 0) + 1
    return table


def oracle_chrfpp(hyps, refs, char_n=6, word_n=2, beta=2.0):
    orders = char_n + word_n
    hyp_tot = [0] * orders
    ref_tot = [0] * orders
    match = [0] * orders
    for hyp, ref in zip(hyps, refs):
        h_chars = "".join(hyp.split())
        r_chars = "".join(ref.split())
        h_words = oracle_chrf_words(hyp)
        r_words = oracle_chrf_words(ref)
        for n in range(1, char_n + 1):
            hg = char_ngrams(h_chars, n)
            rg = char_ngrams(r_chars, n)
            hyp_tot[n - 1] += sum(hg.values())
            ref_tot[n - 1] += sum(rg.values())
            match[n - 1] += sum(min(c, rg.get(g, 0)) for g, c in hg.items())
        for n in range(1, word_n + 1):
            hg = ngrams(h_words, n)
            rg = ngrams(r_words, n)
            i = char_n + n - 1
            hyp_tot[i] += sum(hg.values())
            ref_tot[i] += sum(rg.values())
            match[i] += sum(min(c, rg.get(g, 0)) for g, c in hg.items())
    prec_sum = rec_sum = 0.0
    effective = 0
    for i in range(orders):
        if hyp_tot[i] > 0 and ref_tot[i] > 0:
            prec_sum += match[i] / hyp_tot[i]
            rec_sum += match[i] / ref_tot[i]
            effective += 1
    if effective == 0:
        return 0.0
    prec = prec_sum / effective
    rec = rec_sum / effective
    denom = beta * beta * prec + rec
    if denom == 0:
        return 0.0
    return 100.0 * (1 + beta * beta) * prec * rec / denom


def main():
    rng = random.Random(20240917)
    pairs = []
    for i in range(50):
        ref = sentence(rng)
        if i % 10 == 0:
            hyp = ref  # a few perfect hypotheses
        elif i % 10 == 9:
            hyp = sentence(rng)  # unrelated
        else:
            hyp = corrupt(rng, ref)
        pairs.append({"hyp": hyp, "ref": ref})

    hyps = [p["hyp"] for p in pairs]
    refs = [p["ref"] for p in pairs]
    fixture = {
        "pairs": pairs,
        "chrfpp": oracle_chrfpp(hyps, refs),
        "bleu": oracle_bleu(hyps, refs),
    }
    out = DATA / "metric_fixture.json"
    out.write_text(json.dumps(fixture, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {out}: chrfpp={fixture['chrfpp']:.4f} bleu={fixture['bleu']:.4f}")


if __name__ == "__main__":
    main()
