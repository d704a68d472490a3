"""Translation orchestration: zero-shot, few-shot, compositional, and
ensemble selection, for single sentences and whole corpora.

Every sentence produces a full TranslationRecord trace. Failures never
abort a corpus run; they are recorded on the sentence. Phrase translations
fan out concurrently but are always aggregated in phrase order, so traces
are byte-identical across parallelism settings for a fixed backend.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol

import httpx

from .cleaning import DropReason, PhrasePair, ScriptProfile, filter_phrase_pairs, script_profile_for, truncate_repeating_bigrams
from .corpus import DependencyTree, LanguageTag, ParallelCorpus
from .decompose import DecomposeContext, DecompositionStrategy, PhraseSet, decompose, load_default_stopwords
from .errors import ScorerFailure
from .llm import BackendConfig, ChatRequest, get_client
from .prompts import Demonstration, PromptKind, PromptLibrary, render_translate_prompt
from .retrieval import (
    LcsRetriever,
    ScoredCandidate,
    build_bm25_index,
    bm25_top_k,
    cosine_top_k,
    tokenize_retrieval,
)

FLAG_ZERO_DEMONSTRATIONS = "zero_demonstrations"
FLAG_NO_KEPT_PAIRS = "no_kept_pairs"

# external MT transport; module-level so tests can substitute it
_post = httpx.post

MODES = ("zero_shot", "few_shot", "comptra")


@dataclass(frozen=True)
class PipelineConfig:
    strategy: DecompositionStrategy = field(default_factory=DecompositionStrategy)
    retriever: str = "bm25"  # bm25 | lcs | cosine
    k: int = 5
    translate_max_tokens: int = 500
    merge_max_tokens: int = 2000
    phrase_translator: str = "llm_few_shot"  # llm_few_shot | external_mt
    external_mt_endpoint: Optional[str] = None
    parallelism: int = 4

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        if self.retriever not in ("bm25", "lcs", "cosine"):
            raise ValueError(f"unknown retriever: {self.retriever!r}")
        if self.phrase_translator not in ("llm_few_shot", "external_mt"):
            raise ValueError(f"unknown phrase translator: {self.phrase_translator!r}")
        if self.phrase_translator == "external_mt" and not self.external_mt_endpoint:
            raise ValueError("external_mt requires external_mt_endpoint")


@dataclass
class PerPhrase:
    phrase: str
    demo_ids: list[int]
    demo_scores: list[float]
    raw_translation: str
    pair: PhrasePair

    def to_dict(self) -> dict:
        return {
            "phrase": self.phrase,
            "demo_ids": self.demo_ids,
            "demo_scores": self.demo_scores,
            "raw_translation": self.raw_translation,
            "translation": self.pair.translation,
            "kept": self.pair.kept,
            "drop_reason": self.pair.drop_reason.value,
        }


@dataclass
class TranslationRecord:
    sentence_id: int
    source: str
    mode: str
    phrase_set: Optional[PhraseSet] = None
    per_phrase: list[PerPhrase] = field(default_factory=list)
    merge_prompt_digest: Optional[str] = None
    raw_output: str = ""
    final: str = ""
    fallbacks: list[str] = field(default_factory=list)
    llm_calls: int = 0
    k_effective: Optional[int] = None
    error: Optional[str] = None
    wall_time_ms: float = 0.0

    def to_dict(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "source": self.source,
            "mode": self.mode,
            "phrase_set": None if self.phrase_set is None else {
                "original": self.phrase_set.original,
                "phrases": list(self.phrase_set.phrases),
                "strategy": self.phrase_set.strategy.kind,
            },
            "per_phrase": [p.to_dict() for p in self.per_phrase],
            "merge_prompt_digest": self.merge_prompt_digest,
            "raw_output": self.raw_output,
            "final": self.final,
            "fallbacks": self.fallbacks,
            "llm_calls": self.llm_calls,
            "k_effective": self.k_effective,
            "error": self.error,
            "wall_time_ms": self.wall_time_ms,
        }


@dataclass
class RunSummary:
    n: int
    n_fallbacks: int
    n_errors: int
    total_llm_calls: int
    wall_time_ms: float


class _CallCounter:
    def __init__(self):
        self.value = 0
        self._lock = threading.Lock()

    def bump(self):
        with self._lock:
            self.value += 1


class Pipeline:
    """One translation direction wired to a pool, a retriever and a backend."""

    def __init__(
        self,
        backend: BackendConfig,
        config: PipelineConfig,
        src: LanguageTag,
        tgt: LanguageTag,
        pool: Optional[ParallelCorpus] = None,
        trees: Optional[dict[int, DependencyTree]] = None,
        stopwords: Optional[frozenset[str]] = None,
        library: Optional[PromptLibrary] = None,
        script_profile: Optional[ScriptProfile] = None,
        pool_vectors=None,
        embed_fn: Optional[Callable[[str], "object"]] = None,
    ):
        self.backend = backend
        self.config = config
        self.src = src
        self.tgt = tgt
        self.pool = pool
        self.trees = trees
        self.stopwords = stopwords if stopwords is not None else load_default_stopwords()
        self.library = library
        self.script_profile = script_profile or script_profile_for(tgt)
        self._client = get_client(backend)
        self._gate = threading.BoundedSemaphore(config.parallelism)

        self._bm25 = None
        self._lcs = None
        self._pool_vectors = pool_vectors
        self._embed_fn = embed_fn
        if pool is not None and len(pool) > 0:
            if config.retriever == "bm25":
                self._bm25 = build_bm25_index(pool)
            elif config.retriever == "lcs":
                self._lcs = LcsRetriever(pool)
            elif config.retriever == "cosine":
                if pool_vectors is None or embed_fn is None:
                    raise ValueError("cosine retrieval needs pool_vectors and embed_fn")

    # -- plumbing ------------------------------------------------------------

    def _chat(self, prompt: str, max_tokens: int, counter: _CallCounter) -> str:
        with self._gate:
            response = self._client.complete(ChatRequest.user(prompt, max_tokens))
        counter.bump()
        return response

    def _retrieve(self, query: str, k: int) -> list[ScoredCandidate]:
        if self.pool is None or len(self.pool) == 0 or k == 0:
            return []
        if self.config.retriever == "bm25":
            return bm25_top_k(self._bm25, query, k)
        if self.config.retriever == "lcs":
            return self._lcs.top_k(query, k)
        eligible = [bool(p.target) for p in self.pool.pairs]
        return cosine_top_k(self._pool_vectors, self._embed_fn(query), k, eligible=eligible)

    def _demonstrations(self, candidates: list[ScoredCandidate]) -> list[Demonstration]:
        """Candidates arrive ranked; demonstration blocks keep that order
        (descending score)."""
        return [
            Demonstration(source=self.pool[c.pool_id].source, target=self.pool[c.pool_id].target)
            for c in candidates
        ]

    def _translate_external(self, phrase: str, counter: _CallCounter) -> str:
        with self._gate:
            resp = _post(
                self.config.external_mt_endpoint,
                json={"text": phrase, "src": self.src.code, "tgt": self.tgt.code},
                timeout=self.backend.timeout_s,
            )
            resp.raise_for_status()
        counter.bump()
        return resp.json()["translation"]

    # -- modes ---------------------------------------------------------------

    def translate_zero_shot(self, sentence: str, sentence_id: int = 0) -> TranslationRecord:
        if not sentence:
            raise ValueError("sentence must be non-empty")
        t0 = time.perf_counter()
        counter = _CallCounter()
        prompt = render_translate_prompt(self.tgt, self.src, sentence, [], library=self.library)
        raw = self._chat(prompt, self.config.translate_max_tokens, counter)
        return TranslationRecord(
            sentence_id=sentence_id,
            source=sentence,
            mode="zero_shot",
            raw_output=raw,
            final=truncate_repeating_bigrams(raw),
            llm_calls=counter.value,
            wall_time_ms=(time.perf_counter() - t0) * 1000,
        )

    def translate_few_shot(self, sentence: str, sentence_id: int = 0) -> TranslationRecord:
        if not sentence:
            raise ValueError("sentence must be non-empty")
        t0 = time.perf_counter()
        counter = _CallCounter()
        candidates = self._retrieve(sentence, self.config.k)
        fallbacks = []
        if not candidates:
            fallbacks.append(FLAG_ZERO_DEMONSTRATIONS)
        demos = self._demonstrations(candidates)
        prompt = render_translate_prompt(self.tgt, self.src, sentence, demos, library=self.library)
        raw = self._chat(prompt, self.config.translate_max_tokens, counter)
        return TranslationRecord(
            sentence_id=sentence_id,
            source=sentence,
            mode="few_shot",
            raw_output=raw,
            final=truncate_repeating_bigrams(raw),
            fallbacks=fallbacks,
            llm_calls=counter.value,
            k_effective=len(demos),
            wall_time_ms=(time.perf_counter() - t0) * 1000,
        )

    def translate_comptra(self, sentence: str, sentence_id: int = 0) -> TranslationRecord:
        if not sentence:
            raise ValueError("sentence must be non-empty")
        t0 = time.perf_counter()
        counter = _CallCounter()
        record = TranslationRecord(sentence_id=sentence_id, source=sentence, mode="comptra")

        ctx = DecomposeContext(
            backend=self.backend,
            trees=self.trees,
            stopwords=self.stopwords,
            sentence_id=sentence_id,
            max_new_tokens=self.config.merge_max_tokens,
            library=self.library,
            chat_fn=lambda prompt, budget: self._chat(prompt, budget, counter),
        )
        phrase_set, flags = decompose(sentence, self.config.strategy, ctx)
        record.phrase_set = phrase_set
        record.fallbacks.extend(flags)

        # phrase translations run concurrently; aggregation is in phrase order
        retrievals = [self._retrieve(p, self.config.k) for p in phrase_set.phrases]

        def translate_phrase(args) -> str:
            phrase, candidates = args
            if self.config.phrase_translator == "external_mt":
                return self._translate_external(phrase, counter)
            demos = self._demonstrations(candidates)
            prompt = render_translate_prompt(self.tgt, self.src, phrase, demos, library=self.library)
            return self._chat(prompt, self.config.translate_max_tokens, counter)

        n_workers = min(self.config.parallelism, len(phrase_set.phrases))
        if n_workers > 1:
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                raw_translations = list(pool.map(translate_phrase, zip(phrase_set.phrases, retrievals)))
        else:
            raw_translations = [translate_phrase(a) for a in zip(phrase_set.phrases, retrievals)]

        pairs = filter_phrase_pairs(
            [PhrasePair(phrase=p, translation=t) for p, t in zip(phrase_set.phrases, raw_translations)],
            self.tgt,
            self.script_profile,
        )
        record.per_phrase = [
            PerPhrase(
                phrase=phrase,
                demo_ids=[c.pool_id for c in candidates],
                demo_scores=[c.score for c in candidates],
                raw_translation=raw,
                pair=pair,
            )
            for phrase, candidates, raw, pair in zip(phrase_set.phrases, retrievals, raw_translations, pairs)
        ]

        kept = [p for p in pairs if p.kept]
        if kept:
            demos = [Demonstration(source=p.phrase, target=p.translation) for p in kept]
            prompt = render_translate_prompt(
                self.tgt, self.src, sentence, demos, kind=PromptKind.MERGE, library=self.library
            )
            record.merge_prompt_digest = hashlib.sha256(prompt.encode("utf-8")).hexdigest()
            raw = self._chat(prompt, self.config.merge_max_tokens, counter)
        else:
            record.fallbacks.append(FLAG_NO_KEPT_PAIRS)
            prompt = render_translate_prompt(self.tgt, self.src, sentence, [], library=self.library)
            raw = self._chat(prompt, self.config.translate_max_tokens, counter)

        record.raw_output = raw
        record.final = truncate_repeating_bigrams(raw)
        record.llm_calls = counter.value
        record.wall_time_ms = (time.perf_counter() - t0) * 1000
        return record

    def translate(self, sentence: str, mode: str, sentence_id: int = 0) -> TranslationRecord:
        if mode == "zero_shot":
            return self.translate_zero_shot(sentence, sentence_id)
        if mode == "few_shot":
            return self.translate_few_shot(sentence, sentence_id)
        if mode == "comptra":
            return self.translate_comptra(sentence, sentence_id)
        raise ValueError(f"unknown mode: {mode!r}")

    def run_corpus(self, eval_corpus: ParallelCorpus, mode: str, output_path) -> RunSummary:
        """Translate every sentence, streaming records to JSONL in corpus
        order. Per-sentence failures are recorded, never raised."""
        t0 = time.perf_counter()

        def run_one(pair) -> TranslationRecord:
            try:
                return self.translate(pair.source, mode, sentence_id=pair.id)
            except Exception as exc:  # noqa: BLE001 - failures belong in the record
                return TranslationRecord(
                    sentence_id=pair.id,
                    source=pair.source,
                    mode=mode,
                    error=f"{type(exc).__name__}: {exc}",
                )

        if self.config.parallelism > 1:
            with ThreadPoolExecutor(max_workers=self.config.parallelism) as pool:
                records = list(pool.map(run_one, eval_corpus.pairs))
        else:
            records = [run_one(p) for p in eval_corpus.pairs]

        n_fallbacks = 0
        n_errors = 0
        total_calls = 0
        with open(output_path, "w", encoding="utf-8") as f:
            for record in records:
                if record.fallbacks:
                    n_fallbacks += 1
                if record.error is not None:
                    n_errors += 1
                total_calls += record.llm_calls
                f.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
        return RunSummary(
            n=len(records),
            n_fallbacks=n_fallbacks,
            n_errors=n_errors,
            total_llm_calls=total_calls,
            wall_time_ms=(time.perf_counter() - t0) * 1000,
        )


# ---------------------------------------------------------------------------
# ensembling
# ---------------------------------------------------------------------------

class QualityScorer(Protocol):
    def score(self, source: str, translation: str) -> float: ...


class ConstantScorer:
    def __init__(self, value: float = 0.0):
        self.value = value

    def score(self, source: str, translation: str) -> float:
        return self.value


class LexicalOverlapScorer:
    """Token-overlap F1 between source and translation; a cheap test
    scorer, not a quality estimator."""

    def score(self, source: str, translation: str) -> float:
        s = set(tokenize_retrieval(source))
        t = set(tokenize_retrieval(translation))
        if not s or not t:
            return 0.0
        overlap = len(s & t)
        if overlap == 0:
            return 0.0
        precision = overlap / len(t)
        recall = overlap / len(s)
        return 2 * precision * recall / (precision + recall)


class HttpScorer:
    """POSTs {"source", "translation"} and reads {"score"}."""

    def __init__(self, endpoint_url: str, timeout_s: float = 120.0):
        self.endpoint_url = endpoint_url
        self.timeout_s = timeout_s

    def score(self, source: str, translation: str) -> float:
        resp = _post(
            self.endpoint_url,
            json={"source": source, "translation": translation},
            timeout=self.timeout_s,
        )
        resp.raise_for_status()
        return float(resp.json()["score"])


@dataclass(frozen=True)
class EnsembleChoice:
    chosen_name: str
    chosen_index: int
    scores: tuple[float, ...]


def ensemble_select(candidates, source: str, scorer: QualityScorer) -> EnsembleChoice:
    """Pick the candidate with the highest quality-estimation score against
    the source; ties go to the earliest candidate.

    Candidates are {"name", "translation"} mappings or objects with those
    attributes.
    """
    if len(candidates) < 2:
        raise ValueError("ensembling needs at least 2 candidates")

    def get(c, key):
        return c[key] if isinstance(c, dict) else getattr(c, key)

    scores = []
    for c in candidates:
        try:
            scores.append(float(scorer.score(source, get(c, "translation"))))
        except Exception as exc:
            raise ScorerFailure(f"scorer failed on {get(c, 'name')!r}: {exc}") from exc

    best = max(range(len(scores)), key=lambda i: (scores[i], -i))
    return EnsembleChoice(
        chosen_name=get(candidates[best], "name"),
        chosen_index=best,
        scores=tuple(scores),
    )
