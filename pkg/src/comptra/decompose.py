"""Sentence decomposition strategies.

The native strategy asks the LLM for simple propositions via the divide
prompt; the ablation strategies are Words (content words), Repeat (the
sentence k times), Paraphrase (at least four variants via a second divide
prompt) and Structure (dependency-tree splitting). Decomposition never
fails outright: when the LLM output is unusable, the whole sentence
becomes the single phrase and the trace is flagged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import Callable

from .corpus import DependencyTree
from .errors import MissingTree, NoPropositionsFound
from .llm import BackendConfig, ChatRequest, get_client
from .prompts import MAX_PHRASES, PromptLibrary, parse_propositions, render_divide_prompt
from .retrieval import tokenize_retrieval

FLAG_DECOMPOSITION_FALLBACK = "decomposition_fallback"
FLAG_PARAPHRASE_BELOW_MINIMUM = "paraphrase_below_minimum"

DEFAULT_REPEAT_COUNT = 4
DEFAULT_MAX_SEGMENT_WORDS = 4
MIN_PARAPHRASES = 4

STRATEGY_KINDS = ("llm_propositions", "words", "repeat", "paraphrase", "structure")


def load_default_stopwords() -> frozenset[str]:
    text = resources.files("comptra.assets").joinpath("stopwords_en.txt").read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def load_stopwords(path) -> frozenset[str]:
    """One lowercase token per line."""
    with open(path, encoding="utf-8") as f:
        return frozenset(line.strip() for line in f if line.strip())


@dataclass(frozen=True)
class DecompositionStrategy:
    kind: str = "llm_propositions"
    repeat_count: int = DEFAULT_REPEAT_COUNT

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown decomposition strategy: {self.kind!r}")
        if self.repeat_count < 1:
            raise ValueError("repeat_count must be >= 1")


@dataclass(frozen=True)
class PhraseSet:
    original: str
    phrases: tuple[str, ...]
    strategy: DecompositionStrategy

    def __post_init__(self):
        if not self.phrases or any(not p for p in self.phrases):
            raise ValueError("phrases must be a non-empty list of non-empty strings")


@dataclass
class DecomposeContext:
    """Everything a strategy might need; only llm/paraphrase use the
    backend, only structure uses trees. When ``chat_fn`` is set it replaces
    the direct backend call (the pipeline uses this to bound concurrency
    and count calls)."""

    backend: BackendConfig | None = None
    trees: dict[int, DependencyTree] | None = None
    stopwords: frozenset[str] = field(default_factory=load_default_stopwords)
    sentence_id: int | None = None
    max_new_tokens: int = 2000
    library: PromptLibrary | None = None
    phrase_cap: int = MAX_PHRASES
    chat_fn: Callable[[str, int], str] | None = None


def content_words(sentence: str, stopwords: frozenset[str]) -> list[str]:
    """Tokens minus stop words, first occurrences only; falls back to all
    (deduplicated) tokens when everything is a stop word."""
    tokens = tokenize_retrieval(sentence)
    out: list[str] = []
    seen: set[str] = set()
    for tok in tokens:
        if tok in stopwords or tok in seen:
            continue
        seen.add(tok)
        out.append(tok)
    if out:
        return out
    return list(dict.fromkeys(tokens))


@dataclass(frozen=True)
class Segment:
    """A contiguous token span emitted by structure_split."""

    start: int
    end: int  # exclusive
    unsplittable: bool

    def text(self, forms: list[str]) -> str:
        return " ".join(forms[self.start:self.end])


def _local_root(heads: list[int], start: int, end: int) -> int | None:
    """Leftmost token in [start, end) whose head lies outside the span.

    Heads are 1-based (0 = sentence root), so "inside" means
    start + 1 <= head <= end. Any true tree has such a token in every
    span; None only happens for malformed head cycles.
    """
    for i in range(start, end):
        head = heads[i]
        if head < start + 1 or head > end:
            return i
    return None


def structure_split_segments(tree: DependencyTree, max_words: int = DEFAULT_MAX_SEGMENT_WORDS) -> list[Segment]:
    """Split the token sequence along the dependency structure.

    Each span whose token count exceeds ``max_words`` is cut right after
    its local root: the left part keeps the root, the right part takes the
    rest. The longer part is pushed first (the shorter pops first). A span
    whose local root sits at its right boundary cannot be cut and is
    emitted whole, flagged unsplittable. Segments come back in left-to-right
    order and concatenate to the original token sequence.
    """
    heads = [t.head for t in tree.tokens]
    leaves: list[Segment] = []
    stack: list[tuple[int, int]] = [(0, len(heads))]
    while stack:
        start, end = stack.pop()
        length = end - start
        if length <= max_words:
            leaves.append(Segment(start, end, unsplittable=False))
            continue
        root = _local_root(heads, start, end)
        if root is None or root == end - 1:  # head cycle, or right part empty
            leaves.append(Segment(start, end, unsplittable=True))
            continue
        left = (start, root + 1)
        right = (root + 1, end)
        longer, shorter = (left, right) if (left[1] - left[0]) >= (right[1] - right[0]) else (right, left)
        stack.append(longer)
        stack.append(shorter)
    leaves.sort(key=lambda s: s.start)
    return leaves


def structure_split(tree: DependencyTree, max_words: int = DEFAULT_MAX_SEGMENT_WORDS) -> list[str]:
    forms = tree.forms()
    return [seg.text(forms) for seg in structure_split_segments(tree, max_words)]


def _llm_phrases(sentence: str, mode: str, ctx: DecomposeContext) -> list[str]:
    prompt = render_divide_prompt(sentence, mode=mode, library=ctx.library)
    if ctx.chat_fn is not None:
        response = ctx.chat_fn(prompt, ctx.max_new_tokens)
    elif ctx.backend is not None:
        response = get_client(ctx.backend).complete(ChatRequest.user(prompt, ctx.max_new_tokens))
    else:
        raise ValueError("this strategy needs an LLM backend")
    return parse_propositions(response, cap=ctx.phrase_cap)


def paraphrase_decompose(
    sentence: str,
    ctx: DecomposeContext,
    strategy: DecompositionStrategy | None = None,
) -> tuple[PhraseSet, list[str]]:
    strategy = strategy or DecompositionStrategy(kind="paraphrase")
    flags: list[str] = []
    try:
        phrases = _llm_phrases(sentence, "paraphrase", ctx)
    except NoPropositionsFound:
        return PhraseSet(sentence, (sentence,), strategy), [FLAG_DECOMPOSITION_FALLBACK]
    if len(phrases) < MIN_PARAPHRASES:
        flags.append(FLAG_PARAPHRASE_BELOW_MINIMUM)
    return PhraseSet(sentence, tuple(phrases), strategy), flags


def decompose(
    sentence: str,
    strategy: DecompositionStrategy,
    ctx: DecomposeContext | None = None,
) -> tuple[PhraseSet, list[str]]:
    """Produce the phrase set for one sentence.

    Returns the phrases plus trace flags. LLM-path failures fall back to
    the whole sentence as the single phrase; the structure strategy raises
    MissingTree when no tree is bound to the sentence.
    """
    if not sentence:
        raise ValueError("sentence must be non-empty")
    ctx = ctx or DecomposeContext()

    if strategy.kind == "repeat":
        return PhraseSet(sentence, (sentence,) * strategy.repeat_count, strategy), []

    if strategy.kind == "words":
        words = content_words(sentence, ctx.stopwords)
        if not words:  # punctuation-only sentence
            return PhraseSet(sentence, (sentence,), strategy), [FLAG_DECOMPOSITION_FALLBACK]
        return PhraseSet(sentence, tuple(words), strategy), []

    if strategy.kind == "structure":
        tree = (ctx.trees or {}).get(ctx.sentence_id)
        if tree is None:
            raise MissingTree(ctx.sentence_id)
        return PhraseSet(sentence, tuple(structure_split(tree)), strategy), []

    if strategy.kind == "paraphrase":
        return paraphrase_decompose(sentence, ctx, strategy)

    # native LLM propositions
    try:
        phrases = _llm_phrases(sentence, "propositions", ctx)
    except NoPropositionsFound:
        return PhraseSet(sentence, (sentence,), strategy), [FLAG_DECOMPOSITION_FALLBACK]
    return PhraseSet(sentence, tuple(phrases), strategy), []
