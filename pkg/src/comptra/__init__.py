"""comptra: compositional translation for low-resource MT.

Decompose a sentence into simple phrases, translate each phrase few-shot
with demonstrations retrieved from a selection pool, then merge the
phrase-translation pairs into the final translation. Ships the baselines
(zero-shot, few-shot with BM25/LCS/cosine retrieval), decomposition
ablations, n-gram metrics, and paired-bootstrap comparison.
"""

__version__ = "0.1.0"

from .cleaning import (
    DropReason,
    PhrasePair,
    ScriptProfile,
    filter_phrase_pairs,
    identify_script,
    script_profile_for,
    truncate_repeating_bigrams,
)
from .corpus import (
    DependencyTree,
    LanguageTag,
    ParallelCorpus,
    Script,
    SentencePair,
    load_dependency_trees,
    load_parallel_corpus,
    validate_corpus,
    write_corpus_tsv,
)
from .decompose import (
    DecomposeContext,
    DecompositionStrategy,
    PhraseSet,
    content_words,
    decompose,
    structure_split,
)
from .llm import BackendConfig, ChatRequest, complete_chat, record_cassette, request_digest
from .metrics import (
    BleuConfig,
    ChrfConfig,
    MetricConfig,
    SignificanceResult,
    bleu_corpus,
    chrfpp_corpus,
    paired_bootstrap,
)
from .pipeline import (
    EnsembleChoice,
    Pipeline,
    PipelineConfig,
    TranslationRecord,
    ensemble_select,
)
from .prompts import (
    Demonstration,
    PromptKind,
    PromptLibrary,
    parse_propositions,
    render_divide_prompt,
    render_translate_prompt,
)
from .retrieval import (
    RetrievalIndex,
    ScoredCandidate,
    bm25_top_k,
    build_bm25_index,
    cosine_top_k,
    lcs_length,
    lcs_top_k,
    tokenize_retrieval,
)
