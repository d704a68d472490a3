"""Command-line interface.

Subcommands: translate (corpus runs), evaluate (BLEU/chrF++), compare
(paired bootstrap), decompose and retrieve (single-input debugging).
Flag values override a JSON config file, which overrides built-in
defaults; every trace file gets a manifest sibling recording the merged
configuration, so any run can be reproduced from manifest + cassette.

Exit codes: 0 success, 1 fatal configuration error, 2 when at least one
sentence recorded an error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .cleaning import load_script_profiles, script_profile_for
from .corpus import LanguageTag, ParallelCorpus, load_dependency_trees, load_parallel_corpus, read_text_lines
from .decompose import (
    DecomposeContext,
    DecompositionStrategy,
    decompose,
    load_stopwords,
)
from .errors import ComptraError
from .llm import BackendConfig
from .metrics import BleuConfig, ChrfConfig, MetricConfig, bleu_corpus, chrfpp_corpus, paired_bootstrap
from .pipeline import MODES, Pipeline, PipelineConfig
from .prompts import PromptLibrary
from .retrieval import (
    LcsRetriever,
    bm25_top_k,
    build_bm25_index,
    cosine_top_k,
    fetch_embeddings,
    load_embedding_matrix,
)

_MODE_ALIASES = {"zero": "zero_shot", "few": "few_shot", "comptra": "comptra"}
_STRATEGY_ALIASES = {
    "llm": "llm_propositions",
    "words": "words",
    "repeat": "repeat",
    "paraphrase": "paraphrase",
    "structure": "structure",
}

_TRANSLATE_DEFAULTS = {
    "mode": "comptra",
    "format": "tsv",
    "retriever": "bm25",
    "strategy": "llm",
    "repeat_count": 4,
    "k": 5,
    "translate_max_tokens": 500,
    "merge_max_tokens": 2000,
    "phrase_translator": "llm_few_shot",
    "external_mt_endpoint": None,
    "parallelism": 4,
    "backend": "mock",
    "endpoint": None,
    "model": None,
    "cassette": None,
    "auth_env": "LLM_API_KEY",
    "timeout": 120.0,
    "max_retries": 3,
    "max_concurrency": 8,
    "seed": 0,
    "trees": None,
    "stopwords": None,
    "prompt_dir": None,
    "script_profiles": None,
    "pool_embeddings": None,
    "embedding_endpoint": None,
}


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _language(code: str, flag: str) -> LanguageTag:
    try:
        return LanguageTag.from_code(code)
    except ComptraError:
        raise SystemExit(_fail(f"{flag}: unknown language code {code!r}"))


def _read_trace_finals(path) -> list[str]:
    finals = []
    for line in read_text_lines(path):
        if line.strip():
            finals.append(json.loads(line)["final"])
    return finals


def _merge_config(defaults: dict, args: argparse.Namespace) -> dict:
    merged = dict(defaults)
    if getattr(args, "config", None):
        loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if "config" in loaded and isinstance(loaded["config"], dict):
            loaded = loaded["config"]  # accept a manifest file as well
        unknown = set(loaded) - set(defaults) - {"pool", "eval", "src", "tgt", "pool_tgt", "eval_tgt", "out"}
        if unknown:
            raise SystemExit(_fail(f"unknown config keys: {sorted(unknown)}"))
        merged.update({k: v for k, v in loaded.items() if v is not None})
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _build_backend(cfg: dict) -> BackendConfig:
    kind = cfg["backend"]
    if kind == "http":
        if not cfg["endpoint"] or not cfg["model"]:
            raise SystemExit(_fail("--backend http requires --endpoint and --model"))
    if kind == "cassette" and not cfg["cassette"]:
        raise SystemExit(_fail("--backend cassette requires --cassette"))
    return BackendConfig(
        kind=kind,
        endpoint_url=cfg["endpoint"],
        model_name=cfg["model"],
        auth_env_var=cfg["auth_env"],
        timeout_s=cfg["timeout"],
        max_retries=cfg["max_retries"],
        max_concurrency=cfg["max_concurrency"],
        cassette_path=cfg["cassette"],
    )


def _load_corpus_args(cfg, path, tgt_path, src, tgt):
    return load_parallel_corpus(path, tgt_path, format=cfg["format"], src=src, tgt=tgt)


def cmd_translate(args) -> int:
    cfg = _merge_config(_TRANSLATE_DEFAULTS, args)
    src = _language(args.src, "--src")
    tgt = _language(args.tgt, "--tgt")

    mode = _MODE_ALIASES.get(cfg["mode"], cfg["mode"])
    if mode not in MODES:
        return _fail(f"--mode: unknown mode {cfg['mode']!r}")
    strategy_kind = _STRATEGY_ALIASES.get(cfg["strategy"], cfg["strategy"])

    try:
        strategy = DecompositionStrategy(kind=strategy_kind, repeat_count=cfg["repeat_count"])
        pipeline_config = PipelineConfig(
            strategy=strategy,
            retriever=cfg["retriever"],
            k=cfg["k"],
            translate_max_tokens=cfg["translate_max_tokens"],
            merge_max_tokens=cfg["merge_max_tokens"],
            phrase_translator=cfg["phrase_translator"],
            external_mt_endpoint=cfg["external_mt_endpoint"],
            parallelism=cfg["parallelism"],
        )
        backend = _build_backend(cfg)

        pool = _load_corpus_args(cfg, args.pool, args.pool_tgt, src, tgt) if args.pool else None
        eval_corpus = _load_corpus_args(cfg, args.eval, args.eval_tgt, src, tgt)

        trees = load_dependency_trees(cfg["trees"]) if cfg["trees"] else None
        if strategy_kind == "structure" and trees is None:
            return _fail("--strategy structure requires --trees")
        stopwords = load_stopwords(cfg["stopwords"]) if cfg["stopwords"] else None
        library = PromptLibrary(cfg["prompt_dir"]) if cfg["prompt_dir"] else None
        profile = None
        if cfg["script_profiles"]:
            profile = script_profile_for(tgt, load_script_profiles(cfg["script_profiles"]))

        pool_vectors = None
        embed_fn = None
        if cfg["retriever"] == "cosine":
            if not cfg["pool_embeddings"] or not cfg["embedding_endpoint"]:
                return _fail("--retriever cosine requires --pool-embeddings and --embedding-endpoint")
            pool_vectors = load_embedding_matrix(cfg["pool_embeddings"])
            embed_fn = lambda text: fetch_embeddings(cfg["embedding_endpoint"], [text])[0]

        pipeline = Pipeline(
            backend=backend,
            config=pipeline_config,
            src=src,
            tgt=tgt,
            pool=pool,
            trees=trees,
            stopwords=stopwords,
            library=library,
            script_profile=profile,
            pool_vectors=pool_vectors,
            embed_fn=embed_fn,
        )
    except (ComptraError, ValueError, OSError) as exc:
        return _fail(str(exc))

    out_path = Path(args.out)
    summary = pipeline.run_corpus(eval_corpus, mode, out_path)

    manifest = {
        "tool_version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "mode": mode,
        "src": src.code,
        "tgt": tgt.code,
        "pool": args.pool,
        "pool_tgt": args.pool_tgt,
        "eval": args.eval,
        "eval_tgt": args.eval_tgt,
        "out": str(out_path),
        "config": cfg,
    }
    manifest_path = out_path.with_name(out_path.name + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")

    print(
        json.dumps(
            {
                "n": summary.n,
                "n_fallbacks": summary.n_fallbacks,
                "n_errors": summary.n_errors,
                "total_llm_calls": summary.total_llm_calls,
                "wall_time_ms": round(summary.wall_time_ms, 3),
                "trace": str(out_path),
                "manifest": str(manifest_path),
            }
        )
    )
    return 2 if summary.n_errors else 0


def _metric_config(args) -> MetricConfig:
    return MetricConfig(
        metric=args.metric,
        bleu=BleuConfig(tokenizer=getattr(args, "bleu_tokenizer", "whitespace_punct")),
        chrfpp=ChrfConfig(),
    )


def _load_eval_pair(args) -> tuple[list[str], list[str]]:
    hyps = _read_trace_finals(args.trace) if args.trace else read_text_lines(args.hyp)
    refs = read_text_lines(args.ref)
    return hyps, refs


def cmd_evaluate(args) -> int:
    try:
        hyps, refs = _load_eval_pair(args)
        cfg = _metric_config(args)
        if args.metric == "bleu":
            score = bleu_corpus(hyps, refs, cfg.bleu)
        else:
            score = chrfpp_corpus(hyps, refs, cfg.chrfpp)
    except (ComptraError, OSError, json.JSONDecodeError, KeyError) as exc:
        return _fail(str(exc))
    print(json.dumps({"metric": args.metric, "score": round(score, 4), "n": len(hyps)}))
    return 0


def cmd_compare(args) -> int:
    try:
        hyps_a = read_text_lines(args.hyp_a)
        hyps_b = read_text_lines(args.hyp_b)
        refs = read_text_lines(args.ref)
        result = paired_bootstrap(
            hyps_a,
            hyps_b,
            refs,
            metric_cfg=_metric_config(args),
            n_samples=args.n_samples,
            sample_size=args.sample_size,
            alpha=args.alpha,
            seed=args.seed,
        )
    except (ComptraError, OSError) as exc:
        return _fail(str(exc))
    print(json.dumps({"metric": args.metric, **asdict(result)}))
    return 0


def cmd_decompose(args) -> int:
    strategy_kind = _STRATEGY_ALIASES.get(args.strategy, args.strategy)
    try:
        strategy = DecompositionStrategy(kind=strategy_kind, repeat_count=args.repeat_count)
        trees = load_dependency_trees(args.trees) if args.trees else None
        if strategy_kind == "structure" and trees is None:
            return _fail("--strategy structure requires --trees")
        backend = None
        if strategy_kind in ("llm_propositions", "paraphrase"):
            backend = _build_backend(
                {**_TRANSLATE_DEFAULTS, "backend": args.backend, "endpoint": args.endpoint,
                 "model": args.model, "cassette": args.cassette}
            )
        ctx = DecomposeContext(backend=backend, trees=trees, sentence_id=args.tree_id)
        phrase_set, flags = decompose(args.sentence, strategy, ctx)
    except (ComptraError, ValueError, OSError) as exc:
        return _fail(str(exc))
    print(
        json.dumps(
            {
                "original": phrase_set.original,
                "strategy": phrase_set.strategy.kind,
                "phrases": list(phrase_set.phrases),
                "flags": flags,
            },
            ensure_ascii=False,
        )
    )
    return 0


def cmd_retrieve(args) -> int:
    src = _language(args.src, "--src")
    tgt = _language(args.tgt, "--tgt")
    try:
        pool = load_parallel_corpus(args.pool, args.pool_tgt, format=args.format, src=src, tgt=tgt)
        if args.retriever == "bm25":
            candidates = bm25_top_k(build_bm25_index(pool), args.query, args.k)
        elif args.retriever == "lcs":
            candidates = LcsRetriever(pool).top_k(args.query, args.k)
        else:
            if not args.pool_embeddings or not args.embedding_endpoint:
                return _fail("--retriever cosine requires --pool-embeddings and --embedding-endpoint")
            vectors = load_embedding_matrix(args.pool_embeddings)
            query_vec = fetch_embeddings(args.embedding_endpoint, [args.query])[0]
            eligible = [bool(p.target) for p in pool.pairs]
            candidates = cosine_top_k(vectors, query_vec, args.k, eligible=eligible)
    except (ComptraError, ValueError, OSError) as exc:
        return _fail(str(exc))
    print(json.dumps([{"pool_id": c.pool_id, "score": c.score} for c in candidates]))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="comptra", description=__doc__)
    parser.add_argument("--version", action="version", version=f"comptra {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("translate", help="run a translation mode over an evaluation corpus")
    p.add_argument("--mode", choices=sorted(set(_MODE_ALIASES) | set(MODES)))
    p.add_argument("--pool", help="selection pool file (source, or tsv/jsonl)")
    p.add_argument("--pool-tgt", dest="pool_tgt", help="pool target file (aligned_text)")
    p.add_argument("--eval", required=True, help="evaluation corpus file")
    p.add_argument("--eval-tgt", dest="eval_tgt", help="evaluation target file (aligned_text)")
    p.add_argument("--format", choices=["aligned_text", "tsv", "jsonl"])
    p.add_argument("--src", required=True, help="source language code, e.g. eng_Latn")
    p.add_argument("--tgt", required=True, help="target language code, e.g. amh_Ethi")
    p.add_argument("--retriever", choices=["bm25", "lcs", "cosine"])
    p.add_argument("--strategy", choices=sorted(_STRATEGY_ALIASES))
    p.add_argument("--repeat-count", dest="repeat_count", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--translate-max-tokens", dest="translate_max_tokens", type=int)
    p.add_argument("--merge-max-tokens", dest="merge_max_tokens", type=int)
    p.add_argument("--phrase-translator", dest="phrase_translator", choices=["llm_few_shot", "external_mt"])
    p.add_argument("--external-mt-endpoint", dest="external_mt_endpoint")
    p.add_argument("--parallelism", type=int)
    p.add_argument("--backend", choices=["http", "mock", "cassette"])
    p.add_argument("--endpoint", help="base URL of the chat-completions service")
    p.add_argument("--model", help="model name sent to the service")
    p.add_argument("--cassette", help="cassette file for record/replay")
    p.add_argument("--auth-env", dest="auth_env", help="env var holding the bearer token")
    p.add_argument("--timeout", type=float)
    p.add_argument("--max-retries", dest="max_retries", type=int)
    p.add_argument("--max-concurrency", dest="max_concurrency", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--trees", help="dependency trees for the structure strategy")
    p.add_argument("--stopwords", help="stop-word list override")
    p.add_argument("--prompt-dir", dest="prompt_dir", help="prompt template overrides")
    p.add_argument("--script-profiles", dest="script_profiles", help="script profile table override")
    p.add_argument("--pool-embeddings", dest="pool_embeddings", help="pool embedding matrix file")
    p.add_argument("--embedding-endpoint", dest="embedding_endpoint", help="embedding HTTP service")
    p.add_argument("--config", help="JSON config file (flags take precedence)")
    p.add_argument("--out", required=True, help="trace output path (JSONL)")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("evaluate", help="score hypotheses against references")
    p.add_argument("--hyp", help="hypothesis file, one sentence per line")
    p.add_argument("--trace", help="trace JSONL; uses each record's final field")
    p.add_argument("--ref", required=True, help="reference file")
    p.add_argument("--metric", choices=["bleu", "chrfpp"], default="chrfpp")
    p.add_argument("--bleu-tokenizer", dest="bleu_tokenizer",
                   choices=["whitespace_punct", "external"], default="whitespace_punct")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="paired bootstrap comparison of two systems")
    p.add_argument("--hyp-a", dest="hyp_a", required=True)
    p.add_argument("--hyp-b", dest="hyp_b", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--metric", choices=["bleu", "chrfpp"], default="chrfpp")
    p.add_argument("--bleu-tokenizer", dest="bleu_tokenizer",
                   choices=["whitespace_punct", "external"], default="whitespace_punct")
    p.add_argument("--n-samples", dest="n_samples", type=int, default=300)
    p.add_argument("--sample-size", dest="sample_size", type=int, default=500)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("decompose", help="decompose one sentence")
    p.add_argument("--sentence", required=True)
    p.add_argument("--strategy", choices=sorted(_STRATEGY_ALIASES), default="repeat")
    p.add_argument("--repeat-count", dest="repeat_count", type=int, default=4)
    p.add_argument("--trees")
    p.add_argument("--tree-id", dest="tree_id", type=int, default=0)
    p.add_argument("--backend", choices=["http", "mock", "cassette"], default="mock")
    p.add_argument("--endpoint")
    p.add_argument("--model")
    p.add_argument("--cassette")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("retrieve", help="rank pool sentences for one query")
    p.add_argument("--pool", required=True)
    p.add_argument("--pool-tgt", dest="pool_tgt")
    p.add_argument("--format", choices=["aligned_text", "tsv", "jsonl"], default="tsv")
    p.add_argument("--src", default="eng_Latn")
    p.add_argument("--tgt", default="eng_Latn")
    p.add_argument("--query", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--retriever", choices=["bm25", "lcs", "cosine"], default="bm25")
    p.add_argument("--pool-embeddings", dest="pool_embeddings")
    p.add_argument("--embedding-endpoint", dest="embedding_endpoint")
    p.set_defaults(func=cmd_retrieve)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; exit code 2 is reserved for
        # runs that recorded sentence-level errors, so remap to 1
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1


if __name__ == "__main__":
    sys.exit(main())
