"""Parallel corpora, language tags, and dependency trees.

A corpus pairs a selection pool or evaluation set's source sentences with
their translations. Sentence ids are positional (line order), so pool/eval
splits taken by line number are reproducible.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import (
    LineCountMismatch,
    MalformedConllu,
    MalformedRecord,
    MissingFile,
    MultipleRoots,
    NoRoot,
    UnknownLanguage,
)


class Script(enum.Enum):
    LATIN = "Latin"
    ETHIOPIC = "Ethiopic"
    MYANMAR = "Myanmar"
    KHMER = "Khmer"
    LAO = "Lao"
    SINHALA = "Sinhala"
    ARABIC = "Arabic"
    CYRILLIC = "Cyrillic"
    HAN = "Han"
    OTHER = "Other"


# Script subtag (suffix of a FLORES-style code) -> Script.
_SUFFIX_SCRIPTS = {
    "Latn": Script.LATIN,
    "Ethi": Script.ETHIOPIC,
    "Mymr": Script.MYANMAR,
    "Khmr": Script.KHMER,
    "Laoo": Script.LAO,
    "Sinh": Script.SINHALA,
    "Arab": Script.ARABIC,
    "Cyrl": Script.CYRILLIC,
    "Hans": Script.HAN,
    "Hant": Script.HAN,
}


def script_from_code(code: str) -> Script:
    """Derive the writing script from a code's ``_Xxxx`` suffix."""
    if "_" in code:
        suffix = code.rsplit("_", 1)[1]
        return _SUFFIX_SCRIPTS.get(suffix, Script.OTHER)
    return Script.OTHER


def _load_language_table() -> dict[str, str]:
    table = {}
    text = resources.files("comptra.assets").joinpath("languages.tsv").read_text("utf-8")
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        code, name = line.split("\t")
        table[code] = name
    return table


_LANGUAGE_NAMES = _load_language_table()


@dataclass(frozen=True)
class LanguageTag:
    """A translation direction endpoint: code, human name, writing script."""

    code: str
    display_name: str
    script: Script = Script.OTHER

    def __post_init__(self):
        if not self.code:
            raise ValueError("language code must be non-empty")

    @classmethod
    def from_code(cls, code: str) -> "LanguageTag":
        """Look the code up in the shipped language table."""
        name = _LANGUAGE_NAMES.get(code)
        if name is None:
            raise UnknownLanguage(code)
        return cls(code=code, display_name=name, script=script_from_code(code))


def known_language_codes() -> list[str]:
    return sorted(_LANGUAGE_NAMES)


@dataclass(frozen=True)
class SentencePair:
    id: int
    source: str
    target: str


@dataclass(frozen=True)
class ParallelCorpus:
    pairs: tuple[SentencePair, ...]
    src: LanguageTag
    tgt: LanguageTag

    def __len__(self):
        return len(self.pairs)

    def __getitem__(self, i) -> SentencePair:
        return self.pairs[i]

    def sources(self) -> list[str]:
        return [p.source for p in self.pairs]

    def targets(self) -> list[str]:
        return [p.target for p in self.pairs]


@dataclass(frozen=True)
class ValidationReport:
    total: int
    empty_targets: int
    duplicate_sources: int


def read_text_lines(path) -> list[str]:
    """Newline-split file lines. Only "\\n" (or "\\r\\n") ends a line:
    sentences may legitimately contain U+2028 and friends, which
    str.splitlines would split on."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(path)
    text = path.read_text(encoding="utf-8")
    if text.endswith("\n"):
        text = text[:-1]
    if not text:
        return []
    return [line[:-1] if line.endswith("\r") else line for line in text.split("\n")]


def _make_pairs(rows: list[tuple[str, str]], offsets: list[int]) -> tuple[SentencePair, ...]:
    pairs = []
    for i, (src, tgt) in enumerate(rows):
        src = src.strip()
        tgt = tgt.strip()
        if not src:
            raise MalformedRecord(offsets[i], "empty source sentence")
        pairs.append(SentencePair(id=i, source=src, target=tgt))
    return tuple(pairs)


def load_parallel_corpus(
    source_path,
    target_path=None,
    format: str = "tsv",
    src: LanguageTag | None = None,
    tgt: LanguageTag | None = None,
) -> ParallelCorpus:
    """Load a parallel corpus from disk.

    Formats:
      aligned_text  two files, one sentence per line, equal line counts
      tsv           one file, ``source<TAB>target`` per line
      jsonl         one file, one JSON object per line with string
                    "source" and "target" fields

    Sentences are whitespace-trimmed and ids assigned by line order.
    Empty source lines are rejected; empty targets are kept (they show up
    in validate_corpus and are ineligible as retrieval demonstrations).
    """
    src = src or LanguageTag.from_code("eng_Latn")
    tgt = tgt or LanguageTag.from_code("eng_Latn")

    if format == "aligned_text":
        if target_path is None:
            raise MissingFile("<target file required for aligned_text>")
        src_lines = read_text_lines(source_path)
        tgt_lines = read_text_lines(target_path)
        if len(src_lines) != len(tgt_lines):
            raise LineCountMismatch(len(src_lines), len(tgt_lines))
        rows = list(zip(src_lines, tgt_lines))
        offsets = list(range(1, len(rows) + 1))
    elif format == "tsv":
        rows, offsets = [], []
        for no, line in enumerate(read_text_lines(source_path), start=1):
            if "\t" not in line:
                raise MalformedRecord(no, "expected source<TAB>target")
            s, t = line.split("\t", 1)
            rows.append((s, t))
            offsets.append(no)
    elif format == "jsonl":
        rows, offsets = [], []
        for no, line in enumerate(read_text_lines(source_path), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(no, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict) or not isinstance(obj.get("source"), str) \
                    or not isinstance(obj.get("target"), str):
                raise MalformedRecord(no, 'needs string "source" and "target" fields')
            rows.append((obj["source"], obj["target"]))
            offsets.append(no)
    else:
        raise ValueError(f"unknown corpus format: {format!r}")

    return ParallelCorpus(pairs=_make_pairs(rows, offsets), src=src, tgt=tgt)


def write_corpus_tsv(corpus: ParallelCorpus, path) -> None:
    """Write ``source<TAB>target`` lines; inverse of tsv loading for
    sentences free of tabs and newlines."""
    with open(path, "w", encoding="utf-8") as f:
        for p in corpus.pairs:
            f.write(f"{p.source}\t{p.target}\n")


def validate_corpus(corpus: ParallelCorpus) -> ValidationReport:
    """Summarize corpus health; informational only, never mutates."""
    seen = set()
    duplicates = 0
    empty_targets = 0
    for p in corpus.pairs:
        if not p.target:
            empty_targets += 1
        if p.source in seen:
            duplicates += 1
        seen.add(p.source)
    return ValidationReport(
        total=len(corpus.pairs),
        empty_targets=empty_targets,
        duplicate_sources=duplicates,
    )


@dataclass(frozen=True)
class TreeToken:
    form: str
    head: int  # 0 = sentence root, otherwise 1-based index of the head token
    deprel: str


@dataclass(frozen=True)
class DependencyTree:
    tokens: tuple[TreeToken, ...]

    def __post_init__(self):
        roots = [i for i, t in enumerate(self.tokens) if t.head == 0]
        if len(roots) > 1:
            raise ValueError("tree has multiple roots")
        if not roots:
            raise ValueError("tree has no root")
        n = len(self.tokens)
        for i, t in enumerate(self.tokens):
            if not 0 <= t.head <= n:
                raise ValueError(f"token {i + 1} head {t.head} out of range")
            if t.head == i + 1:
                raise ValueError(f"token {i + 1} is its own head")

    def __len__(self):
        return len(self.tokens)

    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]


def load_dependency_trees(path) -> dict[int, DependencyTree]:
    """Parse a CoNLL-U-subset file into trees keyed by sentence id.

    Blocks are blank-line separated. Only columns 1 (ID), 2 (FORM),
    7 (HEAD) and 8 (DEPREL) are consumed; multiword range ids ("i-j") are
    skipped; comment lines start with "#". A ``# sent_id = N`` comment
    binds the block to corpus id N, otherwise blocks bind by file order.
    """
    lines = read_text_lines(path)
    trees: dict[int, DependencyTree] = {}

    block: list[tuple[int, str]] = []  # (line_no, raw line)
    block_no = 0

    def flush(block_lines):
        nonlocal block_no
        if not block_lines:
            return
        block_no += 1
        sent_id = block_no - 1  # bind by order (0-based) unless overridden
        rows = []
        for line_no, raw in block_lines:
            if raw.startswith("#"):
                body = raw[1:].strip()
                if "=" in body:
                    key, value = body.split("=", 1)
                    if key.strip() == "sent_id":
                        try:
                            sent_id = int(value.strip())
                        except ValueError:
                            raise MalformedConllu(line_no, "sent_id is not an integer")
                continue
            cols = raw.split("\t")
            if len(cols) < 8:
                raise MalformedConllu(line_no, f"expected >= 8 columns, got {len(cols)}")
            tok_id = cols[0]
            if "-" in tok_id:
                continue  # multiword token range
            try:
                int(tok_id)
            except ValueError:
                raise MalformedConllu(line_no, f"non-integer token id {tok_id!r}")
            try:
                head = int(cols[6])
            except ValueError:
                raise MalformedConllu(line_no, f"non-integer head {cols[6]!r}")
            rows.append((line_no, cols[1], head, cols[7]))

        if not rows:
            return
        n = len(rows)
        roots = [r for r in rows if r[2] == 0]
        if len(roots) > 1:
            raise MultipleRoots(block_no)
        if not roots:
            raise NoRoot(block_no)
        for i, (line_no, _, head, _) in enumerate(rows):
            if head < 0 or head > n:
                raise MalformedConllu(line_no, f"head {head} out of range 0..{n}")
            if head == i + 1:
                raise MalformedConllu(line_no, "token is its own head")
        trees[sent_id] = DependencyTree(
            tokens=tuple(TreeToken(form, head, deprel) for _, form, head, deprel in rows)
        )

    for no, raw in enumerate(lines, start=1):
        if raw.strip() == "":
            flush(block)
            block = []
        else:
            block.append((no, raw))
    flush(block)
    return trees
