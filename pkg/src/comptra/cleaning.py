"""Post-processing of raw LLM output.

Two jobs: cut off degenerate repetition at the end of generations
(overgeneration shows up as a bigram repeated many times), and drop phrase
translations written in the wrong script for the target language.
"""

from __future__ import annotations

import enum
import unicodedata
from dataclasses import dataclass, replace
from functools import lru_cache
from importlib import resources

from .corpus import LanguageTag, Script

DEFAULT_BIGRAM_THRESHOLD = 8


def truncate_repeating_bigrams(text: str, threshold: int = DEFAULT_BIGRAM_THRESHOLD) -> str:
    """Truncate after the first occurrence of a bigram repeated more than
    ``threshold`` times.

    Tokens are whitespace-separated. Among bigrams whose count exceeds the
    threshold, the one whose first occurrence comes earliest wins; the text
    is cut right after that first occurrence and re-joined with single
    spaces. Applied until no bigram exceeds the threshold. Texts without
    such a bigram are returned unchanged.
    """
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    while True:
        tokens = text.split()
        counts: dict[tuple[str, str], int] = {}
        first_at: dict[tuple[str, str], int] = {}
        for i in range(len(tokens) - 1):
            bigram = (tokens[i], tokens[i + 1])
            counts[bigram] = counts.get(bigram, 0) + 1
            if bigram not in first_at:
                first_at[bigram] = i
        over = [(first_at[bg], bg) for bg, c in counts.items() if c > threshold]
        if not over:
            return text
        cut, _ = min(over)
        text = " ".join(tokens[: cut + 2])


# Unicode character-name prefixes for each script the detector knows.
_NAME_PREFIXES = (
    ("LATIN", Script.LATIN),
    ("ETHIOPIC", Script.ETHIOPIC),
    ("MYANMAR", Script.MYANMAR),
    ("KHMER", Script.KHMER),
    ("LAO", Script.LAO),
    ("SINHALA", Script.SINHALA),
    ("ARABIC", Script.ARABIC),
    ("CYRILLIC", Script.CYRILLIC),
    ("CJK", Script.HAN),
)

_SCRIPT_PRIORITY = {script: i for i, (_, script) in enumerate(_NAME_PREFIXES)}


@lru_cache(maxsize=None)
def _script_of_letter(ch: str) -> Script:
    name = unicodedata.name(ch, "")
    for prefix, script in _NAME_PREFIXES:
        if name.startswith(prefix):
            return script
    return Script.OTHER


def identify_script(text: str) -> Script:
    """Majority writing script over the letter codepoints of ``text``.

    Returns Other when there are no letters or no script reaches half of
    them (mixed-script output should not pass as target language).
    """
    counts: dict[Script, int] = {}
    total = 0
    for ch in text:
        if unicodedata.category(ch).startswith("L"):
            total += 1
            s = _script_of_letter(ch)
            counts[s] = counts.get(s, 0) + 1
    if total == 0:
        return Script.OTHER
    script, n = max(
        counts.items(),
        key=lambda kv: (kv[1], -_SCRIPT_PRIORITY.get(kv[0], len(_SCRIPT_PRIORITY))),
    )
    if 2 * n >= total:
        return script
    return Script.OTHER


@dataclass(frozen=True)
class ScriptProfile:
    """Which scripts count as correct for a target language.

    ``supported`` is False when the heuristic cannot tell the language
    apart from English output (Latin-script targets and scripts outside
    the detector's inventory); the language filter is then skipped.
    """

    expected_scripts: frozenset[Script]
    supported: bool

    @classmethod
    def unsupported(cls) -> "ScriptProfile":
        return cls(expected_scripts=frozenset(), supported=False)

    @classmethod
    def of(cls, *scripts: Script) -> "ScriptProfile":
        return cls(expected_scripts=frozenset(scripts), supported=True)


def _load_profile_table(text: str) -> dict[str, ScriptProfile]:
    table = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        code, scripts = line.split("\t")
        scripts = scripts.strip()
        if scripts == "-":
            table[code] = ScriptProfile.unsupported()
        else:
            table[code] = ScriptProfile.of(*(Script(s.strip()) for s in scripts.split(",")))
    return table


_DEFAULT_PROFILES = _load_profile_table(
    resources.files("comptra.assets").joinpath("script_profiles.tsv").read_text("utf-8")
)

# Scripts the detector can reliably separate from Latin-script output.
_DETECTABLE = {
    Script.ETHIOPIC,
    Script.MYANMAR,
    Script.KHMER,
    Script.LAO,
    Script.SINHALA,
    Script.ARABIC,
    Script.CYRILLIC,
    Script.HAN,
}


def load_script_profiles(path) -> dict[str, ScriptProfile]:
    """Read a profile table override: ``code<TAB>script[,script]`` per line,
    ``-`` marking unsupported codes."""
    with open(path, encoding="utf-8") as f:
        return _load_profile_table(f.read())


def script_profile_for(tag: LanguageTag, table: dict[str, ScriptProfile] | None = None) -> ScriptProfile:
    """Profile for a language: table entry if present, else derived from
    the tag's script (non-Latin detectable scripts are supported)."""
    profiles = _DEFAULT_PROFILES if table is None else table
    profile = profiles.get(tag.code)
    if profile is not None:
        return profile
    if tag.script in _DETECTABLE:
        return ScriptProfile.of(tag.script)
    return ScriptProfile.unsupported()


class DropReason(enum.Enum):
    NONE = "none"
    WRONG_LANGUAGE = "wrong_language"
    EMPTY_AFTER_CLEAN = "empty_after_clean"
    DUPLICATE = "duplicate"


@dataclass(frozen=True)
class PhrasePair:
    phrase: str
    translation: str
    kept: bool = True
    drop_reason: DropReason = DropReason.NONE


def filter_phrase_pairs(
    pairs: list[PhrasePair],
    tgt: LanguageTag,
    profile: ScriptProfile | None = None,
    bigram_threshold: int = DEFAULT_BIGRAM_THRESHOLD,
) -> list[PhrasePair]:
    """Clean and annotate phrase translations, preserving order.

    Each translation is bigram-truncated first. Pairs are then marked
    wrong_language (supported profiles only), empty_after_clean, or
    duplicate of an already-kept (phrase, translation). Nothing is deleted;
    downstream consumers read only the kept pairs.
    """
    if profile is None:
        profile = script_profile_for(tgt)
    out: list[PhrasePair] = []
    seen: set[tuple[str, str]] = set()
    for pair in pairs:
        translation = truncate_repeating_bigrams(pair.translation, bigram_threshold)
        reason = DropReason.NONE
        if not translation.strip():
            reason = DropReason.EMPTY_AFTER_CLEAN
        elif profile.supported and identify_script(translation) not in profile.expected_scripts:
            reason = DropReason.WRONG_LANGUAGE
        elif (pair.phrase, translation) in seen:
            reason = DropReason.DUPLICATE
        if reason is DropReason.NONE:
            seen.add((pair.phrase, translation))
        out.append(
            replace(pair, translation=translation, kept=reason is DropReason.NONE, drop_reason=reason)
        )
    return out
