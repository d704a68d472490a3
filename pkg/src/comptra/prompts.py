"""Prompt templates and decomposition-output parsing.

Templates are embedded text assets with ``{placeholder}`` slots
(``{src_name}``, ``{tgt_name}``, ``{sentence}``, ``{demonstrations}``),
overridable per run by a directory of same-named .txt files. The merge
prompt deliberately reuses the few-shot template so that gains cannot come
from prompt-shape changes.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .corpus import LanguageTag
from .errors import EmptyDemoField, NoPropositionsFound

MAX_PHRASES = 16


@dataclass(frozen=True)
class Demonstration:
    source: str
    target: str


class PromptKind(enum.Enum):
    ZERO_SHOT = "zero_shot"
    FEW_SHOT = "few_shot"
    DIVIDE = "divide"
    PARAPHRASE = "paraphrase"
    MERGE = "merge"


_TEMPLATE_FILES = {
    PromptKind.ZERO_SHOT: "zero_shot.txt",
    PromptKind.FEW_SHOT: "few_shot.txt",
    PromptKind.DIVIDE: "divide.txt",
    PromptKind.PARAPHRASE: "paraphrase.txt",
    PromptKind.MERGE: "few_shot.txt",  # same structure by construction
}


class PromptLibrary:
    """Template store; ``prompt_dir`` files override the embedded assets."""

    def __init__(self, prompt_dir: str | Path | None = None):
        self._templates: dict[PromptKind, str] = {}
        for kind, filename in _TEMPLATE_FILES.items():
            text = None
            if prompt_dir is not None:
                override = Path(prompt_dir) / f"{kind.value}.txt"
                if override.is_file():
                    text = override.read_text(encoding="utf-8")
            if text is None:
                text = resources.files("comptra.assets").joinpath(filename).read_text("utf-8")
            self._templates[kind] = text.rstrip("\n")

    def template(self, kind: PromptKind) -> str:
        return self._templates[kind]


_DEFAULT_LIBRARY = PromptLibrary()


def _substitute(template: str, values: dict[str, str]) -> str:
    # plain replacement, not str.format: templates and sentences may
    # contain arbitrary braces
    for key, value in values.items():
        template = template.replace("{" + key + "}", value)
    return template


def format_demonstrations(demos: list[Demonstration], src: LanguageTag, tgt: LanguageTag) -> str:
    blocks = []
    for n, demo in enumerate(demos, start=1):
        blocks.append(
            f"{n}. {src.display_name} sentence\n{demo.source}\n"
            f"{tgt.display_name} translation\n{demo.target}"
        )
    return "\n\n".join(blocks)


def render_translate_prompt(
    tgt: LanguageTag,
    src: LanguageTag,
    sentence: str,
    demos: list[Demonstration],
    kind: PromptKind | None = None,
    library: PromptLibrary | None = None,
) -> str:
    """Render the zero-shot prompt (no demos) or the few-shot/merge prompt."""
    if not sentence:
        raise ValueError("sentence must be non-empty")
    for i, demo in enumerate(demos):
        if not demo.source or not demo.target:
            raise EmptyDemoField(i)
    library = library or _DEFAULT_LIBRARY
    if not demos:
        return _substitute(
            library.template(PromptKind.ZERO_SHOT),
            {"tgt_name": tgt.display_name, "src_name": src.display_name, "sentence": sentence},
        )
    if kind is None or kind is PromptKind.ZERO_SHOT:
        kind = PromptKind.FEW_SHOT
    return _substitute(
        library.template(kind),
        {
            "demonstrations": format_demonstrations(demos, src, tgt),
            "tgt_name": tgt.display_name,
            "src_name": src.display_name,
            "sentence": sentence,
        },
    )


def render_divide_prompt(
    sentence: str,
    mode: str = "propositions",
    library: PromptLibrary | None = None,
) -> str:
    """Render the decomposition prompt; ``mode`` is "propositions" or
    "paraphrase"."""
    if not sentence:
        raise ValueError("sentence must be non-empty")
    library = library or _DEFAULT_LIBRARY
    if mode == "propositions":
        kind = PromptKind.DIVIDE
    elif mode == "paraphrase":
        kind = PromptKind.PARAPHRASE
    else:
        raise ValueError(f"unknown divide mode: {mode!r}")
    return _substitute(library.template(kind), {"sentence": sentence})


# "1. text" (appendix layout) plus the common "1)" drift; nothing wider.
_ITEM_RE = re.compile(r"^\s*\d+[.)]\s+(.*)$")


def parse_propositions(llm_output: str, cap: int = MAX_PHRASES) -> list[str]:
    """Extract the numbered list from a decomposition response.

    Collects ``N. text`` lines in order, ignoring preamble/epilogue prose;
    a blank line after the list started ends it, as does the cap. Raises
    NoPropositionsFound when there is no list at all.
    """
    phrases: list[str] = []
    in_list = False
    # split on "\n" only; other line separators may be sentence content
    for line in llm_output.split("\n"):
        match = _ITEM_RE.match(line)
        if match:
            phrase = match.group(1).strip()
            if phrase:
                phrases.append(phrase)
                in_list = True
                if len(phrases) >= cap:
                    break
        elif in_list and not line.strip():
            break
    if not phrases:
        raise NoPropositionsFound("no numbered list in output")
    return phrases
