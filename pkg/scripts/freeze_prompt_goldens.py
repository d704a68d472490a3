"""Regenerate the golden prompt files under tests/data/.

The inputs reproduce the documented template walkthroughs (the 4-month-old
mice sentence with five retrieved demonstrations, and the three-pair merge
example); targets are the literal "<>" placeholder those walkthroughs print.
Run after any intentional template change, then review the diff.
"""

from pathlib import Path

from comptra.corpus import LanguageTag
from comptra.prompts import Demonstration, PromptKind, render_divide_prompt, render_translate_prompt

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"

MICE = '"We now have 4-month-old mice that are non-diabetic that used to be diabetic," he added.'

FEW_SHOT_DEMO_SOURCES = [
    '"If it becomes commercial, we should have it. That is, there\'s no in-principle objection '
    'to nuclear energy" Mr Costello said.',
    'The governor also stated, "Today, we learned that some school aged children have been '
    'identified as having had contact with the patient."',
    'The commissioner said, "We haven\'t yet agreed on rules of origin and tariff con[c]essions, '
    'but the framework we have is enough to start trading on July 1, 2020".',
    "Permits are limited to protect the canyon, and become available on the 1st day of the month, "
    "four months prior to the start month.",
    "We have a year-long financial crisis, which has had its most acute moment in the past two "
    'months, and I think now the financial markets are beginning to recover."',
]

MERGE_PAIR_SOURCES = [
    "The mice used to be diabetic.",
    "They now have 4-month-old mice.",
    "The mice are non-diabetic.",
]


def main():
    amh = LanguageTag.from_code("amh_Ethi")
    eng = LanguageTag.from_code("eng_Latn")
    DATA.mkdir(parents=True, exist_ok=True)

    demos = [Demonstration(source=s, target="<>") for s in FEW_SHOT_DEMO_SOURCES]
    merge_demos = [Demonstration(source=s, target="<>") for s in MERGE_PAIR_SOURCES]

    goldens = {
        "golden_zero_shot.txt": render_translate_prompt(amh, eng, MICE, []),
        "golden_few_shot.txt": render_translate_prompt(amh, eng, MICE, demos),
        "golden_merge.txt": render_translate_prompt(amh, eng, MICE, merge_demos, kind=PromptKind.MERGE),
        "golden_divide.txt": render_divide_prompt(MICE, mode="propositions"),
        "golden_paraphrase.txt": render_divide_prompt(MICE, mode="paraphrase"),
    }
    for name, text in goldens.items():
        (DATA / name).write_text(text + "\n", encoding="utf-8")
        print(f"wrote {name} ({len(text)} chars)")


if __name__ == "__main__":
    main()
