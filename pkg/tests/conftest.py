import pytest

from comptra.corpus import LanguageTag, ParallelCorpus, SentencePair


@pytest.fixture
def eng():
    return LanguageTag.from_code("eng_Latn")


@pytest.fixture
def amh():
    return LanguageTag.from_code("amh_Ethi")


def make_corpus(rows, src="eng_Latn", tgt="amh_Ethi") -> ParallelCorpus:
    """rows: list of (source, target) or plain source strings."""
    pairs = []
    for i, row in enumerate(rows):
        if isinstance(row, str):
            source, target = row, f"tgt-{i}"
        else:
            source, target = row
        pairs.append(SentencePair(id=i, source=source, target=target))
    return ParallelCorpus(
        pairs=tuple(pairs),
        src=LanguageTag.from_code(src),
        tgt=LanguageTag.from_code(tgt),
    )


MICE_SENTENCE = (
    '"We now have 4-month-old mice that are non-diabetic that used to be diabetic," he added.'
)
