"""Regenerate the end-to-end replay fixture under tests/data/:

  e2e_pool.tsv       10-pair English->Amharic selection pool
  e2e_eval.tsv       10 evaluation sentences
  e2e_cassette.jsonl every request/response of one compositional run

The recording backend is a deterministic mock whose divide responses split
on punctuation and whose translation responses transliterate words into
Ge'ez-block syllables, so every phrase translation passes the Ethiopic
script filter and no sentence falls back.
"""

import json
from pathlib import Path

from comptra.corpus import LanguageTag, load_parallel_corpus
from comptra.llm import BackendConfig, CassetteWriter, ChatRequest
from comptra.pipeline import Pipeline, PipelineConfig

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"

POOL = [
    ("The city council approved the water project.", "የከተማው ምክር ቤት የውሃ ፕሮጀክቱን አጸደቀ።"),
    ("Schools reopened after the storm passed.", "አውሎ ነፋሱ ካለፈ በኋላ ትምህርት ቤቶች ተከፈቱ።"),
    ("The new hospital treats hundreds of patients.", "አዲሱ ሆስፒታል በመቶዎች የሚቆጠሩ ታካሚዎችን ያክማል።"),
    ("Farmers planted maize along the river.", "ገበሬዎች በወንዙ ዳር በቆሎ ተከሉ።"),
    ("The minister announced a health plan.", "ሚኒስትሩ የጤና እቅድ አስታወቁ።"),
    ("Trains between the two cities were delayed.", "በሁለቱ ከተሞች መካከል ያሉ ባቡሮች ዘግይተዋል።"),
    ("Scientists found the virus in local water.", "ሳይንቲስቶች ቫይረሱን በአካባቢው ውሃ ውስጥ አገኙ።"),
    ("The market price of grain dropped sharply.", "የእህል የገበያ ዋጋ በከፍተኛ ሁኔታ ቀነሰ።"),
    ("Children received new books from the library.", "ልጆች ከቤተ መጻሕፍት አዲስ መጻሕፍት ተቀበሉ።"),
    ("The border station opened early this week.", "የድንበር ጣቢያው በዚህ ሳምንት መጀመሪያ ተከፈተ።"),
]

EVAL = [
    "The council opened a new school near the river, and farmers welcomed the plan.",
    "Hundreds of patients visited the hospital after the storm, but the trains were delayed.",
    "The minister said the water project will treat the virus problem in local markets.",
    "Scientists announced that grain prices dropped, and children received new books.",
    "The border station was closed early, because the city council rejected the plan.",
    "Schools along the border reopened this week, and the library received new maps.",
    "The health plan covers hundreds of farmers, and the market approved new prices.",
    "Trains carried grain between the two cities, but the river station stayed closed.",
    "The new library opened near the hospital, and the council announced a books plan.",
    "Local water treated at the station reached the schools before the storm arrived.",
]

_GEEZ_BASE = 0x1200
_GEEZ_SPAN = 0x135A - 0x1200


def _transliterate(text: str) -> str:
    """Deterministic pseudo-Amharic: one Ge'ez syllable per 2 characters."""
    words = []
    for word in text.split():
        letters = [c for c in word.lower() if c.isalpha()]
        if not letters:
            continue
        chars = []
        for i in range(0, len(letters), 2):
            chunk = letters[i:i + 2]
            code = (ord(chunk[0]) * 31 + (ord(chunk[-1]) if len(chunk) > 1 else 7)) % _GEEZ_SPAN
            ch = chr(_GEEZ_BASE + code)
            chars.append(ch if ch.isalpha() else "ሀ")
        words.append("".join(chars))
    return " ".join(words) if words else "ሀለም"


def responder(request: ChatRequest) -> str:
    prompt = request.prompt
    sentence = prompt.rstrip().rsplit("\n", 1)[-1].strip()
    if prompt.startswith("We would like to derive"):
        clauses = [c.strip(" .") for c in sentence.replace(";", ",").split(",") if c.strip(" .")]
        return "Propositions\n" + "\n".join(f"    {i}. {c}." for i, c in enumerate(clauses, 1))
    # phrase translation and merge prompts both end with the sentence block
    lines = [l for l in prompt.splitlines() if l.strip()]
    for i, line in enumerate(lines):
        if line.startswith("Please write a high-quality") and i + 1 < len(lines):
            return _transliterate(lines[i + 1])
    return _transliterate(sentence)


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    pool_path = DATA / "e2e_pool.tsv"
    eval_path = DATA / "e2e_eval.tsv"
    pool_path.write_text("".join(f"{s}\t{t}\n" for s, t in POOL), encoding="utf-8")
    eval_path.write_text("".join(f"{s}\t\n" for s in EVAL), encoding="utf-8")

    eng = LanguageTag.from_code("eng_Latn")
    amh = LanguageTag.from_code("amh_Ethi")
    pool = load_parallel_corpus(pool_path, format="tsv", src=eng, tgt=amh)
    eval_corpus = load_parallel_corpus(eval_path, format="tsv", src=eng, tgt=amh)

    mock = BackendConfig(kind="mock", mock_responder=responder)
    writer = CassetteWriter(mock, DATA / "e2e_cassette.jsonl")

    class RecordingClient:
        def complete(self, request):
            return writer.complete(request)

    pipeline = Pipeline(
        backend=mock,
        config=PipelineConfig(parallelism=1),
        src=eng,
        tgt=amh,
        pool=pool,
    )
    pipeline._client = RecordingClient()

    trace_path = DATA / "e2e_trace_reference.jsonl"
    summary = pipeline.run_corpus(eval_corpus, "comptra", trace_path)
    n_records = writer.close()
    print(f"recorded {n_records} cassette records; run: n={summary.n} "
          f"calls={summary.total_llm_calls} fallbacks={summary.n_fallbacks}")
    assert summary.n_fallbacks == 0, "fixture must not contain fallbacks"

    # scrub timing so the reference trace is byte-comparable
    lines = []
    for line in trace_path.read_text(encoding="utf-8").splitlines():
        record = json.loads(line)
        record["wall_time_ms"] = 0.0
        lines.append(json.dumps(record, ensure_ascii=False))
    trace_path.write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
