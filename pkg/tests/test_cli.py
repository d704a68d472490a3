import json
from pathlib import Path

import pytest

from comptra.cli import main

DATA = Path(__file__).parent / "data"


@pytest.fixture
def pool_file(tmp_path):
    path = tmp_path / "pool.tsv"
    path.write_text(
        "the cat sat on the mat\tድመቷ ተቀመጠች\n"
        "the dog slept all day\tውሻው ተኛ\n"
        "birds fly over the river\tወፎች ይበርራሉ\n",
        encoding="utf-8",
    )
    return path


@pytest.fixture
def eval_file(tmp_path):
    path = tmp_path / "eval.tsv"
    path.write_text("A cat sat down, resting.\tx\nThe dog barked twice.\ty\n", encoding="utf-8")
    return path


def run_cli(*argv):
    return main([str(a) for a in argv])


def test_translate_mock_run(tmp_path, pool_file, eval_file, capsys):
    out = tmp_path / "trace.jsonl"
    code = run_cli(
        "translate", "--mode", "comptra", "--pool", pool_file, "--eval", eval_file,
        "--src", "eng_Latn", "--tgt", "amh_Ethi", "--backend", "mock", "--out", out,
    )
    assert code == 0
    records = [json.loads(l) for l in out.read_text(encoding="utf-8").splitlines()]
    assert len(records) == 2
    manifest = json.loads((tmp_path / "trace.jsonl.manifest.json").read_text(encoding="utf-8"))
    assert manifest["mode"] == "comptra" and manifest["config"]["retriever"] == "bm25"
    summary = json.loads(capsys.readouterr().out)
    assert summary["n"] == 2


def test_usage_error_exits_1(capsys):
    # argparse's native exit code for usage errors is 2; that code is
    # reserved for sentence-level run errors, so usage errors map to 1
    assert run_cli("translate", "--nonsense-flag") == 1
    assert run_cli("evaluate") == 1  # missing --ref


def test_help_exits_0(capsys):
    assert run_cli("--help") == 0


def test_translate_unknown_language_exits_1(tmp_path, pool_file, eval_file, capsys):
    out = tmp_path / "trace.jsonl"
    code = run_cli(
        "translate", "--pool", pool_file, "--eval", eval_file,
        "--src", "eng_Latn", "--tgt", "zzz_Wat", "--backend", "mock", "--out", out,
    )
    assert code == 1
    assert "--tgt" in capsys.readouterr().err


def test_translate_cassette_miss_exits_2(tmp_path, pool_file, eval_file):
    cassette = tmp_path / "empty.jsonl"
    cassette.write_text("", encoding="utf-8")
    out = tmp_path / "trace.jsonl"
    code = run_cli(
        "translate", "--mode", "zero", "--pool", pool_file, "--eval", eval_file,
        "--src", "eng_Latn", "--tgt", "amh_Ethi",
        "--backend", "cassette", "--cassette", cassette, "--out", out,
    )
    assert code == 2
    records = [json.loads(l) for l in out.read_text(encoding="utf-8").splitlines()]
    assert all(r["error"] and "CassetteMiss" in r["error"] for r in records)


def test_translate_config_file_precedence(tmp_path, pool_file, eval_file):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"k": 2, "mode": "few"}), encoding="utf-8")
    out = tmp_path / "trace.jsonl"
    code = run_cli(
        "translate", "--pool", pool_file, "--eval", eval_file, "--config", config,
        "--src", "eng_Latn", "--tgt", "amh_Ethi", "--backend", "mock",
        "--k", "1", "--out", out,
    )
    assert code == 0
    manifest = json.loads((tmp_path / "trace.jsonl.manifest.json").read_text(encoding="utf-8"))
    assert manifest["config"]["k"] == 1  # flag beats config file
    assert manifest["mode"] == "few_shot"  # config file beats default
    record = json.loads(out.read_text(encoding="utf-8").splitlines()[0])
    assert record["k_effective"] == 1


def test_translate_structure_without_trees_exits_1(tmp_path, pool_file, eval_file, capsys):
    code = run_cli(
        "translate", "--strategy", "structure", "--pool", pool_file, "--eval", eval_file,
        "--src", "eng_Latn", "--tgt", "amh_Ethi", "--backend", "mock",
        "--out", tmp_path / "t.jsonl",
    )
    assert code == 1
    assert "--trees" in capsys.readouterr().err


def test_evaluate_identical_files(tmp_path, capsys):
    ref = tmp_path / "ref.txt"
    ref.write_text("hello world\nthe cat sat down here\n", encoding="utf-8")
    code = run_cli("evaluate", "--hyp", ref, "--ref", ref, "--metric", "chrfpp")
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["score"] == pytest.approx(100.0) and report["n"] == 2


def test_evaluate_from_trace(tmp_path, capsys):
    trace = tmp_path / "trace.jsonl"
    trace.write_text(
        json.dumps({"final": "hello world"}) + "\n" + json.dumps({"final": "goodbye"}) + "\n",
        encoding="utf-8",
    )
    ref = tmp_path / "ref.txt"
    ref.write_text("hello world\ngoodbye\n", encoding="utf-8")
    code = run_cli("evaluate", "--trace", trace, "--ref", ref)
    assert code == 0
    assert json.loads(capsys.readouterr().out)["score"] == pytest.approx(100.0)


def test_evaluate_length_mismatch_exits_1(tmp_path, capsys):
    hyp = tmp_path / "h.txt"
    hyp.write_text("a\nb\n", encoding="utf-8")
    ref = tmp_path / "r.txt"
    ref.write_text("a\n", encoding="utf-8")
    assert run_cli("evaluate", "--hyp", hyp, "--ref", ref) == 1


def test_compare_self_is_insignificant(tmp_path, capsys):
    ref = tmp_path / "r.txt"
    ref.write_text("".join(f"sentence number {i} here\n" for i in range(20)), encoding="utf-8")
    code = run_cli(
        "compare", "--hyp-a", ref, "--hyp-b", ref, "--ref", ref,
        "--metric", "chrfpp", "--seed", "13", "--n-samples", "50", "--sample-size", "25",
    )
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["p_value"] == 1.0 and report["significant"] is False


def test_decompose_repeat(capsys):
    assert run_cli("decompose", "--strategy", "repeat", "--sentence", "s") == 0
    report = json.loads(capsys.readouterr().out)
    assert report["phrases"] == ["s", "s", "s", "s"]


def test_decompose_structure_without_trees_exits_1(capsys):
    assert run_cli("decompose", "--strategy", "structure", "--sentence", "s") == 1


def test_decompose_structure_with_trees(tmp_path, capsys):
    trees = tmp_path / "t.conllu"
    trees.write_text(
        "1\tCats\t_\t_\t_\t_\t2\tnsubj\t_\t_\n2\tsleep\t_\t_\t_\t_\t0\troot\t_\t_\n",
        encoding="utf-8",
    )
    code = run_cli("decompose", "--strategy", "structure", "--sentence", "Cats sleep", "--trees", trees)
    assert code == 0
    assert json.loads(capsys.readouterr().out)["phrases"] == ["Cats sleep"]


def test_retrieve_lcs(pool_file, capsys):
    code = run_cli("retrieve", "--pool", pool_file, "--query", "the cat", "--k", "3", "--retriever", "lcs")
    assert code == 0
    ranked = json.loads(capsys.readouterr().out)
    assert len(ranked) == 3 and ranked[0]["pool_id"] == 0 and ranked[0]["score"] == 2.0


def test_e2e_manifest_replay_reproduces_trace(tmp_path):
    """manifest + cassette reruns byte-identically (timing aside)."""
    out1 = tmp_path / "a.jsonl"
    code = run_cli(
        "translate", "--mode", "comptra",
        "--pool", DATA / "e2e_pool.tsv", "--eval", DATA / "e2e_eval.tsv",
        "--src", "eng_Latn", "--tgt", "amh_Ethi",
        "--backend", "cassette", "--cassette", DATA / "e2e_cassette.jsonl",
        "--out", out1,
    )
    assert code == 0
    manifest_path = tmp_path / "a.jsonl.manifest.json"
    out2 = tmp_path / "b.jsonl"
    code = run_cli(
        "translate", "--config", manifest_path,
        "--pool", DATA / "e2e_pool.tsv", "--eval", DATA / "e2e_eval.tsv",
        "--src", "eng_Latn", "--tgt", "amh_Ethi", "--out", out2,
    )
    assert code == 0

    def scrub(path):
        lines = []
        for line in path.read_text(encoding="utf-8").splitlines():
            record = json.loads(line)
            record["wall_time_ms"] = None
            lines.append(json.dumps(record, ensure_ascii=False))
        return lines

    assert scrub(out1) == scrub(out2)
