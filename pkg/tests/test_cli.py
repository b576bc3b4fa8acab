import csv
import json

import pytest

from srgen.cli import EXIT_CONFIG, EXIT_FAILED, EXIT_INPUT, EXIT_OK, ConfigError, main, parse_seeds

from support import CORPUS, LISTING_1

BANK = str(CORPUS / "bank_account.sub")
FAST = ["--budget", "3000"]


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_seeds():
    assert parse_seeds("1..3") == [1, 2, 3]
    assert parse_seeds("1..2,7") == [1, 2, 7]
    for bad in ("3..1", "x", ""):
        with pytest.raises(ConfigError):
            parse_seeds(bad)


def test_generate_layout_and_evaluate(tmp_path, capsys):
    code, out, _ = run(["generate", BANK, "--seed", "1", "--out", str(tmp_path)] + FAST, capsys)
    assert code == EXIT_OK and "coverage" in out
    d = tmp_path / "bank_account" / "focal" / "seed-1"
    assert sorted(p.name for p in d.iterdir()) == \
        ["bank_account.focal.tests", "manifest.json", "report.json"]
    report = json.loads((d / "report.json").read_text())
    code, out, _ = run(["evaluate", BANK, str(d / "bank_account.focal.tests")], capsys)
    assert code == EXIT_OK
    ev = json.loads(out)
    assert ev["coverage"] == report["coverage"]
    assert ev["mutation_score"] == report["mutation_score"]
    assert ev["failed_assertions"] == []


def test_from_manifest_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["generate", BANK, "--repr", "baseline", "--seed", "4", "--out", str(a)] + FAST,
               capsys)[0] == EXIT_OK
    first = a / "bank_account" / "baseline" / "seed-4"
    assert run(["generate", "--from-manifest", str(first / "manifest.json"), "--out", str(b)],
               capsys)[0] == EXIT_OK
    second = b / "bank_account" / "baseline" / "seed-4"
    for name in ("report.json", "bank_account.baseline.tests"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_split_output(tmp_path, capsys):
    argv = ["generate", BANK, "--repr", "baseline", "--split", "--seed", "1", "--out", str(tmp_path)]
    assert run(argv + FAST, capsys)[0] == EXIT_OK
    d = tmp_path / "bank_account" / "baseline" / "seed-1"
    assert (d / "bank_account.baseline-split.tests").read_text().startswith("// srgen suite")


def test_input_and_config_errors(tmp_path, capsys):
    code, _, err = run(["generate", str(tmp_path / "missing.sub"), "--out", str(tmp_path)], capsys)
    assert code == EXIT_INPUT and "missing.sub" in err
    broken = tmp_path / "broken.sub"
    broken.write_text("unit X { method f() { return y; } }")
    assert run(["mutants", str(broken)], capsys)[0] == EXIT_INPUT
    with pytest.raises(SystemExit) as exc:
        main(["generate", BANK, "--repr", "bogus"])
    assert exc.value.code == EXIT_CONFIG
    assert run(["generate", BANK, "--budget", "-1", "--out", str(tmp_path)], capsys)[0] == EXIT_CONFIG
    assert run(["compare", BANK, "--seeds", "2..1", "--out", str(tmp_path)], capsys)[0] == EXIT_CONFIG


def test_mutants_json_lines(capsys):
    code, out, _ = run(["mutants", BANK], capsys)
    lines = [json.loads(x) for x in out.splitlines()]
    manifest = json.loads((CORPUS / "manifest.json").read_text())
    assert code == EXIT_OK and len(lines) == manifest["subjects"]["bank_account.sub"]["mutants"]
    assert [m["id"] for m in lines] == list(range(len(lines)))


def test_failing_suite_exits_1(tmp_path, capsys):
    suite = tmp_path / "wrong.tests"
    suite.write_text(LISTING_1.replace("150.0", "149.0"))
    code, out, _ = run(["evaluate", BANK, str(suite)], capsys)
    assert code == EXIT_FAILED
    assert json.loads(out)["failed_assertions"][0]["test"] == "testDepositToAccount"


def test_compare_writes_csv(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SRGEN_THREADS", "1")
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for name in ("counter.sub", "bank_account.sub"):
        (corpus / name).write_text((CORPUS / name).read_text())
    out = tmp_path / "out"
    code, _, _ = run(["compare", "--corpus", str(corpus), "--seeds", "1..2", "--out", str(out)] + FAST,
                     capsys)
    assert code == EXIT_OK
    rows = list(csv.reader((out / "comparison.csv").open()))
    data = [r for r in rows[1:] if r[2] != "summary"]
    assert len(data) == 2 * 2 * 2
    assert [r[0] for r in data][0] == "bank_account"
