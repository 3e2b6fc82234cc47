import json
from pathlib import Path

import pytest

from qudeval.cli import main
from qudeval.corpus import load_corpus, write_corpus
from qudeval.reports import render_report

from test_corpus import write_minimal


@pytest.fixture
def corpus_dir(tmp_path):
    return write_minimal(
        tmp_path / "corpus",
        labels={
            "edge_id": "e1",
            "annotator_id": "gold",
            "lang": "pass",
            "comp": "direct",
            "givn": "no_new",
            "relv": "fully",
            "comment": "",
            "timestamp": "2023-08-01T00:00:00Z",
        },
    )


class TestExitCodes:
    def test_success(self, corpus_dir, capsys):
        assert main(["ingest", "--corpus", str(corpus_dir)]) == 0
        out = capsys.readouterr().out
        assert '"edges": 1' in out

    def test_usage_error_is_64(self, capsys):
        assert main(["ingest"]) == 64  # missing required --corpus

    def test_unknown_subcommand_is_64(self, capsys):
        assert main(["frobnicate"]) == 64

    def test_validation_error_is_1(self, tmp_path, capsys):
        bad = tmp_path / "bad"
        bad.mkdir()
        (bad / "documents.jsonl").write_text('{"doc_id": "d"}\n', encoding="utf-8")
        assert main(["ingest", "--corpus", str(bad)]) == 1

    def test_missing_corpus_dir_is_64(self, tmp_path):
        assert main(["ingest", "--corpus", str(tmp_path / "nope")]) == 64


class TestReports:
    def test_distributions_writes_report(self, corpus_dir, tmp_path, capsys):
        out = tmp_path / "report.json"
        assert main(["distributions", "--corpus", str(corpus_dir), "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["kind"] == "distributions"
        assert report["rows"]["ko-etal"]["lang"]["pass"] == 100.0

    def test_dupstats(self, corpus_dir, tmp_path):
        out = tmp_path / "dup.json"
        assert main(["dupstats", "--corpus", str(corpus_dir), "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["rows"]["ko-etal"]["duplicates"] == 0

    def test_render_deterministic(self, corpus_dir, tmp_path, capsys):
        out = tmp_path / "report.json"
        main(["distributions", "--corpus", str(corpus_dir), "--out", str(out)])
        capsys.readouterr()
        assert main(["render", "--report", str(out)]) == 0
        first = capsys.readouterr().out
        assert main(["render", "--report", str(out)]) == 0
        second = capsys.readouterr().out
        assert first == second

    def test_render_rejects_unknown_kind(self, tmp_path):
        bad = tmp_path / "r.json"
        bad.write_text('{"kind": "mystery"}', encoding="utf-8")
        assert main(["render", "--report", str(bad)]) == 1

    def test_header_only_table_for_empty_report(self):
        text = render_report({"kind": "dupstats", "rows": {}})
        lines = text.splitlines()
        assert len(lines) == 2  # header + rule, no data rows
        assert lines[0].startswith("system")

    def test_evaluate_rule_metric(self, corpus_dir, tmp_path, capsys):
        out = tmp_path / "run"
        code = main([
            "evaluate", "--corpus", str(corpus_dir),
            "--metric", "givenness-rule", "--out", str(out),
        ])
        assert code == 0
        lines = (out / "verdicts.jsonl").read_text().splitlines()
        assert len(lines) == 1
        verdict = json.loads(lines[0])
        assert verdict["metric_id"] == "givenness-rule"
        manifest = json.loads((out / "manifest.json").read_text())
        assert "lexicon_hash" in manifest and "config_hash" in manifest

    def test_manifest_reproducible(self, corpus_dir, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            main(["evaluate", "--corpus", str(corpus_dir), "--metric", "givenness-rule", "--out", str(out)])
        m1 = json.loads((out1 / "manifest.json").read_text())
        m2 = json.loads((out2 / "manifest.json").read_text())
        assert m1 == m2
        assert (out1 / "verdicts.jsonl").read_bytes() == (out2 / "verdicts.jsonl").read_bytes()


class TestRefbasedEvaluate:
    def test_refbased_verdicts_carry_raw_scores(self, tmp_path):
        release = Path(__file__).parent.parent / "data" / "release"
        out = tmp_path / "run"
        code = main([
            "evaluate", "--corpus", str(release),
            "--metric", "bleu1", "--criterion", "relv", "--out", str(out),
        ])
        assert code == 0
        lines = [json.loads(l) for l in (out / "verdicts.jsonl").read_text().splitlines()]
        assert lines and all(v["raw_score"] is not None for v in lines)
        assert all(v["provenance"]["mapping_id"] for v in lines)
