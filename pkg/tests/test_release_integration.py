"""Integration checks against the released data: the corpus-level counts the
loader must report, the validation split, and the CLI surface over real data."""

import json
from pathlib import Path

import pytest

from qudeval.cli import main
from qudeval.corpus import load_corpus, split_validation

RELEASE_DIR = Path(__file__).parent.parent / "data" / "release"


@pytest.fixture(scope="module")
def release():
    return load_corpus(RELEASE_DIR)


class TestReleaseCounts:
    def test_total_edges(self, release):
        summary = release.summary()
        assert summary["edges"] == 2190
        machine = sum(summary["edges_per_system"][s] for s in ("ko-etal", "chatgpt", "alpaca", "gpt4"))
        assert machine == 2040
        assert summary["edges_per_system"]["dcqa-human"] == 150

    def test_each_machine_system_generated_510(self, release):
        for system in ("ko-etal", "chatgpt", "alpaca", "gpt4"):
            assert len(release.edges_for_system(system)) == 510

    def test_every_edge_labelled(self, release):
        assert all(release.gold_labels(e) is not None for e in release.edges)

    def test_validation_split_holds_sixty_questions(self, release):
        validation, test = split_validation(release, ["art01", "art02"])
        assert len(validation.edges) + len(test.edges) == 2190
        machine_validation = [
            e for e in validation.edges.values() if e.system in ("ko-etal", "chatgpt", "alpaca")
        ]
        assert len(machine_validation) == 60  # the held-out calibration questions
        assert all(doc.split_tag == "validation" for doc in validation.documents.values())

    def test_triply_annotated_subset_present(self, release):
        raw = [a for a in release.annotations if a.annotator_id != "gold"]
        by_edge = {}
        for rec in raw:
            by_edge.setdefault(rec.edge_id, set()).add(rec.annotator_id)
        triple = [e for e, annotators in by_edge.items() if len(annotators) == 3]
        assert len(triple) == 200

    def test_similarity_subset_size(self, release):
        edges = {r.edge_id for r in release.similarity}
        assert len(edges) == 199  # 66 + 66 + 67 pairs
        assert all(1.0 <= r.score <= 5.0 for r in release.similarity)


class TestCliOnRelease:
    def test_distributions_command(self, tmp_path, capsys):
        out = tmp_path / "dist.json"
        assert main(["distributions", "--corpus", str(RELEASE_DIR), "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["rows"]["ko-etal"]["lang"]["pass"] == pytest.approx(92.5, abs=0.2)
        rendered = capsys.readouterr().out
        assert "ko-etal" in rendered and "dcqa-human" in rendered

    def test_assess_command_rule_metric(self, tmp_path, capsys):
        out = tmp_path / "assess.json"
        code = main([
            "assess", "--corpus", str(RELEASE_DIR),
            "--criterion", "givn", "--metric", "givenness-rule",
            "--out", str(out),
        ])
        assert code == 0
        report = json.loads(out.read_text())
        row = report["rows"][0]
        assert row["metric"] == "givenness-rule"
        assert abs(row["macro_f1"] - 0.37) <= 0.08
        baseline = report["rows"][1]
        assert baseline["metric"] == "random"
        assert baseline["macro_f1"] == pytest.approx(1 / 3, abs=0.01)

    def test_agreement_command(self, tmp_path):
        out = tmp_path / "agreement.json"
        assert main(["agreement", "--corpus", str(RELEASE_DIR), "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["report"]["alpha"]["lang"] == pytest.approx(0.56, abs=0.02)

    def test_dupstats_command(self, tmp_path):
        out = tmp_path / "dup.json"
        assert main(["dupstats", "--corpus", str(RELEASE_DIR), "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["rows"]["alpaca"]["duplicates"] == 104

    def test_correlate_command(self, tmp_path):
        out = tmp_path / "corr.json"
        assert main(["correlate", "--corpus", str(RELEASE_DIR), "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["rows"]["qsts"]["n"] == 199

    def test_significance_command(self, tmp_path):
        out = tmp_path / "sig.json"
        assert main(["significance", "--corpus", str(RELEASE_DIR), "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert len(report["rows"]) == 18

    def test_calibrate_command(self, tmp_path):
        out = tmp_path / "mapping.json"
        code = main([
            "calibrate", "--corpus", str(RELEASE_DIR),
            "--metric", "bleu1", "--criterion", "relv", "--out", str(out),
        ])
        assert code == 0
        mapping = json.loads(out.read_text())
        assert mapping["labels"] == ["fully", "partially", "not_grounded"]
        t1, t2 = mapping["thresholds"]
        assert 0.0 <= t2 < t1 <= 1.0
