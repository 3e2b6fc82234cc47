"""Command-line entry point.

Exit codes: 0 success, 1 validation error (bad data), 2 I/O or provider
error, 64 usage error. Every subcommand that writes into an output
directory also writes a manifest (config hash, lexicon hash, mode, seed)
sufficient to reproduce the run byte-identically in replay mode.
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

import click

from . import assess, pipeline, reports, textkit
from .corpus import Corpus, CorpusError, LABELS, load_corpus, split_validation, write_corpus
from .llmgate import GatewayConfig, LlmGateway, ProviderError
from .metrics import MappingFunction, read_verdicts, write_verdicts

DEFAULT_SEED = 20230901


def _manifest(out_dir: Path, config: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = dict(config)
    payload["lexicon_hash"] = textkit.default_lexicons().version_hash
    canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False)
    payload["config_hash"] = hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
    (out_dir / "manifest.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_report(out: Path, report: dict) -> None:
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    click.echo(reports.render_report(report))


def _gateway(mode: str, fixtures: str | None, model: str, base_url: str) -> LlmGateway:
    cfg = GatewayConfig(mode=mode, model=model, base_url=base_url)
    if fixtures:
        cfg.fixture_dir = Path(fixtures)
    return LlmGateway(cfg)


@click.group()
def cli() -> None:
    """Evaluation toolkit for QUD dependency parses."""


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
def ingest(corpus_path: str, out_dir: str | None) -> None:
    """Validate a corpus directory and report per-system counts."""
    corpus = load_corpus(corpus_path)
    summary = corpus.summary()
    click.echo(json.dumps(summary, indent=2, sort_keys=True))
    if out_dir:
        write_corpus(corpus, out_dir)
        _manifest(Path(out_dir), {"command": "ingest", "corpus": str(corpus_path)})


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--doc", "doc_id", required=True)
@click.option("--answers", required=True, help="comma-separated answer indices")
@click.option("--mode", type=click.Choice(["live", "replay", "record"]), default="replay")
@click.option("--fixtures", type=click.Path(file_okay=False), default=None)
@click.option("--model", default="gpt-4")
@click.option("--base-url", default="https://api.openai.com/v1")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
def parse(corpus_path, doc_id, answers, mode, fixtures, model, base_url, out_dir) -> None:
    """Parse one document: generate a question and anchor per answer index."""
    from . import qudparse

    corpus = load_corpus(corpus_path)
    if doc_id not in corpus.documents:
        raise CorpusError(f"unknown doc_id {doc_id!r}")
    indices = [int(x) for x in answers.split(",") if x.strip()]
    gateway = _gateway(mode, fixtures, model, base_url)
    run = qudparse.parse_document(gateway, corpus.documents[doc_id], indices)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "edges.jsonl").open("w", encoding="utf-8") as fh:
        for edge in run.edges:
            fh.write(json.dumps({
                "edge_id": edge.edge_id,
                "doc_id": edge.doc_id,
                "question": edge.question,
                "anchor_idx": edge.anchor_idx,
                "answer_idx": edge.answer_idx,
                "system": edge.system,
            }, ensure_ascii=False) + "\n")
    (out / "run_stats.json").write_text(json.dumps(run.stats(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _manifest(out, {"command": "parse", "doc": doc_id, "mode": mode, "model": model, "seed": DEFAULT_SEED})
    click.echo(json.dumps(run.stats(), indent=2, sort_keys=True))


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--metric", "metrics", multiple=True, required=True)
@click.option("--criterion", default=None)
@click.option("--mapping", "mapping_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--mode", type=click.Choice(["live", "replay", "record"]), default="replay")
@click.option("--fixtures", type=click.Path(file_okay=False), default=None)
@click.option("--model", default="gpt-4")
@click.option("--base-url", default="https://api.openai.com/v1")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
def evaluate(corpus_path, metrics, criterion, mapping_path, mode, fixtures, model, base_url, out_dir) -> None:
    """Run metrics over every edge and write verdicts.jsonl."""
    corpus = load_corpus(corpus_path)
    mapping = MappingFunction.load(mapping_path) if mapping_path else None
    verdicts = []
    gateway = None
    for metric_id in metrics:
        if metric_id in pipeline.RULE_METRICS:
            verdicts.extend(pipeline.run_rule_metric(corpus, metric_id))
        elif metric_id in pipeline.REFBASED_METRICS:
            if criterion is None:
                raise CorpusError(f"{metric_id} needs --criterion to map scores onto labels")
            chosen = mapping or pipeline.calibrate_refbased(corpus, metric_id, criterion)
            verdicts.extend(pipeline.refbased_verdicts(corpus, metric_id, criterion, chosen))
        else:
            if gateway is None:
                gateway = _gateway(mode, fixtures, model, base_url)
            verdicts.extend(pipeline.run_llm_metric(corpus, metric_id, gateway, criterion, mapping))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    count = write_verdicts(verdicts, out / "verdicts.jsonl")
    _manifest(out, {
        "command": "evaluate", "metrics": sorted(metrics), "mode": mode,
        "model": model, "seed": DEFAULT_SEED,
    })
    click.echo(f"wrote {count} verdicts to {out / 'verdicts.jsonl'}")


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--metric", "metric_id", required=True)
@click.option("--criterion", required=True, type=click.Choice(["comp", "givn", "relv"]))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
def calibrate(corpus_path, metric_id, criterion, out_path) -> None:
    """Tune a reference-based metric's score->label mapping on the validation split."""
    corpus = load_corpus(corpus_path)
    mapping = pipeline.calibrate_refbased(corpus, metric_id, criterion)
    mapping.save(out_path)
    click.echo(json.dumps(mapping.to_json(), indent=2))


@cli.command("assess")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--criterion", required=True, type=click.Choice(["comp", "givn", "relv"]))
@click.option("--metric", "metric_id", required=True)
@click.option("--verdicts", "verdicts_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--mapping", "mapping_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--exclude-gpt4/--include-gpt4", default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
def assess_cmd(corpus_path, criterion, metric_id, verdicts_path, mapping_path, exclude_gpt4, out_path) -> None:
    """Macro-F1 of a metric against gold labels, with the random baseline."""
    corpus = load_corpus(corpus_path)
    flt = assess.AssessmentFilter(exclude_systems=("gpt4",) if exclude_gpt4 else ())
    if metric_id in pipeline.RULE_METRICS:
        if pipeline.METRIC_CRITERION[metric_id] != criterion:
            raise CorpusError(f"{metric_id} scores criterion {pipeline.METRIC_CRITERION[metric_id]}, not {criterion}")
        verdicts = pipeline.run_rule_metric(corpus, metric_id)
        row = pipeline.assess_verdicts(corpus, verdicts, criterion, flt)
    elif metric_id in pipeline.REFBASED_METRICS:
        mapping = MappingFunction.load(mapping_path) if mapping_path else pipeline.calibrate_refbased(corpus, metric_id, criterion)
        row = pipeline.assess_refbased(corpus, metric_id, criterion, mapping, flt)
    elif verdicts_path:
        row = pipeline.assess_verdicts(corpus, read_verdicts(verdicts_path), criterion, flt)
        row["metric"] = metric_id
    else:
        raise CorpusError(f"metric {metric_id!r} needs --verdicts with precomputed labels")
    gold_dist = assess.gold_distribution(corpus, criterion, flt)
    baseline = assess.random_baseline(gold_dist)
    report = {
        "kind": "assessment",
        "label_order": list(LABELS[criterion]),
        "rows": [
            {"metric": row.get("metric", metric_id), "criterion": criterion,
             "per_class_f1": row["per_class_f1"], "macro_f1": row["macro_f1"], "n": row["n"]},
            {"metric": "random", "criterion": criterion,
             "per_class_f1": baseline["per_class_f1"], "macro_f1": baseline["macro_f1"], "n": row["n"]},
        ],
    }
    if out_path:
        _write_report(Path(out_path), report)
    else:
        click.echo(reports.render_report(report))


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
def distributions(corpus_path, out_path) -> None:
    """Per-system gold label distributions."""
    corpus = load_corpus(corpus_path)
    report = pipeline.distribution_report_json(corpus)
    if out_path:
        _write_report(Path(out_path), report)
    else:
        click.echo(reports.render_report(report))


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
def agreement(corpus_path, out_path) -> None:
    """Inter-annotator agreement on multiply-annotated edges."""
    corpus = load_corpus(corpus_path)
    report = pipeline.agreement_report_json(corpus)
    if out_path:
        _write_report(Path(out_path), report)
    else:
        click.echo(reports.render_report(report))


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
def dupstats(corpus_path, out_path) -> None:
    """Duplicate and length statistics per system."""
    corpus = load_corpus(corpus_path)
    report = pipeline.dupstats_report_json(corpus)
    if out_path:
        _write_report(Path(out_path), report)
    else:
        click.echo(reports.render_report(report))


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
def correlate(corpus_path, out_path) -> None:
    """Spearman correlation of lexical metrics with annotated similarity."""
    corpus = load_corpus(corpus_path)
    report = pipeline.correlation_report(corpus)
    if out_path:
        _write_report(Path(out_path), report)
    else:
        click.echo(reports.render_report(report))


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
def significance(corpus_path, out_path) -> None:
    """Chi-square significance of cross-system label distributions."""
    corpus = load_corpus(corpus_path)
    report = pipeline.significance_report(corpus)
    if out_path:
        _write_report(Path(out_path), report)
    else:
        click.echo(reports.render_report(report))


@cli.command()
@click.option("--report", "report_path", required=True, type=click.Path(exists=True, dir_okay=False))
def render(report_path) -> None:
    """Render a report.json as an aligned text table."""
    report = json.loads(Path(report_path).read_text(encoding="utf-8"))
    click.echo(reports.render_report(report))


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--store", "store_path", required=True, type=click.Path(dir_okay=False))
@click.option("--assignments", "assignments_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--static-dir", type=click.Path(file_okay=False), default=None)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8750)
def serve(corpus_path, store_path, assignments_path, static_dir, host, port) -> None:
    """Start the annotation service."""
    import uvicorn

    from .annoserve import AnnotationStore, create_app

    corpus = load_corpus(corpus_path)
    assignments = None
    if assignments_path:
        assignments = json.loads(Path(assignments_path).read_text(encoding="utf-8"))
    store = AnnotationStore(store_path)
    app = create_app(corpus, store, assignments, Path(static_dir) if static_dir else None)
    uvicorn.run(app, host=host, port=port, log_level="warning")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        click.echo(cli.get_help(click.Context(cli)), err=True)
        return 64
    except click.ClickException as exc:
        exc.show()
        return 64
    except CorpusError as exc:
        click.echo(f"validation error: {exc}", err=True)
        return 1
    except (assess.EmptyValidation, assess.DegenerateData, assess.InsufficientAnnotators, ValueError) as exc:
        click.echo(f"validation error: {exc}", err=True)
        return 1
    except (ProviderError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
