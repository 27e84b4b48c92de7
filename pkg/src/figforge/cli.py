"""figforge command-line interface.

Subcommands: ingest, forge, bench sample|export, eval, judge,
stats ratings|corpus, review serve. Every subcommand honors --config,
--seed, --mock, and --workers; --mock forces the deterministic mock backend
everywhere (no credentials, no network). Failures exit non-zero with one
machine-readable JSON object on stderr.
"""
from __future__ import annotations

import csv
import functools
import json
import sys
from dataclasses import replace
from pathlib import Path

import click

from . import __version__
from .bench import BenchmarkSpec, CurationStore, export_benchmark, sample_candidates, write_export
from .bench.service import create_app, load_figures_meta
from .config import RunConfig, build_gateway, load_config
from .errors import FigforgeError
from .evalsuite import aggregate_verdicts, evaluate_predictions, judge_pairwise
from .evalsuite.runner import load_jsonl
from .forge.pipeline import plan_dry_run, run_pipeline, seed_for
from .ingest import run_ingest, write_ingest_outputs
from .report import charts, corpus_statistics
from .stats import build_agreement_report, format_mean_sd, load_ratings_csv


def fail(exc: Exception) -> None:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    deficits = getattr(exc, "deficits", None)
    if deficits:
        payload["deficits"] = deficits
    click.echo(json.dumps(payload), err=True)
    sys.exit(1)


def guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FigforgeError as exc:
            fail(exc)
        except (OSError, ValueError) as exc:
            fail(exc)

    return wrapper


def common_options(fn):
    fn = click.option("--workers", type=int, default=None, help="Override config worker count.")(fn)
    fn = click.option("--mock", is_flag=True, help="Use the deterministic mock backend.")(fn)
    fn = click.option("--seed", type=int, default=None, help="Override config seed.")(fn)
    fn = click.option("--config", "config_path", required=True, type=click.Path(),
                      help="Path to the run-config JSON file.")(fn)
    return fn


def resolve_config(config_path: str, seed: int | None, mock: bool, workers: int | None) -> RunConfig:
    config = load_config(config_path)
    if seed is not None:
        config = replace(config, seed=seed)
    if workers is not None:
        config = replace(config, workers=workers)
    if mock:
        config = config.with_mock_defaults()
    return config


@click.group()
@click.version_option(__version__)
def main():
    """Turn compound-figure article packages into instruction datasets."""


# -- ingest ---------------------------------------------------------------------

@main.command()
@common_options
@guarded
def ingest(config_path, seed, mock, workers):
    """Gate the corpus; write index and rejection reports."""
    config = resolve_config(config_path, seed, mock, workers)
    result = run_ingest(config.corpus_dir, config)
    paths = write_ingest_outputs(result, config.output_dir)
    click.echo(json.dumps({
        "figures_indexed": len(result["index"]),
        "rejections": len(result["rejections"]),
        "failures": len(result["failures"]),
        "outputs": {k: str(v) for k, v in paths.items()},
    }))


# -- forge ----------------------------------------------------------------------

@main.command()
@common_options
@click.option("--stage", type=click.Choice(["1", "2", "3", "4", "5", "all"]), default="all",
              help="Run the pipeline through this stage only.")
@click.option("--dry-run", is_flag=True, help="Print planned per-stage call counts; no model calls.")
@guarded
def forge(config_path, seed, mock, workers, stage, dry_run):
    """Run the five-stage instruction generation pipeline."""
    config = resolve_config(config_path, seed, mock, workers)
    if dry_run:
        click.echo(json.dumps(plan_dry_run(config.corpus_dir, config), indent=2))
        return
    gateway = build_gateway(config, mock=mock)
    through = 5 if stage == "all" else int(stage)
    report = run_pipeline(config.corpus_dir, config, gateway=gateway, through_stage=through)
    click.echo(json.dumps(report, indent=2))
    if report.get("status") != "complete":
        sys.exit(1)


# -- bench ---------------------------------------------------------------------

@main.group()
def bench():
    """Benchmark candidate sampling and export."""


@bench.command("sample")
@common_options
@click.option("--dataset", "dataset_path", type=click.Path(), default=None,
              help="Dataset JSONL (default: <output_dir>/dataset.jsonl).")
@click.option("--store", "store_path", type=click.Path(), default=None,
              help="Curation event log (default: <output_dir>/curation/events.jsonl).")
@click.option("--quota", type=int, default=50, show_default=True)
@click.option("--oversample", type=float, default=1.5, show_default=True)
@guarded
def bench_sample(config_path, seed, mock, workers, dataset_path, store_path, quota, oversample):
    """Seed the curation queue with a balanced candidate pool."""
    config = resolve_config(config_path, seed, mock, workers)
    dataset = Path(dataset_path) if dataset_path else config.output_dir / "dataset.jsonl"
    store_file = Path(store_path) if store_path else config.output_dir / "curation" / "events.jsonl"
    spec = BenchmarkSpec(quota_per_category=quota, seed=config.seed)
    pool = sample_candidates(dataset, spec, oversample=oversample)
    store = CurationStore(store_file)
    added = store.add_items(pool)
    click.echo(json.dumps({"candidates": len(pool), "newly_added": len(added),
                           "store": str(store_file)}))


@bench.command("export")
@common_options
@click.option("--store", "store_path", type=click.Path(), default=None)
@click.option("--dataset", "dataset_path", type=click.Path(), default=None,
              help="Dataset JSONL used for the manifest digest.")
@click.option("--quota", type=int, default=50, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Export directory (default: <output_dir>/benchmark).")
@guarded
def bench_export(config_path, seed, mock, workers, store_path, dataset_path, quota, out_dir):
    """Export the category-balanced benchmark from accepted items."""
    import hashlib

    config = resolve_config(config_path, seed, mock, workers)
    store_file = Path(store_path) if store_path else config.output_dir / "curation" / "events.jsonl"
    dataset = Path(dataset_path) if dataset_path else config.output_dir / "dataset.jsonl"
    digest = hashlib.sha256(dataset.read_bytes()).hexdigest() if dataset.exists() else None
    store = CurationStore(store_file)
    spec = BenchmarkSpec(quota_per_category=quota, seed=config.seed)
    export = export_benchmark(store.items(), spec, dataset_digest=digest)
    out = Path(out_dir) if out_dir else config.output_dir / "benchmark"
    benchmark_path, manifest_path = write_export(export, out)
    click.echo(json.dumps({"items": len(export.items), "benchmark": str(benchmark_path),
                           "manifest": str(manifest_path)}))


# -- eval / judge ------------------------------------------------------------------

@main.command("eval")
@common_options
@click.option("--dataset", "dataset_path", type=click.Path(), required=True)
@click.option("--predictions", "predictions_path", type=click.Path(), required=True)
@click.option("--task-type", "task_types", multiple=True, help="Restrict to these task types.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Report directory (default: <output_dir>/eval).")
@guarded
def eval_cmd(config_path, seed, mock, workers, dataset_path, predictions_path, task_types, out_dir):
    """Score a predictions file; write JSON + CSV + figure."""
    config = resolve_config(config_path, seed, mock, workers)
    gateway = build_gateway(config, mock=mock)
    report = evaluate_predictions(dataset_path, predictions_path, gateway,
                                  config.endpoint("embed"), task_types=list(task_types) or None)
    out = Path(out_dir) if out_dir else config.output_dir / "eval"
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=2), encoding="utf-8")
    with open(out / "report.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["task_type", "metric", "value"])
        for task, metrics in sorted(report["per_task"].items()):
            for metric, value in sorted(metrics.items()):
                writer.writerow([task, metric, value])
    if report["per_task"]:
        charts.save_metric_bars(report["per_task"], out / "metrics.png")
    click.echo(json.dumps(report["per_task"], indent=2))


@main.command()
@common_options
@click.option("--dataset", "dataset_path", type=click.Path(), required=True)
@click.option("--predictions-a", type=click.Path(), required=True)
@click.option("--predictions-b", type=click.Path(), required=True)
@click.option("--out", "out_dir", type=click.Path(), default=None)
@guarded
def judge(config_path, seed, mock, workers, dataset_path, predictions_a, predictions_b, out_dir):
    """Pairwise LLM-as-judge comparison of two prediction files."""
    config = resolve_config(config_path, seed, mock, workers)
    gateway = build_gateway(config, mock=mock)
    endpoint = config.endpoint("judge")
    records = {r["record_id"]: r for r in load_jsonl(dataset_path)}
    preds_a = {p["record_id"]: p.get("prediction", "") for p in load_jsonl(predictions_a)}
    preds_b = {p["record_id"]: p.get("prediction", "") for p in load_jsonl(predictions_b)}
    per_task: dict[str, list] = {}
    for record_id, record in sorted(records.items()):
        if record["task_type"] == "multi_choice":
            continue  # letter protocol covers it
        if record_id not in preds_a or record_id not in preds_b:
            continue
        verdict = judge_pairwise(
            record["answer"], preds_a[record_id], preds_b[record_id],
            gateway, endpoint, ab_seed=seed_for(config.seed, record_id),
        )
        per_task.setdefault(record["task_type"], []).append(verdict)
    report = {task: aggregate_verdicts(vs) | {"n": len(vs)} for task, vs in sorted(per_task.items())}
    out = Path(out_dir) if out_dir else config.output_dir / "judge"
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=2), encoding="utf-8")
    with open(out / "report.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["task_type", "win_pct", "tie_pct", "lose_pct", "n"])
        for task, agg in report.items():
            writer.writerow([task, agg["win_pct"], agg["tie_pct"], agg["lose_pct"], agg["n"]])
    if report:
        charts.save_judge_outcomes(report, out / "outcomes.png")
    click.echo(json.dumps(report, indent=2))


# -- stats ---------------------------------------------------------------------------

@main.group()
def stats():
    """Quality-assessment and corpus statistics."""


@stats.command("ratings")
@common_options
@click.option("--ratings", "ratings_path", type=click.Path(), required=True,
              help="CSV: sample_id,stage,rater_id,correctness,completeness,clarity")
@click.option("--out", "out_dir", type=click.Path(), default=None)
@guarded
def stats_ratings(config_path, seed, mock, workers, ratings_path, out_dir):
    """Inter-annotator agreement report over 1/3/5 ratings."""
    config = resolve_config(config_path, seed, mock, workers)
    ratings = load_ratings_csv(ratings_path)
    report = build_agreement_report(ratings)
    out = Path(out_dir) if out_dir else config.output_dir / "ratings"
    out.mkdir(parents=True, exist_ok=True)
    (out / "agreement.json").write_text(json.dumps(report.to_json(), indent=2), encoding="utf-8")
    with open(out / "stage_means.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stage", "correctness", "completeness", "clarity"])
        for stage, dims in sorted(report.per_stage_means.items()):
            writer.writerow([stage] + [format_mean_sd(*dims[d])
                                       for d in ("correctness", "completeness", "clarity")])
    charts.save_stage_means(report.per_stage_means, out / "stage_means.png")
    click.echo(json.dumps(report.to_json(), indent=2))


@stats.command("corpus")
@common_options
@click.option("--out", "out_dir", type=click.Path(), default=None)
@guarded
def stats_corpus(config_path, seed, mock, workers, out_dir):
    """Corpus characteristics with modality/anatomy distributions."""
    config = resolve_config(config_path, seed, mock, workers)
    gateway = None
    tagger = None
    if "tagger" in config.endpoints:
        gateway = build_gateway(config, mock=mock)
        tagger = config.endpoint("tagger")
    result = corpus_statistics(config.corpus_dir, gateway, tagger,
                               min_panel=config.gates.min_panel, min_gutter=config.gates.min_gutter)
    out = Path(out_dir) if out_dir else config.output_dir / "corpus_stats"
    out.mkdir(parents=True, exist_ok=True)
    (out / "corpus_stats.json").write_text(json.dumps(result, indent=2), encoding="utf-8")
    with open(out / "distributions.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["vocabulary", "term", "pct"])
        for vocab_name in ("modality_pct", "anatomy_pct"):
            for term, pct in (result.get(vocab_name) or {}).items():
                writer.writerow([vocab_name.removesuffix("_pct"), term, pct])
    if "modality_pct" in result:
        charts.save_distribution_pie(result["modality_pct"], "imaging modalities",
                                     out / "modality.png")
        charts.save_distribution_pie(result["anatomy_pct"], "anatomical systems",
                                     out / "anatomy.png")
    click.echo(json.dumps(result, indent=2))


# -- review service ---------------------------------------------------------------------

@main.group()
def review():
    """Human review service."""


@review.command("serve")
@common_options
@click.option("--store", "store_path", type=click.Path(), default=None)
@click.option("--figures", "figures_path", type=click.Path(), default=None,
              help="figures.jsonl sidecar (default: <output_dir>/figures.jsonl).")
@click.option("--images-root", type=click.Path(), default=None,
              help="Directory holding exported images (default: <output_dir>/images).")
@click.option("--ui", "ui_dir", type=click.Path(), default=None,
              help="Built review-console static files to serve at /.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8990, show_default=True)
@guarded
def review_serve(config_path, seed, mock, workers, store_path, figures_path, images_root,
                 ui_dir, host, port):
    """Serve the curation REST API (and the review console when built)."""
    import uvicorn

    config = resolve_config(config_path, seed, mock, workers)
    store_file = Path(store_path) if store_path else config.output_dir / "curation" / "events.jsonl"
    figures_file = Path(figures_path) if figures_path else config.output_dir / "figures.jsonl"
    images = Path(images_root) if images_root else config.output_dir / "images"
    store = CurationStore(store_file)
    app = create_app(store, figures_meta=load_figures_meta(figures_file),
                     images_root=images, static_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
