"""Command-line interface.

Exit codes: 0 success, 1 validation failure, 2 I/O or format error,
3 undefined metric.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import yaml

from .config import PipelineConfig, load_config
from .errors import FormatError, UndefinedMetricError, ValidationFailure
from .formats import (
    GT_FORMATS,
    load_ground_truth,
    load_responses,
    write_embeddings,
    write_ground_truth,
    write_responses,
)
from .metrics import aggregate_dataset
from .parsing import parse_all
from .pipeline import (
    ABLATION_PLANS,
    read_scores_csv,
    run_ablation,
    run_ablation_over_seeds,
    run_pipeline,
)
from .plotting import emit_plot_data
from .synthetic import (
    SyntheticSpec,
    generate_synthetic_fixture,
    locally_coherent_spec,
    scene_drift_spec,
)


def guarded(func):
    """Map package errors onto the documented exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (ValidationFailure, ValueError) as exc:
            click.echo(f"validation failure: {exc}", err=True)
            sys.exit(1)
        except (FormatError, OSError) as exc:
            click.echo(f"input error: {exc}", err=True)
            sys.exit(2)
        except UndefinedMetricError as exc:
            click.echo(f"undefined metric: {exc}", err=True)
            sys.exit(3)

    return wrapper


def _resolve_config(config_path, responses, embeddings, gt, gt_format, out) -> PipelineConfig:
    config = load_config(config_path) if config_path else PipelineConfig()
    overrides = {"responses": responses, "embeddings": embeddings, "ground_truth": gt,
                 "output": out}
    if gt_format is not None:
        overrides["ground_truth_format"] = gt_format
    return config.with_paths(**overrides)


@click.group()
def main():
    """Anomaly-score refinement pipeline for segment-level video responses."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--responses", type=click.Path(exists=True), default=None)
@click.option("--embeddings", type=click.Path(exists=True), default=None)
@click.option("--gt", type=click.Path(exists=True), default=None)
@click.option("--gt-format", type=click.Choice(GT_FORMATS), default=None)
@click.option("--out", type=click.Path(), default=None)
@guarded
def run(config_path, responses, embeddings, gt, gt_format, out):
    """Score all configured videos and write run artifacts."""
    config = _resolve_config(config_path, responses, embeddings, gt, gt_format, out)
    if not config.paths.output:
        raise ValidationFailure("an output directory is required (--out or paths.output)")
    artifact = run_pipeline(config)
    click.echo(f"scored {len(artifact.scores)} video(s) -> {artifact.output_dir}")
    if artifact.metrics is not None:
        click.echo(
            f"pooled auc_roc={artifact.metrics.auc_roc:.4f} "
            f"average_precision={artifact.metrics.average_precision:.4f}"
        )


@main.command()
@click.option("--plan", type=click.Choice(ABLATION_PLANS), required=True)
@click.option("--seeds", type=int, default=0,
              help="Run on this many synthetic fixtures instead of configured inputs.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--synth-spec", type=click.Path(exists=True), default=None,
              help="YAML overrides for the synthetic fixture spec.")
@click.option("--out", type=click.Path(), default=None, help="Write the report JSON here.")
@guarded
def ablate(plan, seeds, config_path, synth_spec, out):
    """Sweep one setting and report metrics per configuration."""
    config = load_config(config_path) if config_path else PipelineConfig()
    if seeds > 0:
        spec = _load_synth_spec(synth_spec, plan)
        report = run_ablation_over_seeds(config, plan, spec, seeds)
    else:
        if not config.paths.responses:
            raise ValidationFailure("configure input paths or pass --seeds N")
        report = run_ablation(config, plan)
    for row in report["rows"]:
        click.echo(f"{row['name']:<12} auc_roc={row['auc_roc']:.4f}")
    if out:
        Path(out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                             encoding="utf-8")
        click.echo(f"report -> {out}")


def _load_synth_spec(path, plan) -> SyntheticSpec:
    # the sweep over window sizes is about distant look-alike scenes, so
    # its default fixture drifts; the others use the coherent fixture
    factory = scene_drift_spec if plan == "l_sweep" else locally_coherent_spec
    if path is None:
        return factory()
    with open(path, "r", encoding="utf-8") as handle:
        tree = yaml.safe_load(handle) or {}
    if not isinstance(tree, dict):
        raise FormatError(f"{path}: synthetic spec must be a mapping")
    if "anomalous_ranges" in tree:
        tree["anomalous_ranges"] = tuple(tuple(pair) for pair in tree["anomalous_ranges"])
    return factory(**tree)


@main.command()
@click.option("--spec", "spec_path", type=click.Path(exists=True), default=None,
              help="YAML overrides for the fixture spec (or a list of them).")
@click.option("--seed", type=int, required=True)
@click.option("--out", type=click.Path(), required=True)
@guarded
def synth(spec_path, seed, out):
    """Generate a synthetic fixture dataset on disk."""
    specs = _load_fixture_specs(spec_path)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    all_responses, all_labels = [], []
    for offset, spec in enumerate(specs):
        responses, embeddings, labels = generate_synthetic_fixture(spec, seed + offset)
        all_responses.extend(responses)
        all_labels.append(labels)
        write_embeddings(embeddings, out_dir / f"{spec.video_id}.crvb")
    write_responses(out_dir / "responses.jsonl", all_responses)
    write_ground_truth(out_dir / "ground_truth.json", all_labels)
    click.echo(f"wrote {len(specs)} video(s) -> {out_dir}")


def _load_fixture_specs(path) -> list[SyntheticSpec]:
    if path is None:
        return [SyntheticSpec()]
    with open(path, "r", encoding="utf-8") as handle:
        tree = yaml.safe_load(handle) or {}
    entries = tree if isinstance(tree, list) else [tree]
    specs = []
    for index, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise FormatError(f"{path}: each fixture spec must be a mapping")
        entry = dict(entry)
        if "anomalous_ranges" in entry:
            entry["anomalous_ranges"] = tuple(
                tuple(pair) for pair in entry["anomalous_ranges"]
            )
        entry.setdefault("video_id", f"synthetic-{index:03d}")
        specs.append(SyntheticSpec(**entry))
    return specs


@main.command("eval")
@click.option("--scores", "scores_path", type=click.Path(exists=True), required=True,
              help="A frame-score CSV or a directory of them.")
@click.option("--gt", type=click.Path(exists=True), required=True)
@click.option("--gt-format", type=click.Choice(GT_FORMATS), default="normalized")
@click.option("--out", type=click.Path(), default=None)
@guarded
def eval_scores(scores_path, gt, gt_format, out):
    """Evaluate emitted score CSVs against ground truth."""
    scores_path = Path(scores_path)
    files = sorted(scores_path.glob("*.csv")) if scores_path.is_dir() else [scores_path]
    if not files:
        raise ValidationFailure(f"{scores_path}: no score CSVs found")
    scores = {series.video_id: series for series in map(read_scores_csv, files)}
    frame_counts = {video_id: len(series) for video_id, series in scores.items()}
    labels = load_ground_truth(gt, gt_format, frame_counts=frame_counts)
    pairs = []
    for series in labels:
        if series.video_id in scores:
            pairs.append((scores[series.video_id], series))
    if not pairs:
        raise ValidationFailure("no video ids shared between scores and ground truth")
    metrics = aggregate_dataset(pairs)
    payload = json.dumps(metrics.to_json_dict(), indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(payload, encoding="utf-8")
        click.echo(f"metrics -> {out}")
    else:
        click.echo(payload, nl=False)


@main.command()
@click.option("--scores", "scores_path", type=click.Path(exists=True), required=True)
@click.option("--gt", type=click.Path(exists=True), default=None)
@click.option("--gt-format", type=click.Choice(GT_FORMATS), default="normalized")
@click.option("--responses", type=click.Path(exists=True), default=None,
              help="Optional responses JSONL supplying per-segment descriptions.")
@click.option("--out", type=click.Path(), required=True)
@guarded
def plot(scores_path, gt, gt_format, responses, out):
    """Render a score timeline (CSV + SVG + annotation sidecar)."""
    series = read_scores_csv(scores_path)
    labels = None
    if gt:
        frame_counts = {series.video_id: len(series)}
        for candidate in load_ground_truth(gt, gt_format, frame_counts=frame_counts):
            if candidate.video_id == series.video_id:
                labels = candidate
                break
    descriptions, spans = (), None
    if responses:
        grouped = load_responses(responses)
        if series.video_id in grouped:
            video_responses = grouped[series.video_id]
            _, descriptions = parse_all(video_responses)
            spans = [(r.start_frame, r.end_frame) for r in video_responses]
    written = emit_plot_data(series, labels, descriptions, out, spans=spans)
    click.echo("\n".join(str(path) for path in written.values()))


if __name__ == "__main__":
    main()
