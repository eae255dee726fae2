"""End-to-end orchestration: dataset loading, runs, and ablation sweeps.

A run is a pure function of (input bytes, resolved config): videos are
scored on a bounded worker pool, results are collected in video-id
order, and every artifact (score CSVs, metrics JSON, config snapshot,
manifest) is written with stable formatting so reruns are byte
identical.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .config import PipelineConfig, dump_config
from .errors import ValidationFailure
from .formats import (
    load_embeddings,
    load_ground_truth,
    load_responses,
)
from .metrics import DatasetMetrics, aggregate_dataset
from .synthetic import SyntheticSpec, generate_synthetic_fixture
from .types import FRAME, LabelSeries, ScoreSeries, VideoBundle
from .validation import validate_bundle

EMBEDDINGS_SUFFIX = ".crvb"


@dataclass(frozen=True)
class RunArtifact:
    """Everything one pipeline run produced."""

    scores: dict[str, ScoreSeries]
    metrics: Optional[DatasetMetrics]
    resolved_config: dict
    manifest: dict
    output_dir: Optional[Path] = None


def load_dataset(config: PipelineConfig) -> list[VideoBundle]:
    """Load and cross-validate all configured inputs, sorted by video id."""
    if not config.paths.responses or not config.paths.embeddings:
        raise ValidationFailure("config must set paths.responses and paths.embeddings")
    responses_by_video = load_responses(config.paths.responses, segment_interval=config.d)
    bundles_by_video = _load_all_embeddings(config.paths.embeddings)
    labels_by_video: dict[str, LabelSeries] = {}
    if config.paths.ground_truth:
        for series in load_ground_truth(
            config.paths.ground_truth, config.paths.ground_truth_format
        ):
            labels_by_video[series.video_id] = series

    bundles = []
    for video_id in sorted(responses_by_video):
        if video_id not in bundles_by_video:
            raise ValidationFailure(f"{video_id}: no embeddings file for this video")
        bundle = VideoBundle(
            responses=tuple(responses_by_video[video_id]),
            embeddings=bundles_by_video[video_id],
            labels=labels_by_video.get(video_id),
        )
        validate_bundle(bundle.responses, bundle.embeddings, bundle.labels).raise_if_fatal()
        bundles.append(bundle)
    return bundles


def _load_all_embeddings(path: str | Path):
    path = Path(path)
    files = sorted(path.glob(f"*{EMBEDDINGS_SUFFIX}")) if path.is_dir() else [path]
    if not files:
        raise ValidationFailure(f"{path}: no {EMBEDDINGS_SUFFIX} files found")
    out = {}
    for file in files:
        bundle = load_embeddings(file)
        if bundle.video_id in out:
            raise ValidationFailure(f"{bundle.video_id}: duplicate embeddings file")
        out[bundle.video_id] = bundle
    return out


def score_bundles(config: PipelineConfig, bundles: Sequence[VideoBundle]) -> dict[str, ScoreSeries]:
    """Score every bundle on a bounded pool; results keyed by video id."""
    scorer = config.to_scorer()
    if config.workers == 1 or len(bundles) == 1:
        results = [scorer.score_video(bundle) for bundle in bundles]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(scorer.score_video, bundles))
    return {series.video_id: series for series in results}


def evaluate_scores(
    scores: dict[str, ScoreSeries], bundles: Sequence[VideoBundle]
) -> Optional[DatasetMetrics]:
    """Pooled metrics over the labeled subset; None when nothing is labeled."""
    pairs = [
        (scores[bundle.video_id], bundle.labels)
        for bundle in bundles
        if bundle.labels is not None
    ]
    if not pairs:
        return None
    return aggregate_dataset(pairs)


def run_pipeline(config: PipelineConfig, output_dir: Optional[str | Path] = None) -> RunArtifact:
    """Execute the full chain and, when an output directory is known, persist it."""
    bundles = load_dataset(config)
    scores = score_bundles(config, bundles)
    metrics = evaluate_scores(scores, bundles)
    manifest = _build_manifest(config)
    if output_dir is None and config.paths.output:
        output_dir = config.paths.output
    artifact = RunArtifact(
        scores=scores,
        metrics=metrics,
        resolved_config=config.to_dict(),
        manifest=manifest,
        output_dir=Path(output_dir) if output_dir else None,
    )
    if artifact.output_dir is not None:
        _write_artifact(artifact, config)
    return artifact


def _write_artifact(artifact: RunArtifact, config: PipelineConfig) -> None:
    out = artifact.output_dir
    scores_dir = out / "scores"
    scores_dir.mkdir(parents=True, exist_ok=True)
    for video_id in sorted(artifact.scores):
        write_scores_csv(scores_dir / f"{video_id}.csv", artifact.scores[video_id])
    (out / "config.yaml").write_text(dump_config(config), encoding="utf-8")
    _write_json(out / "manifest.json", artifact.manifest)
    if artifact.metrics is not None:
        _write_json(out / "metrics.json", artifact.metrics.to_json_dict())


def write_scores_csv(path: str | Path, scores: ScoreSeries) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("frame_index,score\n")
        for idx, value in enumerate(scores.values, start=1):
            handle.write(f"{idx},{float(value)!r}\n")


def read_scores_csv(path: str | Path, video_id: Optional[str] = None) -> ScoreSeries:
    """Read a frame-score CSV (extra columns such as labels are ignored)."""
    values = []
    with open(path, "r", encoding="utf-8") as handle:
        header = handle.readline().strip().split(",")
        if header[:2] != ["frame_index", "score"]:
            raise ValidationFailure(f"{path}: expected a frame_index,score header")
        for line in handle:
            if not line.strip():
                continue
            fields = line.rstrip("\n").split(",")
            values.append(float(fields[1]))
    if video_id is None:
        video_id = Path(path).stem
    return ScoreSeries(video_id=video_id, granularity=FRAME, values=values)


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True, ensure_ascii=False)
        handle.write("\n")


def _build_manifest(config: PipelineConfig) -> dict:
    inputs = {}
    for name, path in (
        ("responses", config.paths.responses),
        ("embeddings", config.paths.embeddings),
        ("ground_truth", config.paths.ground_truth),
    ):
        if not path:
            continue
        path = Path(path)
        if path.is_dir():
            inputs[name] = {
                file.name: _sha256(file)
                for file in sorted(path.glob(f"*{EMBEDDINGS_SUFFIX}"))
            }
        else:
            inputs[name] = _sha256(path)
    snapshot = dump_config(config).encode("utf-8")
    return {
        "version": __version__,
        "inputs": inputs,
        "config_sha256": hashlib.sha256(snapshot).hexdigest(),
        # scoring is seedless; fixture generation seeds live with the
        # synth outputs, so file-based runs record null here
        "seed": None,
    }


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


# ---------------------------------------------------------------------------
# ablation sweeps

ABLATION_PLANS = ("cleaning_table", "component_table", "l_sweep")


def ablation_rows(
    plan: str, base: PipelineConfig, max_segments: int
) -> list[tuple[str, PipelineConfig]]:
    """Configs for one sweep; rows differ from the base only in the swept keys."""
    if plan == "cleaning_table":
        return [
            (strategy, _with_clean(base, strategy=strategy))
            for strategy in ("none", "global", "lrc")
        ]
    if plan == "component_table":
        rows = []
        for toggles in ((False, False, False), (True, False, False),
                        (True, True, False), (True, True, True)):
            name = "+".join(
                part
                for part, on in zip(("context", "smooth", "position"), toggles)
                if on
            ) or "flattened"
            rows.append((name, _with_toggles(base, *toggles)))
        return rows
    if plan == "l_sweep":
        rows = [
            (f"l={l}", _with_clean(base, strategy="lrc", l=l))
            for l in range(max_segments)
        ]
        rows.append(("l=all", _with_clean(base, strategy="global")))
        return rows
    raise ValueError(f"unknown ablation plan {plan!r}")


def _with_clean(base: PipelineConfig, strategy: str, l: Optional[int] = None) -> PipelineConfig:
    clean = dataclasses.replace(
        base.clean, strategy=strategy, **({} if l is None else {"l": l})
    )
    return dataclasses.replace(base, clean=clean)


def _with_toggles(base: PipelineConfig, context: bool, smooth: bool, position: bool) -> PipelineConfig:
    toggles = dataclasses.replace(
        base.refine.toggles,
        use_context_refine=context,
        use_smoothing=smooth,
        use_position_weight=position,
    )
    return dataclasses.replace(base, refine=dataclasses.replace(base.refine, toggles=toggles))


def run_ablation(config: PipelineConfig, plan: str) -> dict:
    """Run one sweep over the configured input files."""
    bundles = load_dataset(config)
    return _ablation_report(config, plan, bundles)


def run_ablation_over_seeds(
    config: PipelineConfig, plan: str, spec: SyntheticSpec, seeds: int
) -> dict:
    """Run one sweep on ``seeds`` synthetic fixtures and average each row.

    Single-fixture gaps between rows are noise-dominated, so rows report
    the mean metric across seeds.
    """
    if seeds < 1:
        raise ValueError("seeds must be >= 1")
    auc_by_row: dict[str, list[float]] = {}
    ap_by_row: dict[str, list[float]] = {}
    row_order: list[str] = []
    for seed in range(seeds):
        responses, embeddings, labels = generate_synthetic_fixture(spec, seed)
        bundle = VideoBundle(responses=tuple(responses), embeddings=embeddings, labels=labels)
        report = _ablation_report(config, plan, [bundle])
        for row in report["rows"]:
            auc_by_row.setdefault(row["name"], []).append(row["auc_roc"])
            ap_by_row.setdefault(row["name"], []).append(row["average_precision"])
            if row["name"] not in row_order:
                row_order.append(row["name"])
    rows = [
        {
            "name": name,
            "auc_roc": sum(auc_by_row[name]) / len(auc_by_row[name]),
            "average_precision": sum(ap_by_row[name]) / len(ap_by_row[name]),
            "num_seeds": len(auc_by_row[name]),
        }
        for name in row_order
    ]
    return {"plan": plan, "seeds": seeds, "rows": rows}


def _ablation_report(config: PipelineConfig, plan: str, bundles: Sequence[VideoBundle]) -> dict:
    if any(bundle.labels is None for bundle in bundles):
        raise ValidationFailure("ablation sweeps need ground truth for every video")
    max_segments = max(len(bundle.responses) for bundle in bundles)
    base_snapshot = config.to_dict()
    rows = []
    for name, row_config in ablation_rows(plan, config, max_segments):
        _assert_isolated(base_snapshot, row_config.to_dict(), plan)
        scores = score_bundles(row_config, bundles)
        metrics = evaluate_scores(scores, bundles)
        rows.append(
            {
                "name": name,
                "auc_roc": metrics.auc_roc,
                "average_precision": metrics.average_precision,
                "overrides": _snapshot_diff(base_snapshot, row_config.to_dict()),
            }
        )
    return {"plan": plan, "rows": rows}


_SWEPT_KEYS = {
    "cleaning_table": {"clean.strategy"},
    "component_table": {
        "refine.toggles.use_context_refine",
        "refine.toggles.use_smoothing",
        "refine.toggles.use_position_weight",
    },
    "l_sweep": {"clean.strategy", "clean.l"},
}


def _assert_isolated(base: dict, row: dict, plan: str) -> None:
    changed = set(_snapshot_diff(base, row))
    unexpected = changed - _SWEPT_KEYS[plan]
    if unexpected:
        raise AssertionError(f"ablation row changed undeclared keys: {sorted(unexpected)}")


def _snapshot_diff(base: dict, row: dict, prefix: str = "") -> dict[str, object]:
    diff: dict[str, object] = {}
    for key in base:
        if isinstance(base[key], dict):
            diff.update(_snapshot_diff(base[key], row[key], f"{prefix}{key}."))
        elif base[key] != row[key]:
            diff[f"{prefix}{key}"] = row[key]
    return diff
