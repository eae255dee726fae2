from __future__ import annotations

import json

import numpy as np
import pytest

from corevad.config import PipelineConfig, config_from_mapping
from corevad.errors import ValidationFailure
from corevad.formats import write_embeddings, write_ground_truth, write_responses
from corevad.pipeline import (
    ablation_rows,
    load_dataset,
    read_scores_csv,
    run_ablation,
    run_ablation_over_seeds,
    run_pipeline,
    write_scores_csv,
)
from corevad.synthetic import SyntheticSpec, generate_synthetic_fixture
from corevad.types import FRAME, ScoreSeries


def _write_fixture_dir(tmp_path, specs, seed=0):
    tmp_path.mkdir(parents=True, exist_ok=True)
    responses_all, labels_all = [], []
    for offset, spec in enumerate(specs):
        responses, embeddings, labels = generate_synthetic_fixture(spec, seed + offset)
        responses_all.extend(responses)
        labels_all.append(labels)
        write_embeddings(embeddings, tmp_path / f"{spec.video_id}.crvb")
    write_responses(tmp_path / "responses.jsonl", responses_all)
    write_ground_truth(tmp_path / "ground_truth.json", labels_all)
    return config_from_mapping(
        {
            "workers": 2,
            "paths": {
                "responses": str(tmp_path / "responses.jsonl"),
                "embeddings": str(tmp_path),
                "ground_truth": str(tmp_path / "ground_truth.json"),
            },
        }
    )


def _specs():
    return [
        SyntheticSpec(video_id="vid-a", num_frames=600, anomalous_ranges=((121, 240),),
                      flip_prob=0.2, sigma_noise=0.5),
        SyntheticSpec(video_id="vid-b", num_frames=450, anomalous_ranges=(),
                      flip_prob=0.1, sigma_noise=0.5),
    ]


class TestRunPipeline:
    def test_end_to_end_artifacts(self, tmp_path):
        config = _write_fixture_dir(tmp_path / "in", _specs())
        out = tmp_path / "out"
        artifact = run_pipeline(config, output_dir=out)
        assert sorted(artifact.scores) == ["vid-a", "vid-b"]
        assert artifact.metrics is not None
        assert artifact.metrics.per_video["vid-b"] is None  # all-normal video
        assert (out / "scores" / "vid-a.csv").exists()
        assert (out / "metrics.json").exists()
        assert (out / "config.yaml").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert set(manifest["inputs"]) == {"responses", "embeddings", "ground_truth"}

    def test_reruns_are_byte_identical(self, tmp_path):
        config = _write_fixture_dir(tmp_path / "in", _specs())
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        run_pipeline(config, output_dir=out_a)
        run_pipeline(config, output_dir=out_b)
        for name in ("scores/vid-a.csv", "scores/vid-b.csv", "metrics.json",
                     "config.yaml", "manifest.json"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name

    def test_missing_ground_truth_skips_metrics(self, tmp_path):
        config = _write_fixture_dir(tmp_path / "in", _specs())
        config = config_from_mapping(
            {"paths": {"responses": config.paths.responses,
                       "embeddings": config.paths.embeddings}}
        )
        out = tmp_path / "out"
        artifact = run_pipeline(config, output_dir=out)
        assert artifact.metrics is None
        assert not (out / "metrics.json").exists()
        assert (out / "scores" / "vid-a.csv").exists()

    def test_missing_embeddings_is_validation_failure(self, tmp_path):
        config = _write_fixture_dir(tmp_path / "in", _specs())
        (tmp_path / "in" / "vid-a.crvb").unlink()
        with pytest.raises(ValidationFailure, match="vid-a"):
            load_dataset(config)

    def test_missing_paths_rejected(self):
        with pytest.raises(ValidationFailure, match="paths"):
            load_dataset(PipelineConfig())


class TestScoresCsv:
    def test_round_trip(self, tmp_path):
        series = ScoreSeries(video_id="clip", granularity=FRAME,
                             values=[0.25, 1.0, 0.125])
        path = tmp_path / "clip.csv"
        write_scores_csv(path, series)
        loaded = read_scores_csv(path)
        assert loaded.video_id == "clip"
        np.testing.assert_array_equal(loaded.values, series.values)

    def test_header_checked(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("a,b\n1,2\n", encoding="utf-8")
        with pytest.raises(ValidationFailure, match="header"):
            read_scores_csv(path)


class TestAblation:
    def test_rows_differ_only_in_declared_keys(self):
        base = PipelineConfig()
        base_dict = base.to_dict()

        def diff_keys(row_config):
            changed = []

            def walk(left, right, prefix=""):
                for key in left:
                    if isinstance(left[key], dict):
                        walk(left[key], right[key], f"{prefix}{key}.")
                    elif left[key] != right[key]:
                        changed.append(f"{prefix}{key}")

            walk(base_dict, row_config.to_dict())
            return set(changed)

        for name, row in ablation_rows("cleaning_table", base, 8):
            assert diff_keys(row) <= {"clean.strategy"}, name
        for name, row in ablation_rows("component_table", base, 8):
            assert diff_keys(row) <= {
                "refine.toggles.use_context_refine",
                "refine.toggles.use_smoothing",
                "refine.toggles.use_position_weight",
            }, name
        for name, row in ablation_rows("l_sweep", base, 8):
            assert diff_keys(row) <= {"clean.strategy", "clean.l"}, name

    def test_l_sweep_row_names(self):
        rows = ablation_rows("l_sweep", PipelineConfig(), 4)
        assert [name for name, _ in rows] == ["l=0", "l=1", "l=2", "l=3", "l=all"]

    def test_unknown_plan_rejected(self):
        with pytest.raises(ValueError):
            ablation_rows("everything", PipelineConfig(), 4)

    def test_run_ablation_on_files(self, tmp_path):
        config = _write_fixture_dir(tmp_path, [_specs()[0]])
        report = run_ablation(config, "cleaning_table")
        names = [row["name"] for row in report["rows"]]
        assert names == ["none", "global", "lrc"]
        for row in report["rows"]:
            assert 0.0 <= row["auc_roc"] <= 1.0
            assert 0.0 <= row["average_precision"] <= 1.0

    def test_run_ablation_requires_labels(self, tmp_path):
        config = _write_fixture_dir(tmp_path, [_specs()[0]])
        config = config_from_mapping(
            {"paths": {"responses": config.paths.responses,
                       "embeddings": config.paths.embeddings}}
        )
        with pytest.raises(ValidationFailure, match="ground truth"):
            run_ablation(config, "cleaning_table")

    def test_seeded_ablation_averages_rows(self):
        spec = SyntheticSpec(num_frames=600, anomalous_ranges=((121, 240),),
                             flip_prob=0.2, sigma_noise=0.5)
        report = run_ablation_over_seeds(PipelineConfig(), "component_table", spec, 3)
        assert report["seeds"] == 3
        for row in report["rows"]:
            assert row["num_seeds"] == 3
            assert 0.0 <= row["auc_roc"] <= 1.0
