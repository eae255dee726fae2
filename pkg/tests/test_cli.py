from __future__ import annotations

import json
import pytest
from click.testing import CliRunner

from corevad.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def _synth(runner, tmp_path, seed=0):
    data = tmp_path / "data"
    spec = tmp_path / "spec.yaml"
    spec.write_text(
        "video_id: demo\n"
        "num_frames: 600\n"
        "anomalous_ranges: [[121, 240]]\n"
        "flip_prob: 0.2\n"
        "sigma_noise: 0.5\n",
        encoding="utf-8",
    )
    result = runner.invoke(main, ["synth", "--spec", str(spec), "--seed", str(seed),
                                  "--out", str(data)])
    assert result.exit_code == 0, result.output
    return data


def test_synth_then_run_then_eval_then_plot(runner, tmp_path):
    data = _synth(runner, tmp_path)
    out = tmp_path / "run"
    result = runner.invoke(main, [
        "run", "--responses", str(data / "responses.jsonl"),
        "--embeddings", str(data),
        "--gt", str(data / "ground_truth.json"),
        "--out", str(out),
    ])
    assert result.exit_code == 0, result.output
    assert "pooled auc_roc=" in result.output
    assert (out / "scores" / "demo.csv").exists()

    metrics_path = tmp_path / "metrics.json"
    result = runner.invoke(main, [
        "eval", "--scores", str(out / "scores"),
        "--gt", str(data / "ground_truth.json"),
        "--out", str(metrics_path),
    ])
    assert result.exit_code == 0, result.output
    emitted = json.loads(metrics_path.read_text())
    recorded = json.loads((out / "metrics.json").read_text())
    assert emitted["auc_roc"] == recorded["auc_roc"]

    plots = tmp_path / "plots"
    result = runner.invoke(main, [
        "plot", "--scores", str(out / "scores" / "demo.csv"),
        "--gt", str(data / "ground_truth.json"),
        "--responses", str(data / "responses.jsonl"),
        "--out", str(plots),
    ])
    assert result.exit_code == 0, result.output
    assert (plots / "demo.svg").exists()
    annotations = json.loads((plots / "demo.annotations.json").read_text())
    assert len(annotations["segments"]) == 20


def test_run_twice_is_byte_identical(runner, tmp_path):
    data = _synth(runner, tmp_path)
    outputs = []
    for name in ("one", "two"):
        out = tmp_path / name
        result = runner.invoke(main, [
            "run", "--responses", str(data / "responses.jsonl"),
            "--embeddings", str(data),
            "--gt", str(data / "ground_truth.json"),
            "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        outputs.append(out)
    first, second = outputs
    assert (first / "scores" / "demo.csv").read_bytes() == \
        (second / "scores" / "demo.csv").read_bytes()
    assert (first / "metrics.json").read_bytes() == (second / "metrics.json").read_bytes()


def test_run_without_output_exits_1(runner, tmp_path):
    data = _synth(runner, tmp_path)
    result = runner.invoke(main, [
        "run", "--responses", str(data / "responses.jsonl"), "--embeddings", str(data),
    ])
    assert result.exit_code == 1
    assert "validation failure" in result.output


def test_corrupt_embeddings_exit_2(runner, tmp_path):
    data = _synth(runner, tmp_path)
    (data / "demo.crvb").write_bytes(b"JUNKJUNKJUNK")
    result = runner.invoke(main, [
        "run", "--responses", str(data / "responses.jsonl"), "--embeddings", str(data),
        "--out", str(tmp_path / "out"),
    ])
    assert result.exit_code == 2
    assert "input error" in result.output


def test_single_class_eval_exit_3(runner, tmp_path):
    data = _synth(runner, tmp_path)
    out = tmp_path / "run"
    runner.invoke(main, [
        "run", "--responses", str(data / "responses.jsonl"), "--embeddings", str(data),
        "--out", str(out),
    ])
    all_normal = tmp_path / "gt.json"
    all_normal.write_text(
        json.dumps([{"video_id": "demo", "num_frames": 600, "anomalous_ranges": []}]),
        encoding="utf-8",
    )
    result = runner.invoke(main, [
        "eval", "--scores", str(out / "scores"), "--gt", str(all_normal),
    ])
    assert result.exit_code == 3
    assert "undefined metric" in result.output


def test_ablate_over_seeds(runner, tmp_path):
    spec = tmp_path / "spec.yaml"
    spec.write_text(
        "num_frames: 600\nanomalous_ranges: [[121, 240]]\n", encoding="utf-8"
    )
    report_path = tmp_path / "report.json"
    result = runner.invoke(main, [
        "ablate", "--plan", "cleaning_table", "--seeds", "2",
        "--synth-spec", str(spec), "--out", str(report_path),
    ])
    assert result.exit_code == 0, result.output
    report = json.loads(report_path.read_text())
    assert [row["name"] for row in report["rows"]] == ["none", "global", "lrc"]
    assert report["seeds"] == 2


def test_ablate_without_inputs_exit_1(runner):
    result = CliRunner().invoke(main, ["ablate", "--plan", "cleaning_table"])
    assert result.exit_code == 1
