"""Deterministic synthetic fixtures for desk-scale pipeline checks.

The generator fabricates one video's worth of responses, embeddings,
and ground truth from a compact spec.  Segments inside one run of equal
ground-truth labels share a latent direction (plus a video-wide
component standing in for the static background), so local neighbors
are semantically closer than distant segments.  Two independent noise
processes corrupt the outputs:

* a decision flip rewrites the marker phrase; with probability
  ``flip_mismatch_prob`` the description and its embeddings drift to a
  different run's scene (detectable by vision-text alignment, and
  polluting that run's votes until cleaned away), otherwise the
  faithful description stays and only downstream voting can outweigh
  the bad decision;
* a description corruption keeps the decision but swaps the description
  and its embeddings for a different run's scene.

Everything is drawn from one seeded generator, so identical (spec,
seed) pairs produce byte-identical fixtures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
import numpy as np

from .formats import make_label_series
from .types import EmbeddingBundle, LabelSeries, SegmentResponse, majority_labels, segment_spans
from .validation import check_probability

_SUBJECTS = (
    "a man", "a woman", "two people", "a security guard", "a group of pedestrians",
    "a cyclist", "a shop owner", "a delivery worker",
)
_NORMAL_ACTIONS = (
    "walks along the sidewalk", "waits near the entrance", "browses the shelves",
    "crosses the street at the light", "unloads boxes from a van",
    "talks calmly with a colleague", "sweeps the floor", "sits on a bench",
)
_ANOMALOUS_ACTIONS = (
    "shoves another person to the ground", "smashes a window with a bat",
    "snatches a bag and runs", "sets fire to a trash bin",
    "vandalizes a parked car", "starts a violent brawl",
    "points a weapon at the cashier", "kicks down the door",
)
_TAILS = ("", " moments later", " in the same area", " as the footage continues")


@dataclass(frozen=True)
class SyntheticSpec:
    """Knobs for one synthetic video."""

    video_id: str = "synthetic-000"
    num_frames: int = 1200
    segment_interval: int = 30
    dim: int = 64
    anomalous_ranges: tuple[tuple[int, int], ...] = ((301, 480), (781, 900))
    flip_prob: float = 0.0
    flip_mismatch_prob: float = 0.5  # flips whose description goes wrong too
    desc_corrupt_prob: float = 0.0
    sigma_noise: float = 0.0
    shared_weight: float = 0.4  # video-wide background component
    run_weight: float = 1.0  # per-label-run scene component

    def with_video_id(self, video_id: str) -> "SyntheticSpec":
        return replace(self, video_id=video_id)


_ACCEPTANCE_RANGES = ((1201, 1800), (3301, 3900), (4801, 5100))


def locally_coherent_spec(**overrides) -> SyntheticSpec:
    """Fixture whose runs are directionally well separated.

    Neighboring segments align strongly while distant runs do not, so a
    small cleaning window can repair corrupted responses.
    """
    base = SyntheticSpec(
        num_frames=6000,
        anomalous_ranges=_ACCEPTANCE_RANGES,
        flip_prob=0.2,
        flip_mismatch_prob=0.5,
        desc_corrupt_prob=0.1,
        sigma_noise=0.6,
        shared_weight=0.4,
        run_weight=1.0,
    )
    return replace(base, **overrides)


def scene_drift_spec(**overrides) -> SyntheticSpec:
    """Fixture dominated by the shared background component.

    Distant segments look nearly as vision-aligned as local ones, so a
    video-wide candidate set keeps importing responses from unrelated
    runs while a small window stays on target.
    """
    base = SyntheticSpec(
        num_frames=6000,
        anomalous_ranges=_ACCEPTANCE_RANGES,
        flip_prob=0.2,
        flip_mismatch_prob=0.5,
        desc_corrupt_prob=0.1,
        sigma_noise=0.8,
        shared_weight=1.0,
        run_weight=0.3,
    )
    return replace(base, **overrides)


def generate_synthetic_fixture(
    spec: SyntheticSpec, seed: int
) -> tuple[list[SegmentResponse], EmbeddingBundle, LabelSeries]:
    """Build (responses, embeddings, labels) for one synthetic video."""
    check_probability(spec.flip_prob, "flip_prob")
    check_probability(spec.flip_mismatch_prob, "flip_mismatch_prob")
    check_probability(spec.desc_corrupt_prob, "desc_corrupt_prob")
    if spec.sigma_noise < 0:
        raise ValueError("sigma_noise must be >= 0")
    if spec.dim < 2:
        raise ValueError("dim must be >= 2")

    labels = make_label_series(spec.video_id, spec.num_frames, spec.anomalous_ranges)
    spans = segment_spans(spec.num_frames, spec.segment_interval)
    segment_truth = majority_labels(spans, labels)
    run_ids = _run_ids(segment_truth)
    num_runs = int(run_ids[-1]) + 1

    rng = np.random.default_rng(seed)
    base_direction = _unit(rng, spec.dim)
    run_directions = [_unit(rng, spec.dim) for _ in range(num_runs)]
    run_phrases = [
        _phrase(rng, anomalous=bool(segment_truth[np.argmax(run_ids == run)]))
        for run in range(num_runs)
    ]

    responses: list[SegmentResponse] = []
    vision_rows: list[np.ndarray] = []
    response_rows: list[np.ndarray] = []
    description_rows: list[np.ndarray] = []
    for j, (start, end) in enumerate(spans):
        truth = int(segment_truth[j])
        scene = _blend(base_direction, run_directions[run_ids[j]],
                       spec.shared_weight, spec.run_weight)
        flipped = rng.random() < spec.flip_prob
        mismatched = flipped and rng.random() < spec.flip_mismatch_prob
        desc_corrupted = rng.random() < spec.desc_corrupt_prob

        decision = 1 - truth if flipped else truth
        if mismatched or desc_corrupted:
            other = _other_run(rng, num_runs, run_ids[j])
            if other is None:
                text_direction = _unit(rng, spec.dim)
            else:
                text_direction = _blend(base_direction, run_directions[other],
                                        spec.shared_weight, spec.run_weight)
            description = _phrase(rng, anomalous=bool(rng.random() < 0.5))
        else:
            description = run_phrases[run_ids[j]] + _TAILS[j % len(_TAILS)]
            text_direction = scene
        marker = "Anomalous scenes" if decision else "Normal scenes"
        responses.append(
            SegmentResponse(
                video_id=spec.video_id,
                segment_index=j + 1,
                start_frame=start,
                end_frame=end,
                raw_text=f"{marker}: {description}.",
            )
        )
        vision_rows.append(_jitter(rng, scene, spec.sigma_noise))
        response_rows.append(_jitter(rng, text_direction, spec.sigma_noise))
        description_rows.append(_jitter(rng, text_direction, spec.sigma_noise))

    bundle = EmbeddingBundle(
        video_id=spec.video_id,
        vision=np.array(vision_rows, dtype=np.float32),
        response_text=np.array(response_rows, dtype=np.float32),
        description_text=np.array(description_rows, dtype=np.float32),
    )
    return responses, bundle, labels


def _run_ids(segment_truth: np.ndarray) -> np.ndarray:
    """Consecutive equal labels share a run id (0, 1, 2, ...)."""
    boundaries = np.diff(segment_truth) != 0
    return np.concatenate(([0], np.cumsum(boundaries))).astype(np.int64)


def _other_run(rng: np.random.Generator, num_runs: int, own: int):
    """Uniform run id other than ``own``; None for single-run videos."""
    if num_runs < 2:
        return None
    other = int(rng.integers(num_runs - 1))
    return other + 1 if other >= own else other


def _unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    vector = rng.standard_normal(dim)
    return vector / np.linalg.norm(vector)


def _blend(base: np.ndarray, run: np.ndarray, shared_weight: float, run_weight: float) -> np.ndarray:
    mixed = shared_weight * base + run_weight * run
    norm = np.linalg.norm(mixed)
    if norm == 0.0:
        raise ValueError("shared_weight and run_weight must not both be zero")
    return mixed / norm


def _jitter(rng: np.random.Generator, direction: np.ndarray, sigma: float) -> np.ndarray:
    # noise scaled so its expected length is sigma, independent of dim
    noise = rng.standard_normal(direction.shape[0]) / math.sqrt(direction.shape[0])
    return direction + sigma * noise


def _phrase(rng: np.random.Generator, anomalous: bool) -> str:
    actions = _ANOMALOUS_ACTIONS if anomalous else _NORMAL_ACTIONS
    subject = _SUBJECTS[int(rng.integers(len(_SUBJECTS)))]
    action = actions[int(rng.integers(len(actions)))]
    return f"{subject} {action}"
