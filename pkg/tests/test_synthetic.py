from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from corevad.cleaning import cosine_matrix
from corevad.formats import encode_embeddings
from corevad.parsing import parse_decision
from corevad.synthetic import (
    SyntheticSpec,
    generate_synthetic_fixture,
    locally_coherent_spec,
    scene_drift_spec,
)
from corevad.types import majority_labels, segment_spans
from corevad.validation import validate_bundle


def _truth(spec, labels):
    spans = segment_spans(spec.num_frames, spec.segment_interval)
    return spans, majority_labels(spans, labels)


def test_spans_follow_clamped_segmentation():
    spec = SyntheticSpec(num_frames=95, segment_interval=30, anomalous_ranges=((40, 70),))
    responses, _, _ = generate_synthetic_fixture(spec, 0)
    spans = [(r.start_frame, r.end_frame) for r in responses]
    assert spans == [(1, 30), (31, 60), (61, 90), (91, 95)]


def test_zero_noise_decisions_match_majority_labels():
    spec = SyntheticSpec(flip_prob=0.0, desc_corrupt_prob=0.0, sigma_noise=0.1)
    responses, _, labels = generate_synthetic_fixture(spec, 7)
    _, truth = _truth(spec, labels)
    parsed = [parse_decision(r.raw_text).decision for r in responses]
    assert parsed == truth.tolist()


def test_outputs_are_deterministic_and_byte_identical():
    spec = locally_coherent_spec(num_frames=900, anomalous_ranges=((101, 250),))
    first = generate_synthetic_fixture(spec, 42)
    second = generate_synthetic_fixture(spec, 42)
    assert first[0] == second[0]
    assert encode_embeddings(first[1]) == encode_embeddings(second[1])
    assert first[2] == second[2]
    different = generate_synthetic_fixture(spec, 43)
    assert encode_embeddings(different[1]) != encode_embeddings(first[1])


def test_flip_rate_concentrates_near_probability():
    spec = SyntheticSpec(
        num_frames=6000,
        segment_interval=30,
        anomalous_ranges=((901, 1500), (3001, 3600)),
        flip_prob=0.3,
        sigma_noise=0.5,
    )
    rates = []
    for seed in range(10):
        responses, _, labels = generate_synthetic_fixture(spec, seed)
        assert len(responses) == 200
        _, truth = _truth(spec, labels)
        parsed = np.array([parse_decision(r.raw_text).decision for r in responses])
        rates.append(float(np.mean(parsed != truth)))
    assert abs(np.mean(rates) - 0.3) <= 0.08


def test_fixture_passes_bundle_validation():
    responses, bundle, labels = generate_synthetic_fixture(locally_coherent_spec(), 3)
    report = validate_bundle(responses, bundle, labels)
    assert not report.is_fatal


def test_same_run_neighbors_are_semantically_closer():
    spec = locally_coherent_spec(flip_prob=0.0, desc_corrupt_prob=0.0)
    _, bundle, labels = generate_synthetic_fixture(spec, 5)
    spans, truth = _truth(spec, labels)
    sims = cosine_matrix(bundle.vision, bundle.response_text)
    num = len(spans)
    same_run, cross_run = [], []
    for j in range(num):
        for i in range(num):
            if i == j:
                continue
            # runs only change where the label changes in this fixture
            same = truth[i] == truth[j] and all(
                truth[k] == truth[j] for k in range(min(i, j), max(i, j) + 1)
            )
            (same_run if same else cross_run).append(sims[j, i])
    assert np.mean(same_run) > np.mean(cross_run) + 0.2


def test_description_corruption_keeps_decision():
    spec = SyntheticSpec(flip_prob=0.0, desc_corrupt_prob=1.0, sigma_noise=0.2)
    responses, _, labels = generate_synthetic_fixture(spec, 11)
    _, truth = _truth(spec, labels)
    parsed = [parse_decision(r.raw_text).decision for r in responses]
    assert parsed == truth.tolist()


def test_invalid_spec_values_rejected():
    with pytest.raises(ValueError):
        generate_synthetic_fixture(SyntheticSpec(sigma_noise=-0.1), 0)
    with pytest.raises(ValueError):
        generate_synthetic_fixture(SyntheticSpec(flip_prob=1.5), 0)
    with pytest.raises(ValueError):
        generate_synthetic_fixture(SyntheticSpec(desc_corrupt_prob=-0.2), 0)


def test_factory_specs_expose_overrides():
    spec = scene_drift_spec(num_frames=3000, video_id="drifty")
    assert spec.video_id == "drifty"
    assert spec.num_frames == 3000
    assert dataclasses.replace(spec, video_id="x").video_id == "x"
