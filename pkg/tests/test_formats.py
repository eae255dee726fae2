from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from corevad.errors import FormatError, ValidationFailure
from corevad.formats import (
    decode_embeddings,
    encode_embeddings,
    load_embeddings,
    load_ground_truth,
    load_responses,
    make_label_series,
    write_embeddings,
    write_ground_truth,
    write_responses,
)
from corevad.types import EmbeddingBundle

from .conftest import make_bundle

DATA = Path(__file__).parent / "data"


def _write_jsonl(path, objects):
    path.write_text("\n".join(json.dumps(o) for o in objects) + "\n", encoding="utf-8")


def _response_obj(video_id="v1", segment_index=1, start_frame=1, end_frame=30,
                  raw_text="Normal scenes: a man walks."):
    return {
        "video_id": video_id,
        "segment_index": segment_index,
        "start_frame": start_frame,
        "end_frame": end_frame,
        "raw_text": raw_text,
    }


class TestResponses:
    def test_single_line_maps_fields(self, tmp_path):
        path = tmp_path / "r.jsonl"
        _write_jsonl(path, [_response_obj()])
        grouped = load_responses(path)
        (record,) = grouped["v1"]
        assert record.segment_index == 1
        assert record.span_length == 30
        assert record.raw_text == "Normal scenes: a man walks."

    def test_short_last_segment_accepted(self, tmp_path):
        path = tmp_path / "r.jsonl"
        _write_jsonl(path, [
            _response_obj(segment_index=1, start_frame=1, end_frame=30),
            _response_obj(segment_index=2, start_frame=31, end_frame=45),
        ])
        grouped = load_responses(path, segment_interval=30)
        assert [r.span_length for r in grouped["v1"]] == [30, 15]

    def test_duplicate_segment_index_rejected(self, tmp_path):
        path = tmp_path / "r.jsonl"
        _write_jsonl(path, [_response_obj(), _response_obj()])
        with pytest.raises(ValidationFailure, match="duplicate"):
            load_responses(path)

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = tmp_path / "r.jsonl"
        path.write_text(json.dumps(_response_obj()) + "\n{not json\n", encoding="utf-8")
        with pytest.raises(FormatError, match=":2"):
            load_responses(path)

    def test_non_contiguous_spans_rejected(self, tmp_path):
        path = tmp_path / "r.jsonl"
        _write_jsonl(path, [
            _response_obj(end_frame=30),
            _response_obj(segment_index=2, start_frame=32, end_frame=60),
        ])
        with pytest.raises(ValidationFailure, match="contiguous"):
            load_responses(path)

    def test_short_middle_segment_rejected_with_interval(self, tmp_path):
        path = tmp_path / "r.jsonl"
        _write_jsonl(path, [
            _response_obj(end_frame=20),
            _response_obj(segment_index=2, start_frame=21, end_frame=40),
        ])
        with pytest.raises(ValidationFailure, match="expected 30"):
            load_responses(path, segment_interval=30)

    def test_unexpected_keys_rejected(self, tmp_path):
        path = tmp_path / "r.jsonl"
        obj = _response_obj()
        obj["extra"] = 1
        _write_jsonl(path, [obj])
        with pytest.raises(FormatError, match="keys"):
            load_responses(path)

    def test_empty_raw_text_rejected(self, tmp_path):
        path = tmp_path / "r.jsonl"
        _write_jsonl(path, [_response_obj(raw_text="")])
        with pytest.raises(ValidationFailure, match="empty raw_text"):
            load_responses(path)

    def test_write_then_load_round_trips(self, tmp_path):
        path = tmp_path / "r.jsonl"
        _write_jsonl(path, [
            _response_obj(end_frame=30),
            _response_obj(segment_index=2, start_frame=31, end_frame=60,
                          raw_text="Anomalous scenes: a brawl erupts."),
        ])
        grouped = load_responses(path)
        out = tmp_path / "copy.jsonl"
        write_responses(out, grouped["v1"])
        assert load_responses(out) == grouped

    def test_loading_is_pure(self, tmp_path):
        path = tmp_path / "r.jsonl"
        _write_jsonl(path, [_response_obj()])
        assert load_responses(path) == load_responses(path)


class TestEmbeddings:
    def _bundle(self, rng, video_id="v1", rows=4, dim=8):
        return make_bundle(
            video_id,
            rng.normal(size=(rows, dim)),
            rng.normal(size=(rows, dim)),
            rng.normal(size=(rows, dim)),
        )

    def test_round_trip_values(self, tmp_path, rng):
        bundle = self._bundle(rng)
        path = tmp_path / "v1.crvb"
        write_embeddings(bundle, path)
        loaded = load_embeddings(path)
        assert loaded.video_id == "v1"
        assert loaded.vision.shape == (4, 8)
        np.testing.assert_array_equal(loaded.vision, bundle.vision)
        np.testing.assert_array_equal(loaded.description_text, bundle.description_text)

    def test_round_trip_bytes_identical(self, tmp_path, rng):
        bundle = self._bundle(rng)
        path = tmp_path / "v1.crvb"
        write_embeddings(bundle, path)
        original = path.read_bytes()
        assert encode_embeddings(load_embeddings(path)) == original

    def test_bad_magic(self):
        with pytest.raises(FormatError, match="magic"):
            decode_embeddings(b"NOPE" + b"\x00" * 32)

    def test_version_mismatch(self, rng):
        data = bytearray(encode_embeddings(self._bundle(rng)))
        data[4] = 9
        with pytest.raises(FormatError, match="version"):
            decode_embeddings(bytes(data))

    def test_truncated_payload(self, rng):
        data = encode_embeddings(self._bundle(rng))
        with pytest.raises(FormatError, match="truncated"):
            decode_embeddings(data[:-5])

    def test_trailing_bytes_rejected(self, rng):
        data = encode_embeddings(self._bundle(rng))
        with pytest.raises(FormatError, match="trailing"):
            decode_embeddings(data + b"\x00")

    def test_wrong_section_tag_rejected(self, rng):
        bundle = self._bundle(rng, rows=2, dim=3)
        data = bytearray(encode_embeddings(bundle))
        # first tag byte sits right after magic/version/id/dim/rows
        offset = 4 + 4 + 2 + len(b"v1") + 4 + 4
        assert data[offset] == 0
        data[offset] = 1
        with pytest.raises(FormatError, match="section tag"):
            decode_embeddings(bytes(data))

    def test_zero_norm_row_rejected(self, rng):
        bundle = self._bundle(rng, rows=3, dim=4)
        vision = bundle.vision.copy()
        vision[1] = 0.0
        bad = EmbeddingBundle(
            video_id="v1",
            vision=vision,
            response_text=bundle.response_text,
            description_text=bundle.description_text,
        )
        with pytest.raises(ValidationFailure, match="zero-norm row 1"):
            decode_embeddings(encode_embeddings(bad))

    def test_shape_mismatch_rejected_on_encode(self, rng):
        bundle = self._bundle(rng, rows=4, dim=8)
        bad = EmbeddingBundle(
            video_id="v1",
            vision=bundle.vision,
            response_text=bundle.response_text,
            description_text=bundle.description_text[:3],
        )
        with pytest.raises(ValidationFailure, match="shape"):
            encode_embeddings(bad)


class TestGroundTruth:
    def test_normalized_sample_frozen_values(self):
        series = load_ground_truth(DATA / "normalized_sample.json")
        by_id = {s.video_id: s for s in series}
        assert by_id["v1"].anomalous_ranges == ((3, 5),)
        expanded = by_id["v1"].to_frame_labels()
        assert expanded.tolist() == [0, 0, 1, 1, 1, 0, 0, 0, 0, 0]
        assert by_id["v2"].anomalous_ranges == ((1, 4), (30, 40))
        assert by_id["v3"].anomalous_ranges == ()
        assert by_id["v3"].to_frame_labels().sum() == 0

    def test_single_object_accepted(self, tmp_path):
        path = tmp_path / "gt.json"
        path.write_text(
            '{"video_id":"v1","num_frames":10,"anomalous_ranges":[[3,5]]}',
            encoding="utf-8",
        )
        (series,) = load_ground_truth(path)
        assert series.to_frame_labels().tolist() == [0, 0, 1, 1, 1, 0, 0, 0, 0, 0]

    def test_ucf_sample_drops_sentinels(self):
        series = load_ground_truth(
            DATA / "ucf_sample.txt", "ucf_crime_txt",
            frame_counts={"Abuse001_x264": 500, "Arrest002_x264": 450,
                          "Normal_Videos_010_x264": 300},
        )
        by_id = {s.video_id: s for s in series}
        assert by_id["Abuse001_x264"].anomalous_ranges == ((120, 300),)
        assert by_id["Abuse001_x264"].num_frames == 500
        assert by_id["Arrest002_x264"].anomalous_ranges == ((50, 100), (250, 400))
        assert by_id["Normal_Videos_010_x264"].anomalous_ranges == ()

    def test_ucf_frame_count_falls_back_to_max_end(self):
        series = load_ground_truth(DATA / "ucf_sample.txt", "ucf_crime_txt")
        by_id = {s.video_id: s for s in series}
        assert by_id["Abuse001_x264"].num_frames == 300
        assert by_id["Normal_Videos_010_x264"].num_frames == 0

    def test_xd_sample_keeps_dotted_titles(self):
        series = load_ground_truth(DATA / "xd_sample.txt", "xd_violence_txt")
        by_id = {s.video_id: s for s in series}
        assert by_id["Bad.Boys.1995__#00-40-26_00-41-24_label_B2-0-0"].anomalous_ranges == (
            (157, 482),
            (718, 786),
        )
        assert by_id["Riot.Compilation__#00-00-00_00-01-00_label_B1-0-0"].num_frames == 60

    def test_unknown_format_rejected(self):
        with pytest.raises(ValueError, match="unknown ground-truth format"):
            load_ground_truth(DATA / "ucf_sample.txt", "surveillance_txt")

    def test_overlapping_ranges_rejected(self):
        with pytest.raises(ValidationFailure, match="overlapping"):
            make_label_series("v1", 10, [(3, 5), (5, 7)])

    def test_out_of_bounds_range_rejected(self):
        with pytest.raises(ValidationFailure, match="outside"):
            make_label_series("v1", 10, [(8, 12)])

    def test_expansion_length_and_mass(self):
        series = make_label_series("v1", 25, [(2, 4), (10, 11)])
        labels = series.to_frame_labels()
        assert len(labels) == 25
        assert labels.sum() == 3 + 2

    def test_write_round_trip(self, tmp_path):
        series = load_ground_truth(DATA / "normalized_sample.json")
        out = tmp_path / "gt.json"
        write_ground_truth(out, series)
        assert load_ground_truth(out) == series
