from __future__ import annotations

import numpy as np
import pytest

from corevad.types import EmbeddingBundle, ScoreSeries, SegmentResponse


def make_responses(video_id: str, span_lengths, texts=None) -> list[SegmentResponse]:
    """Contiguous segments with the given span lengths, starting at frame 1."""
    responses = []
    start = 1
    for idx, length in enumerate(span_lengths):
        text = texts[idx] if texts else f"Normal scenes: segment {idx + 1} activity."
        responses.append(
            SegmentResponse(
                video_id=video_id,
                segment_index=idx + 1,
                start_frame=start,
                end_frame=start + length - 1,
                raw_text=text,
            )
        )
        start += length
    return responses


def unit_rows(*cosines_and_signs) -> np.ndarray:
    """2-D rows (c, sqrt(1 - c^2)) whose cosine against (1, 0) is exactly c."""
    return np.array(
        [[c, np.sqrt(1.0 - c * c)] for c in cosines_and_signs], dtype=np.float64
    )


def make_bundle(video_id, vision, response_text, description_text=None) -> EmbeddingBundle:
    response_text = np.asarray(response_text, dtype=np.float32)
    return EmbeddingBundle(
        video_id=video_id,
        vision=np.asarray(vision, dtype=np.float32),
        response_text=response_text,
        description_text=(
            response_text.copy()
            if description_text is None
            else np.asarray(description_text, dtype=np.float32)
        ),
    )


def segment_series(video_id: str, values) -> ScoreSeries:
    return ScoreSeries(video_id=video_id, granularity="segment", values=values)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
