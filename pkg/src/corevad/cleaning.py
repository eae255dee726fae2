"""Response cleaning by vision-text alignment.

Each segment's response is replaced with the response whose text
embedding is most cosine-similar to the segment's averaged vision
feature.  Local cleaning searches a clamped window of ``l`` neighbors on
each side; the global baseline searches the whole video.  Ties prefer
the candidate closest to the target segment, then the smaller index, so
a segment keeps its own response under full ambiguity.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .types import SEGMENT, CleaningResult, EmbeddingBundle, ScoreSeries, SegmentResponse
from .validation import check_matrix, check_vector

STRATEGIES = ("none", "global", "lrc")


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between two vectors, in [-1, 1]."""
    va = check_vector(a, "a")
    vb = check_vector(b, "b")
    if va.shape != vb.shape:
        raise ValueError(f"dimension mismatch: {va.shape[0]} vs {vb.shape[0]}")
    norm_a = np.linalg.norm(va)
    norm_b = np.linalg.norm(vb)
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValueError("cosine similarity is undefined for zero-norm vectors")
    return float(np.dot(va, vb) / (norm_a * norm_b))


def cosine_matrix(rows, cols) -> np.ndarray:
    """Pairwise cosine similarities between the rows of two matrices."""
    a = check_matrix(rows, "rows")
    b = check_matrix(cols, "cols")
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    norms_a = np.linalg.norm(a, axis=1, keepdims=True)
    norms_b = np.linalg.norm(b, axis=1, keepdims=True)
    if not (norms_a > 0).all() or not (norms_b > 0).all():
        raise ValueError("cosine similarity is undefined for zero-norm rows")
    return (a / norms_a) @ (b / norms_b).T


def clean_lrc(
    parsed: tuple[ScoreSeries, Sequence[str]],
    responses: Sequence[SegmentResponse],
    embeddings: EmbeddingBundle,
    l: int,
) -> CleaningResult:
    """Local response cleaning over windows of ``l`` neighbors per side.

    Windows are clamped at the video boundaries rather than padded.
    """
    if l < 0:
        raise ValueError("window size l must be >= 0")
    return _clean_by_alignment(parsed, responses, embeddings, window=l)


def clean_global(
    parsed: tuple[ScoreSeries, Sequence[str]],
    responses: Sequence[SegmentResponse],
    embeddings: EmbeddingBundle,
) -> CleaningResult:
    """Cleaning with the candidate set fixed to the entire video."""
    return _clean_by_alignment(parsed, responses, embeddings, window=None)


def clean_none(
    parsed: tuple[ScoreSeries, Sequence[str]], responses: Sequence[SegmentResponse]
) -> CleaningResult:
    """Identity cleaning: every segment keeps its own response."""
    decisions, descriptions = parsed
    return CleaningResult(
        selected_index=np.arange(len(responses), dtype=np.int64),
        decisions=decisions,
        descriptions=tuple(descriptions),
    )


def clean_responses(
    parsed: tuple[ScoreSeries, Sequence[str]],
    responses: Sequence[SegmentResponse],
    embeddings: EmbeddingBundle,
    strategy: str,
    l: int = 1,
) -> CleaningResult:
    """Dispatch on the configured cleaning strategy."""
    if strategy == "none":
        return clean_none(parsed, responses)
    if strategy == "global":
        return clean_global(parsed, responses, embeddings)
    if strategy == "lrc":
        return clean_lrc(parsed, responses, embeddings, l)
    raise ValueError(f"unknown cleaning strategy {strategy!r}")


def _clean_by_alignment(parsed, responses, embeddings, window) -> CleaningResult:
    decisions, descriptions = parsed
    num_segments = len(responses)
    if len(decisions.values) != num_segments or len(descriptions) != num_segments:
        raise ValueError("parsed outputs and responses disagree on segment count")
    if embeddings.num_segments != num_segments:
        raise ValueError("embeddings and responses disagree on segment count")
    similarity = cosine_matrix(embeddings.vision, embeddings.response_text)
    selected = _windowed_argmax(similarity, window)
    cleaned_values = decisions.values[selected]
    return CleaningResult(
        selected_index=selected,
        decisions=ScoreSeries(
            video_id=decisions.video_id, granularity=SEGMENT, values=cleaned_values
        ),
        descriptions=tuple(descriptions[i] for i in selected),
    )


def _windowed_argmax(similarity: np.ndarray, window) -> np.ndarray:
    """Per-row argmax of ``similarity[j, max(0, j-window) .. j+window]``.

    Exact ties prefer the candidate closest to j, then the smaller
    index, encoded as an integer preference key so the whole selection
    stays vectorized.
    """
    num_segments = similarity.shape[0]
    cols = np.arange(num_segments)
    distance = np.abs(cols[None, :] - cols[:, None])
    in_window = np.ones_like(distance, dtype=bool) if window is None else distance <= window
    masked = np.where(in_window, similarity, -np.inf)
    row_max = masked.max(axis=1, keepdims=True)
    preference = distance * (num_segments + 1) + cols[None, :]
    preference = np.where(in_window & (masked == row_max), preference,
                          np.iinfo(np.int64).max)
    return preference.argmin(axis=1).astype(np.int64)
