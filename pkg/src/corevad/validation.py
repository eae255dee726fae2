"""Cross-input consistency checks and small argument-validation helpers."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .types import (
    EmbeddingBundle,
    Issue,
    LabelSeries,
    SegmentResponse,
    ValidationReport,
)


def validate_bundle(
    responses: Sequence[SegmentResponse],
    embeddings: EmbeddingBundle,
    labels: Optional[LabelSeries] = None,
) -> ValidationReport:
    """Cross-check one video's responses, embeddings, and optional labels.

    Problems are reported, never raised; callers decide what a fatal
    report means for them.  Inputs are not mutated.
    """
    issues: list[Issue] = []
    video_id = embeddings.video_id

    ids = {r.video_id for r in responses} | {embeddings.video_id}
    if labels is not None:
        ids.add(labels.video_id)
    if len(ids) > 1:
        issues.append(
            Issue("error", "video-id-mismatch", f"inputs mix video ids {sorted(ids)}")
        )

    if embeddings.dim < 1:
        issues.append(Issue("error", "empty-dim", "embedding dimension must be >= 1"))
    shapes = {
        embeddings.vision.shape,
        embeddings.response_text.shape,
        embeddings.description_text.shape,
    }
    if len(shapes) > 1:
        issues.append(
            Issue("error", "section-shape-mismatch",
                  f"embedding sections disagree on shape: {sorted(shapes)}")
        )
    elif len(responses) != embeddings.num_segments:
        issues.append(
            Issue(
                "error",
                "row-count-mismatch",
                f"{len(responses)} responses vs {embeddings.num_segments} embedding rows",
            )
        )

    for name, matrix in (
        ("vision", embeddings.vision),
        ("response_text", embeddings.response_text),
        ("description_text", embeddings.description_text),
    ):
        if not np.isfinite(matrix).all():
            issues.append(
                Issue("error", "non-finite", f"non-finite values in {name} rows")
            )
        elif matrix.size and not (np.linalg.norm(matrix, axis=1) > 0).all():
            issues.append(Issue("error", "zero-norm", f"zero-norm row in {name}"))

    if labels is not None and responses:
        covered = responses[-1].end_frame
        if covered > labels.num_frames:
            issues.append(
                Issue(
                    "error",
                    "spans-exceed-labels",
                    f"responses cover frame {covered} but labels stop at "
                    f"{labels.num_frames}",
                )
            )
        elif covered < labels.num_frames:
            issues.append(
                Issue(
                    "warning",
                    "trailing-frames-uncovered",
                    f"{labels.num_frames - covered} trailing frames uncovered",
                )
            )

    return ValidationReport(video_id=video_id, issues=tuple(issues))


def check_vector(value, name: str) -> np.ndarray:
    """Coerce to a finite 1-D float vector."""
    array = np.asarray(value, dtype=np.float64)
    if array.ndim != 1 or array.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D vector")
    if not np.isfinite(array).all():
        raise ValueError(f"{name} contains non-finite values")
    return array


def check_matrix(value, name: str) -> np.ndarray:
    """Coerce to a finite 2-D float matrix."""
    array = np.asarray(value, dtype=np.float64)
    if array.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix")
    if not np.isfinite(array).all():
        raise ValueError(f"{name} contains non-finite values")
    return array


def check_probability(value: float, name: str) -> float:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return float(value)
