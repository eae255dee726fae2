"""Core value types passed between pipeline stages.

All types are plain immutable containers; stages never mutate their
inputs, which keeps per-video work safe to run on worker threads.
Frame indices are 1-based inclusive everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import ValidationFailure

SEGMENT = "segment"
FRAME = "frame"


@dataclass(frozen=True)
class SegmentResponse:
    """One raw generated response covering frames [start_frame, end_frame]."""

    video_id: str
    segment_index: int  # 1-based position within the video
    start_frame: int  # 1-based, inclusive
    end_frame: int  # 1-based, inclusive
    raw_text: str

    @property
    def span_length(self) -> int:
        return self.end_frame - self.start_frame + 1


@dataclass(frozen=True)
class EmbeddingBundle:
    """Per-video joint-space embeddings, one row per segment.

    ``vision`` holds the averaged frame features, ``response_text`` the
    encoding of each full raw response, and ``description_text`` the
    encoding of the description portion only.  Matrices are float32,
    shape (M, D), stored exactly as the extractor produced them
    (no normalization; cosine similarity normalizes at use).
    """

    video_id: str
    vision: np.ndarray
    response_text: np.ndarray
    description_text: np.ndarray

    @property
    def num_segments(self) -> int:
        return self.vision.shape[0]

    @property
    def dim(self) -> int:
        return self.vision.shape[1]


@dataclass(frozen=True)
class LabelSeries:
    """Per-frame binary ground truth given as 1-based inclusive ranges."""

    video_id: str
    num_frames: int
    anomalous_ranges: tuple[tuple[int, int], ...]

    def to_frame_labels(self) -> np.ndarray:
        """Expand ranges into a 0/1 vector of length ``num_frames``."""
        labels = np.zeros(self.num_frames, dtype=np.int8)
        for start, end in self.anomalous_ranges:
            labels[start - 1 : end] = 1
        return labels


@dataclass(frozen=True)
class ScoreSeries:
    """Real-valued scores at segment or frame granularity for one video."""

    video_id: str
    granularity: str  # SEGMENT or FRAME
    values: np.ndarray

    def __post_init__(self):
        if self.granularity not in (SEGMENT, FRAME):
            raise ValueError(f"unknown granularity {self.granularity!r}")
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValueError("score series must be one-dimensional")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)


class Issue(NamedTuple):
    severity: str  # "error" or "warning"
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of cross-checking one video's inputs; never raised."""

    video_id: str
    issues: tuple[Issue, ...] = ()

    @property
    def is_fatal(self) -> bool:
        return any(issue.severity == "error" for issue in self.issues)

    def raise_if_fatal(self) -> None:
        if self.is_fatal:
            errors = "; ".join(i.message for i in self.issues if i.severity == "error")
            raise ValidationFailure(f"{self.video_id}: {errors}")


class DecisionParse(NamedTuple):
    """Parsed segment verdict: 1 anomalous, 0 normal, None indeterminate."""

    decision: Optional[int]
    description: str


@dataclass(frozen=True)
class CleaningResult:
    """Outcome of response cleaning for one video.

    ``selected_index[j]`` is the 0-based segment whose response now
    stands in for segment j; decisions and descriptions are taken from
    the selected segment.
    """

    selected_index: np.ndarray
    decisions: ScoreSeries
    descriptions: tuple[str, ...]


@dataclass(frozen=True)
class VideoBundle:
    """Everything the scorer needs for one video."""

    responses: tuple[SegmentResponse, ...]
    embeddings: EmbeddingBundle
    labels: Optional[LabelSeries] = None

    def __post_init__(self):
        object.__setattr__(self, "responses", tuple(self.responses))

    @property
    def video_id(self) -> str:
        return self.embeddings.video_id

    @property
    def num_frames(self) -> int:
        """Frames to score: label length when known, else response coverage."""
        if self.labels is not None:
            return self.labels.num_frames
        return self.responses[-1].end_frame


def segment_spans(num_frames: int, interval: int) -> list[tuple[int, int]]:
    """Fixed-interval segmentation of ``num_frames`` frames.

    Segment j (1-based) covers frames [(j-1)*interval + 1, min(j*interval,
    num_frames)]; only the last segment may be shorter than ``interval``.
    """
    if num_frames < 1:
        raise ValueError("num_frames must be >= 1")
    if interval < 1:
        raise ValueError("interval must be >= 1")
    count = -(-num_frames // interval)
    return [
        ((j - 1) * interval + 1, min(j * interval, num_frames))
        for j in range(1, count + 1)
    ]


def majority_labels(spans: Sequence[tuple[int, int]], labels: LabelSeries) -> np.ndarray:
    """Per-segment majority vote of frame labels; exact ties count as normal."""
    frame_labels = labels.to_frame_labels()
    out = np.zeros(len(spans), dtype=np.int64)
    for idx, (start, end) in enumerate(spans):
        anomalous = int(frame_labels[start - 1 : end].sum())
        if 2 * anomalous > (end - start + 1):
            out[idx] = 1
    return out
