"""Turn cleaned segment decisions into frame-level anomaly scores.

The chain has four stages, each individually toggleable:

1. context refinement: each segment's score becomes a softmax-weighted
   average of every segment's cleaned decision, weighted by the cosine
   similarity between this segment's vision feature and each cleaned
   description embedding (temperature ``tau``);
2. smoothing: 1-D convolution with a unit-sum Gaussian kernel under
   edge-replication padding;
3. expansion: each frame inherits its segment's score, with trailing
   uncovered frames taking the last segment's value;
4. position weighting: frame scores are multiplied by a center-peaked
   Gaussian profile over the video timeline.

``context_mode="literal"`` keeps the cleaned decisions untouched in
stage 1: weighting a segment's own score by weights that sum to one is
an identity, and the mode is retained so that reading is auditable.
``sigma2_mode`` picks whether the position-weight spread parameter acts
as a standard deviation ("squared", the default) or divides the squared
distance directly ("literal"); the literal reading sends edge weights of
long videos to zero, so it also stays behind the flag.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .cleaning import cosine_matrix
from .types import (
    FRAME,
    SEGMENT,
    CleaningResult,
    EmbeddingBundle,
    ScoreSeries,
    SegmentResponse,
)

CONTEXT_MODES = ("weighted", "literal")
SIGMA2_MODES = ("squared", "literal")


@dataclass(frozen=True)
class RefineParams:
    """Hyperparameters and stage toggles for the refinement chain."""

    tau: float = 0.05
    kernel_radius: int = 9
    sigma1: float = 5.0
    sigma2_mode: str = "squared"
    sigma2: Optional[float] = None  # None selects floor(F / 2) at apply time
    context_mode: str = "weighted"
    use_context_refine: bool = True
    use_smoothing: bool = True
    use_position_weight: bool = True

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be > 0")
        if self.kernel_radius < 1:
            raise ValueError("kernel_radius must be >= 1")
        if self.sigma1 <= 0:
            raise ValueError("sigma1 must be > 0")
        if self.sigma2 is not None and self.sigma2 <= 0:
            raise ValueError("sigma2 must be > 0")
        if self.sigma2_mode not in SIGMA2_MODES:
            raise ValueError(f"unknown sigma2_mode {self.sigma2_mode!r}")
        if self.context_mode not in CONTEXT_MODES:
            raise ValueError(f"unknown context_mode {self.context_mode!r}")


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, stabilized by max subtraction."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    weights = np.exp(shifted)
    weights /= weights.sum(axis=1, keepdims=True)
    return weights


def visual_semantic_refine(
    cleaned: CleaningResult,
    embeddings: EmbeddingBundle,
    tau: float,
    mode: str = "weighted",
) -> ScoreSeries:
    """Mix cleaned decisions across the video by vision-description affinity.

    Row j of the weight matrix is softmax_i(cos(v_j, t_i) / tau) where
    t_i is the description embedding selected for segment i during
    cleaning; the refined score is the weighted sum of all cleaned
    decisions, a convex combination that lands in [0, 1] for binary
    inputs.
    """
    if tau <= 0:
        raise ValueError("tau must be > 0")
    if mode not in CONTEXT_MODES:
        raise ValueError(f"unknown context mode {mode!r}")
    decisions = cleaned.decisions
    if len(decisions.values) == 0:
        raise ValueError("empty score series")
    if mode == "literal":
        return ScoreSeries(
            video_id=decisions.video_id,
            granularity=SEGMENT,
            values=decisions.values.copy(),
        )
    selected_descriptions = embeddings.description_text[cleaned.selected_index]
    similarity = cosine_matrix(embeddings.vision, selected_descriptions)
    weights = softmax_rows(similarity / tau)
    return ScoreSeries(
        video_id=decisions.video_id,
        granularity=SEGMENT,
        values=weights @ decisions.values,
    )


def gaussian_kernel(radius: int, sigma: float) -> np.ndarray:
    """Unit-sum Gaussian taps exp(-p^2 / (2 sigma^2)) for p in [-radius, radius]."""
    if radius < 1:
        raise ValueError("kernel radius must be >= 1")
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    taps = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    return taps / taps.sum()


def gaussian_smooth(scores: ScoreSeries, kernel_radius: int, sigma1: float) -> ScoreSeries:
    """Smooth a segment series by Gaussian convolution, edge values replicated."""
    values = scores.values
    if len(values) == 0:
        raise ValueError("empty score series")
    kernel = gaussian_kernel(kernel_radius, sigma1)
    # convolving the residual around an anchor keeps constant series
    # bit-exact despite the kernel sum rounding away from 1.0
    anchor = values[0]
    padded = np.pad(values - anchor, kernel_radius, mode="edge")
    smoothed = np.convolve(padded, kernel, mode="valid") + anchor
    return ScoreSeries(
        video_id=scores.video_id, granularity=scores.granularity, values=smoothed
    )


def expand_to_frames(
    scores: ScoreSeries, responses: Sequence[SegmentResponse], num_frames: int
) -> ScoreSeries:
    """Assign each frame its segment's score.

    Frames past the last covered span (present when annotations run
    longer than the responses) inherit the last segment's value.
    """
    if len(scores.values) != len(responses):
        raise ValueError("scores and responses disagree on segment count")
    last_covered = responses[-1].end_frame
    if num_frames < last_covered:
        raise ValueError(
            f"num_frames {num_frames} is smaller than the covered frame {last_covered}"
        )
    frame_values = np.empty(num_frames, dtype=np.float64)
    for value, response in zip(scores.values, responses):
        frame_values[response.start_frame - 1 : response.end_frame] = value
    frame_values[last_covered:] = scores.values[-1]
    return ScoreSeries(video_id=scores.video_id, granularity=FRAME, values=frame_values)


def position_weight(
    scores: ScoreSeries, sigma2_mode: str = "squared", sigma2: Optional[float] = None
) -> ScoreSeries:
    """Multiply frame scores by a Gaussian profile centered mid-video.

    The center frame c = floor(F / 2) always has weight exactly 1.
    ``sigma2`` defaults to floor(F / 2).  In squared mode the weight is
    exp(-(i - c)^2 / (2 sigma2^2)); literal mode drops the square on
    sigma2.
    """
    if sigma2_mode not in SIGMA2_MODES:
        raise ValueError(f"unknown sigma2_mode {sigma2_mode!r}")
    num_frames = len(scores.values)
    if num_frames < 1:
        raise ValueError("empty score series")
    center = num_frames // 2
    spread = float(num_frames // 2) if sigma2 is None else float(sigma2)
    if spread <= 0:
        raise ValueError("sigma2 must be > 0")
    indices = np.arange(1, num_frames + 1, dtype=np.float64)
    squared_distance = (indices - center) ** 2
    denominator = 2.0 * spread * spread if sigma2_mode == "squared" else 2.0 * spread
    weights = np.exp(-squared_distance / denominator)
    return ScoreSeries(
        video_id=scores.video_id, granularity=FRAME, values=weights * scores.values
    )


def refine_chain(
    cleaned: CleaningResult,
    embeddings: EmbeddingBundle,
    params: RefineParams,
    responses: Sequence[SegmentResponse],
    num_frames: int,
) -> ScoreSeries:
    """Run the enabled refinement stages and return frame-level scores."""
    if params.use_context_refine:
        segment_scores = visual_semantic_refine(
            cleaned, embeddings, params.tau, params.context_mode
        )
    else:
        segment_scores = cleaned.decisions
    if params.use_smoothing:
        segment_scores = gaussian_smooth(
            segment_scores, params.kernel_radius, params.sigma1
        )
    frame_scores = expand_to_frames(segment_scores, responses, num_frames)
    if params.use_position_weight:
        frame_scores = position_weight(frame_scores, params.sigma2_mode, params.sigma2)
    return frame_scores
