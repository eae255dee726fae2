"""Frame-level AUC-ROC and average precision, per video and pooled.

AUC follows the Mann-Whitney definition: the fraction of
(anomalous, normal) frame pairs ranked correctly, with tied pairs worth
half credit, computed by average ranks in one sort.  AP accumulates
precision over descending-score prefixes, processing equal scores as
one block.  Dataset metrics use micro aggregation: all frames of all
videos are pooled before a single metric is computed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import UndefinedMetricError
from .types import FRAME, LabelSeries, ScoreSeries


@dataclass(frozen=True)
class DatasetMetrics:
    auc_roc: float
    average_precision: float
    num_frames: int
    num_positive: int
    per_video: Optional[dict[str, Optional[tuple[float, float]]]] = None

    def to_json_dict(self) -> dict:
        payload: dict = {
            "auc_roc": self.auc_roc,
            "average_precision": self.average_precision,
            "num_frames": self.num_frames,
            "num_positive": self.num_positive,
        }
        if self.per_video is not None:
            payload["per_video"] = {
                video_id: (
                    None
                    if pair is None
                    else {"auc_roc": pair[0], "average_precision": pair[1]}
                )
                for video_id, pair in self.per_video.items()
            }
        return payload


def _aligned_arrays(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    score_values = scores.values if isinstance(scores, ScoreSeries) else np.asarray(
        scores, dtype=np.float64
    )
    if isinstance(labels, LabelSeries):
        label_values = labels.to_frame_labels()
    else:
        label_values = np.asarray(labels, dtype=np.int8)
    if score_values.shape != label_values.shape:
        raise ValueError(
            f"scores ({score_values.shape[0]}) and labels ({label_values.shape[0]}) "
            "differ in length"
        )
    if not np.isfinite(score_values).all():
        raise ValueError("scores contain non-finite values")
    return score_values, label_values


def auc_roc(scores, labels) -> float:
    """Probability a random anomalous frame outranks a random normal one.

    Computed from tie-averaged ranks, which is contractually identical
    to counting ordered pairs with half credit for ties.
    """
    score_values, label_values = _aligned_arrays(scores, labels)
    positives = int(label_values.sum())
    negatives = len(label_values) - positives
    if positives == 0 or negatives == 0:
        raise UndefinedMetricError(
            "AUC-ROC needs both classes; got a single-class label vector"
        )
    ranks = _average_ranks(score_values)
    positive_rank_sum = float(ranks[label_values == 1].sum())
    return (positive_rank_sum - positives * (positives + 1) / 2.0) / (
        positives * negatives
    )


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks, ascending, with tied values sharing their mean rank."""
    _, inverse, counts = np.unique(values, return_inverse=True, return_counts=True)
    block_starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    mean_rank = block_starts + (counts + 1) / 2.0
    return mean_rank[inverse]


def average_precision(scores, labels) -> float:
    """Area under the precision-recall curve via prefix precisions.

    Equal scores form one block: precision and recall move only at
    block boundaries, and each recall increment earns the precision of
    its full prefix.
    """
    score_values, label_values = _aligned_arrays(scores, labels)
    positives = int(label_values.sum())
    if positives == 0:
        raise UndefinedMetricError("average precision needs at least one positive frame")
    order = np.argsort(-score_values, kind="stable")
    sorted_scores = score_values[order]
    sorted_labels = label_values[order].astype(np.float64)
    is_block_end = np.concatenate((np.diff(sorted_scores) != 0, [True]))
    block_ends = np.flatnonzero(is_block_end)
    true_positives = np.cumsum(sorted_labels)[block_ends]
    retrieved = block_ends + 1.0
    precision = true_positives / retrieved
    recall = true_positives / positives
    recall_steps = np.diff(np.concatenate(([0.0], recall)))
    return float(np.sum(recall_steps * precision))


def aggregate_dataset(
    per_video: Sequence[tuple[ScoreSeries, LabelSeries]]
) -> DatasetMetrics:
    """Micro-aggregate: pool every frame across videos, then compute once.

    Per-video metrics are reported wherever that video has both classes;
    single-class videos are marked absent (None).
    """
    if not per_video:
        raise ValueError("per_video must be non-empty")
    pooled_scores: list[np.ndarray] = []
    pooled_labels: list[np.ndarray] = []
    video_metrics: dict[str, Optional[tuple[float, float]]] = {}
    for scores, labels in per_video:
        if scores.granularity != FRAME:
            raise ValueError(f"{scores.video_id}: expected frame-level scores")
        score_values, label_values = _aligned_arrays(scores, labels)
        pooled_scores.append(score_values)
        pooled_labels.append(label_values)
        positives = int(label_values.sum())
        if 0 < positives < len(label_values):
            video_metrics[labels.video_id] = (
                auc_roc(score_values, label_values),
                average_precision(score_values, label_values),
            )
        else:
            video_metrics[labels.video_id] = None
    all_scores = np.concatenate(pooled_scores)
    all_labels = np.concatenate(pooled_labels)
    positives = int(all_labels.sum())
    if positives == 0 or positives == len(all_labels):
        raise UndefinedMetricError("pooled frames contain a single class")
    return DatasetMetrics(
        auc_roc=auc_roc(all_scores, all_labels),
        average_precision=average_precision(all_scores, all_labels),
        num_frames=int(len(all_labels)),
        num_positive=positives,
        per_video=video_metrics,
    )
