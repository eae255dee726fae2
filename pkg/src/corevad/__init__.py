"""Training-free video anomaly score refinement and evaluation."""

__version__ = "0.1.0"

from .cleaning import clean_global, clean_lrc, clean_responses, cosine_similarity
from .detector import AnomalyScorer
from .errors import CorevadError, FormatError, UndefinedMetricError, ValidationFailure
from .formats import (
    load_embeddings,
    load_ground_truth,
    load_responses,
    write_embeddings,
    write_ground_truth,
    write_responses,
)
from .metrics import DatasetMetrics, aggregate_dataset, auc_roc, average_precision
from .parsing import parse_all, parse_decision
from .refine import (
    RefineParams,
    expand_to_frames,
    gaussian_smooth,
    position_weight,
    refine_chain,
    visual_semantic_refine,
)
from .synthetic import SyntheticSpec, generate_synthetic_fixture
from .types import (
    CleaningResult,
    DecisionParse,
    EmbeddingBundle,
    LabelSeries,
    ScoreSeries,
    SegmentResponse,
    ValidationReport,
    VideoBundle,
)
from .validation import validate_bundle

__all__ = [
    "AnomalyScorer",
    "CleaningResult",
    "CorevadError",
    "DatasetMetrics",
    "DecisionParse",
    "EmbeddingBundle",
    "FormatError",
    "LabelSeries",
    "RefineParams",
    "ScoreSeries",
    "SegmentResponse",
    "SyntheticSpec",
    "UndefinedMetricError",
    "ValidationFailure",
    "ValidationReport",
    "VideoBundle",
    "aggregate_dataset",
    "auc_roc",
    "average_precision",
    "clean_global",
    "clean_lrc",
    "clean_responses",
    "cosine_similarity",
    "expand_to_frames",
    "gaussian_smooth",
    "generate_synthetic_fixture",
    "load_embeddings",
    "load_ground_truth",
    "load_responses",
    "parse_all",
    "parse_decision",
    "position_weight",
    "refine_chain",
    "validate_bundle",
    "visual_semantic_refine",
    "write_embeddings",
    "write_ground_truth",
    "write_responses",
]
