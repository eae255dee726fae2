"""Scikit-learn style front end for the scoring chain.

The scorer is training-free, so ``fit`` only validates parameters and
returns self; all work happens in ``transform``, which maps per-video
bundles to frame-level anomaly scores.  Inheriting ``BaseEstimator``
keeps ``get_params`` / ``set_params`` / ``clone`` working, so the scorer
drops into parameter sweeps like any other estimator.
"""

from __future__ import annotations

from typing import Iterable

from sklearn.base import BaseEstimator, TransformerMixin

from .cleaning import STRATEGIES, clean_responses
from .parsing import FALLBACK_POLICIES, parse_all
from .refine import RefineParams, refine_chain
from .types import ScoreSeries, VideoBundle
from .validation import validate_bundle


class AnomalyScorer(BaseEstimator, TransformerMixin):
    """Transform segment responses and embeddings into frame anomaly scores.

    Parameters mirror the pipeline configuration: ``fallback`` resolves
    indeterminate parses, ``strategy``/``l`` control response cleaning,
    and the remaining knobs drive the refinement chain.  ``sigma2=None``
    selects floor(F / 2) per video.
    """

    def __init__(
        self,
        fallback: str = "treat_normal",
        strategy: str = "lrc",
        l: int = 1,
        use_context_refine: bool = True,
        tau: float = 0.05,
        context_mode: str = "weighted",
        use_smoothing: bool = True,
        kernel_radius: int = 9,
        sigma1: float = 5.0,
        use_position_weight: bool = True,
        sigma2_mode: str = "squared",
        sigma2: float | None = None,
    ):
        self.fallback = fallback
        self.strategy = strategy
        self.l = l
        self.use_context_refine = use_context_refine
        self.tau = tau
        self.context_mode = context_mode
        self.use_smoothing = use_smoothing
        self.kernel_radius = kernel_radius
        self.sigma1 = sigma1
        self.use_position_weight = use_position_weight
        self.sigma2_mode = sigma2_mode
        self.sigma2 = sigma2

    def _check_params(self) -> RefineParams:
        if self.fallback not in FALLBACK_POLICIES:
            raise ValueError(f"unknown fallback policy {self.fallback!r}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown cleaning strategy {self.strategy!r}")
        if self.l < 0:
            raise ValueError("l must be >= 0")
        return RefineParams(
            tau=self.tau,
            kernel_radius=self.kernel_radius,
            sigma1=self.sigma1,
            sigma2_mode=self.sigma2_mode,
            sigma2=self.sigma2,
            context_mode=self.context_mode,
            use_context_refine=self.use_context_refine,
            use_smoothing=self.use_smoothing,
            use_position_weight=self.use_position_weight,
        )

    def fit(self, X=None, y=None):
        """No-op; the scorer is training-free.  Validates parameters."""
        self._check_params()
        return self

    def transform(self, X: Iterable[VideoBundle]) -> list[ScoreSeries]:
        """Score a collection of video bundles."""
        return [self.score_video(bundle) for bundle in X]

    def score_video(self, bundle: VideoBundle) -> ScoreSeries:
        """Score one video end to end."""
        params = self._check_params()
        validate_bundle(bundle.responses, bundle.embeddings, bundle.labels).raise_if_fatal()
        parsed = parse_all(bundle.responses, fallback=self.fallback)
        cleaned = clean_responses(
            parsed, bundle.responses, bundle.embeddings, self.strategy, self.l
        )
        return refine_chain(
            cleaned, bundle.embeddings, params, bundle.responses, bundle.num_frames
        )
