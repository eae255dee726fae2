"""Pipeline configuration: defaults, YAML loading, and CLI overrides.

The file mirrors the config tree one-to-one; command-line flags take
precedence over file values, and the fully resolved tree is written
into every run artifact so reruns are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Optional

import yaml

from .detector import AnomalyScorer
from .errors import FormatError
from .formats import GT_FORMATS


@dataclass(frozen=True)
class ParseConfig:
    fallback: str = "treat_normal"


@dataclass(frozen=True)
class CleanConfig:
    strategy: str = "lrc"
    l: int = 1


@dataclass(frozen=True)
class RefineToggles:
    use_context_refine: bool = True
    use_smoothing: bool = True
    use_position_weight: bool = True


@dataclass(frozen=True)
class RefineConfig:
    tau: float = 0.05
    kernel_radius: int = 9
    sigma1: float = 5.0
    sigma2_mode: str = "squared"
    sigma2: Optional[float] = None  # None means "auto": floor(F / 2) per video
    context_mode: str = "weighted"
    toggles: RefineToggles = field(default_factory=RefineToggles)


@dataclass(frozen=True)
class PathsConfig:
    responses: Optional[str] = None
    embeddings: Optional[str] = None
    ground_truth: Optional[str] = None
    ground_truth_format: str = "normalized"
    output: Optional[str] = None


@dataclass(frozen=True)
class PipelineConfig:
    d: int = 30  # segment interval in frames
    n: int = 8  # frames sampled per segment (extractor provenance)
    workers: int = 4
    parse: ParseConfig = field(default_factory=ParseConfig)
    clean: CleanConfig = field(default_factory=CleanConfig)
    refine: RefineConfig = field(default_factory=RefineConfig)
    paths: PathsConfig = field(default_factory=PathsConfig)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.paths.ground_truth_format not in GT_FORMATS:
            raise ValueError(
                f"unknown ground-truth format {self.paths.ground_truth_format!r}"
            )

    def to_scorer(self) -> AnomalyScorer:
        return AnomalyScorer(
            fallback=self.parse.fallback,
            strategy=self.clean.strategy,
            l=self.clean.l,
            use_context_refine=self.refine.toggles.use_context_refine,
            tau=self.refine.tau,
            context_mode=self.refine.context_mode,
            use_smoothing=self.refine.toggles.use_smoothing,
            kernel_radius=self.refine.kernel_radius,
            sigma1=self.refine.sigma1,
            use_position_weight=self.refine.toggles.use_position_weight,
            sigma2_mode=self.refine.sigma2_mode,
            sigma2=self.refine.sigma2,
        )

    def to_dict(self) -> dict:
        """Resolved snapshot, suitable for YAML dumping."""
        return {
            "d": self.d,
            "n": self.n,
            "workers": self.workers,
            "parse": {"fallback": self.parse.fallback},
            "clean": {"strategy": self.clean.strategy, "l": self.clean.l},
            "refine": {
                "tau": self.refine.tau,
                "kernel_radius": self.refine.kernel_radius,
                "sigma1": self.refine.sigma1,
                "sigma2_mode": self.refine.sigma2_mode,
                "sigma2": "auto" if self.refine.sigma2 is None else self.refine.sigma2,
                "context_mode": self.refine.context_mode,
                "toggles": {
                    "use_context_refine": self.refine.toggles.use_context_refine,
                    "use_smoothing": self.refine.toggles.use_smoothing,
                    "use_position_weight": self.refine.toggles.use_position_weight,
                },
            },
            "paths": {
                "responses": self.paths.responses,
                "embeddings": self.paths.embeddings,
                "ground_truth": self.paths.ground_truth,
                "ground_truth_format": self.paths.ground_truth_format,
                "output": self.paths.output,
            },
        }

    def with_paths(self, **updates) -> "PipelineConfig":
        """Apply non-None path overrides (CLI flags beat file values)."""
        filtered = {key: value for key, value in updates.items() if value is not None}
        return replace(self, paths=replace(self.paths, **filtered))


def config_from_mapping(tree: Mapping[str, Any]) -> PipelineConfig:
    """Build a config from a nested mapping, rejecting unknown keys."""
    tree = dict(tree or {})
    parse_tree = _section(tree, "parse")
    clean_tree = _section(tree, "clean")
    refine_tree = _section(tree, "refine")
    toggles_tree = _section(refine_tree, "toggles")
    paths_tree = _section(tree, "paths")

    sigma2 = refine_tree.pop("sigma2", None)
    if isinstance(sigma2, str):
        if sigma2 != "auto":
            raise FormatError(f"refine.sigma2 must be a number or 'auto', got {sigma2!r}")
        sigma2 = None

    config = PipelineConfig(
        d=int(tree.pop("d", 30)),
        n=int(tree.pop("n", 8)),
        workers=int(tree.pop("workers", 4)),
        parse=ParseConfig(fallback=parse_tree.pop("fallback", "treat_normal")),
        clean=CleanConfig(
            strategy=clean_tree.pop("strategy", "lrc"),
            l=int(clean_tree.pop("l", 1)),
        ),
        refine=RefineConfig(
            tau=float(refine_tree.pop("tau", 0.05)),
            kernel_radius=int(refine_tree.pop("kernel_radius", 9)),
            sigma1=float(refine_tree.pop("sigma1", 5.0)),
            sigma2_mode=refine_tree.pop("sigma2_mode", "squared"),
            sigma2=None if sigma2 is None else float(sigma2),
            context_mode=refine_tree.pop("context_mode", "weighted"),
            toggles=RefineToggles(
                use_context_refine=bool(toggles_tree.pop("use_context_refine", True)),
                use_smoothing=bool(toggles_tree.pop("use_smoothing", True)),
                use_position_weight=bool(toggles_tree.pop("use_position_weight", True)),
            ),
        ),
        paths=PathsConfig(
            responses=paths_tree.pop("responses", None),
            embeddings=paths_tree.pop("embeddings", None),
            ground_truth=paths_tree.pop("ground_truth", None),
            ground_truth_format=paths_tree.pop("ground_truth_format", "normalized"),
            output=paths_tree.pop("output", None),
        ),
    )
    for name, leftover in (
        ("", tree), ("parse.", parse_tree), ("clean.", clean_tree),
        ("refine.", refine_tree), ("refine.toggles.", toggles_tree), ("paths.", paths_tree),
    ):
        if leftover:
            unknown = ", ".join(f"{name}{key}" for key in sorted(leftover))
            raise FormatError(f"unknown config keys: {unknown}")
    return config


def load_config(path: str | Path) -> PipelineConfig:
    """Load a YAML config file."""
    with open(path, "r", encoding="utf-8") as handle:
        try:
            tree = yaml.safe_load(handle)
        except yaml.YAMLError as exc:
            raise FormatError(f"{path}: invalid YAML ({exc})") from exc
    if tree is None:
        tree = {}
    if not isinstance(tree, dict):
        raise FormatError(f"{path}: config root must be a mapping")
    return config_from_mapping(tree)


def dump_config(config: PipelineConfig) -> str:
    """Canonical YAML snapshot of a resolved config."""
    return yaml.safe_dump(config.to_dict(), sort_keys=True, default_flow_style=False)


def _section(tree: dict, key: str) -> dict:
    value = tree.pop(key, {}) or {}
    if not isinstance(value, dict):
        raise FormatError(f"config section {key!r} must be a mapping")
    return dict(value)
