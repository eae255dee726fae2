"""Turn raw generated responses into binary decisions plus descriptions.

A response is anomalous when it contains the phrase "anomalous scenes"
and normal when it contains "normal scenes" (case-insensitive; if both
appear the earlier occurrence wins).  Everything else is indeterminate
and resolved by a configurable fallback policy.
"""

from __future__ import annotations

import re
from typing import Sequence

import numpy as np

from .types import SEGMENT, DecisionParse, ScoreSeries, SegmentResponse

ANOMALOUS_MARKER = "anomalous scenes"
NORMAL_MARKER = "normal scenes"

FALLBACK_POLICIES = ("treat_normal", "inherit_previous")

# Separator punctuation tolerated around the marker phrase.
_SEPARATORS = " \t\r\n:–—-"
_MARKER_RE = re.compile(
    f"(?P<anomalous>{re.escape(ANOMALOUS_MARKER)})|(?P<normal>{re.escape(NORMAL_MARKER)})",
    re.IGNORECASE,
)


def parse_decision(raw_text: str) -> DecisionParse:
    """Parse one response into (decision, description).

    The description is the response text minus the matched marker and
    its surrounding separators; with no marker present the decision is
    indeterminate (None) and the description is the full text.
    """
    if not raw_text:
        raise ValueError("raw_text must be non-empty")
    match = _MARKER_RE.search(raw_text)
    if match is None:
        return DecisionParse(decision=None, description=raw_text)
    decision = 1 if match.lastgroup == "anomalous" else 0
    remainder = raw_text[: match.start()] + raw_text[match.end() :].lstrip(_SEPARATORS)
    return DecisionParse(decision=decision, description=remainder.strip(_SEPARATORS))


def parse_all(
    responses: Sequence[SegmentResponse], fallback: str = "treat_normal"
) -> tuple[ScoreSeries, list[str]]:
    """Parse every response of one video, resolving indeterminate decisions.

    ``treat_normal`` maps indeterminate to 0; ``inherit_previous`` copies
    the nearest earlier resolved decision (0 at the start of the video).
    Responses must already be sorted by segment index.
    """
    if not responses:
        raise ValueError("response list must be non-empty")
    if fallback not in FALLBACK_POLICIES:
        raise ValueError(f"unknown fallback policy {fallback!r}")
    decisions = np.zeros(len(responses), dtype=np.float64)
    descriptions: list[str] = []
    previous = 0
    for idx, response in enumerate(responses):
        parsed = parse_decision(response.raw_text)
        descriptions.append(parsed.description)
        if parsed.decision is None:
            resolved = previous if fallback == "inherit_previous" else 0
        else:
            resolved = parsed.decision
            previous = parsed.decision
        decisions[idx] = resolved
    series = ScoreSeries(
        video_id=responses[0].video_id, granularity=SEGMENT, values=decisions
    )
    return series, descriptions
