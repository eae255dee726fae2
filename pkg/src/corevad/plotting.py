"""Score-timeline exports: CSV, a self-contained SVG, and annotations.

The SVG is written directly (no plotting library) so identical inputs
always produce identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Sequence

from .types import FRAME, LabelSeries, ScoreSeries

_WIDTH, _HEIGHT = 960, 280
_MARGIN_LEFT, _MARGIN_RIGHT, _MARGIN_TOP, _MARGIN_BOTTOM = 56, 16, 16, 40


def emit_plot_data(
    scores: ScoreSeries,
    labels: Optional[LabelSeries],
    descriptions: Sequence[str],
    out_dir: str | Path,
    spans: Optional[Sequence[tuple[int, int]]] = None,
) -> dict[str, Path]:
    """Write the per-frame CSV, SVG timeline, and annotation sidecar.

    Returns the written paths keyed by kind (csv, svg, annotations).
    Ground-truth ranges are shaded in the SVG when labels are given;
    ``spans`` attaches frame ranges to the per-segment descriptions.
    """
    if scores.granularity != FRAME:
        raise ValueError("plot data requires frame-level scores")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = scores.video_id

    csv_path = out_dir / f"{stem}.csv"
    _write_csv(csv_path, scores, labels)
    svg_path = out_dir / f"{stem}.svg"
    svg_path.write_text(_render_svg(scores, labels), encoding="utf-8")
    annotations_path = out_dir / f"{stem}.annotations.json"
    _write_annotations(annotations_path, stem, descriptions, spans)
    return {"csv": csv_path, "svg": svg_path, "annotations": annotations_path}


def _write_csv(path: Path, scores: ScoreSeries, labels: Optional[LabelSeries]) -> None:
    frame_labels = labels.to_frame_labels() if labels is not None else None
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("frame_index,score,label\n")
        for idx, value in enumerate(scores.values, start=1):
            label = "" if frame_labels is None else str(int(frame_labels[idx - 1]))
            handle.write(f"{idx},{float(value)!r},{label}\n")


def _write_annotations(
    path: Path,
    video_id: str,
    descriptions: Sequence[str],
    spans: Optional[Sequence[tuple[int, int]]],
) -> None:
    segments = []
    for idx, description in enumerate(descriptions):
        entry: dict = {"segment_index": idx + 1, "description": description}
        if spans is not None and idx < len(spans):
            entry["start_frame"], entry["end_frame"] = int(spans[idx][0]), int(spans[idx][1])
        segments.append(entry)
    payload = {"video_id": video_id, "segments": segments}
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(payload, handle, indent=2, ensure_ascii=False)
        handle.write("\n")


def _render_svg(scores: ScoreSeries, labels: Optional[LabelSeries]) -> str:
    values = scores.values
    num_frames = len(values)
    lo = min(0.0, float(values.min()))
    hi = max(1.0, float(values.max()))
    plot_w = _WIDTH - _MARGIN_LEFT - _MARGIN_RIGHT
    plot_h = _HEIGHT - _MARGIN_TOP - _MARGIN_BOTTOM

    def x(frame: float) -> float:
        if num_frames == 1:
            return _MARGIN_LEFT + plot_w / 2
        return _MARGIN_LEFT + (frame - 1) / (num_frames - 1) * plot_w

    def y(score: float) -> float:
        return _MARGIN_TOP + (hi - score) / (hi - lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    if labels is not None:
        for start, end in labels.anomalous_ranges:
            x0, x1 = x(start), x(end)
            parts.append(
                f'<rect x="{x0:.2f}" y="{_MARGIN_TOP}" width="{max(x1 - x0, 1.0):.2f}" '
                f'height="{plot_h}" fill="#f4a6b8" fill-opacity="0.45"/>'
            )
    axis_color = "#444444"
    parts.append(
        f'<line x1="{_MARGIN_LEFT}" y1="{_MARGIN_TOP}" x2="{_MARGIN_LEFT}" '
        f'y2="{_MARGIN_TOP + plot_h}" stroke="{axis_color}"/>'
    )
    parts.append(
        f'<line x1="{_MARGIN_LEFT}" y1="{_MARGIN_TOP + plot_h}" '
        f'x2="{_MARGIN_LEFT + plot_w}" y2="{_MARGIN_TOP + plot_h}" stroke="{axis_color}"/>'
    )
    for tick in (lo, (lo + hi) / 2, hi):
        ty = y(tick)
        parts.append(
            f'<text x="{_MARGIN_LEFT - 8}" y="{ty:.2f}" text-anchor="end" '
            f'dominant-baseline="middle" font-size="11" fill="{axis_color}">{tick:.2f}</text>'
        )
    for tick in sorted({1, max(1, num_frames // 2), num_frames}):
        parts.append(
            f'<text x="{x(tick):.2f}" y="{_HEIGHT - 14}" text-anchor="middle" '
            f'font-size="11" fill="{axis_color}">{tick}</text>'
        )
    points = " ".join(
        f"{x(idx + 1):.2f},{y(float(value)):.2f}" for idx, value in enumerate(values)
    )
    parts.append(
        f'<polyline points="{points}" fill="none" stroke="#1f5fbf" stroke-width="1.5"/>'
    )
    parts.append(
        f'<text x="{_MARGIN_LEFT}" y="{_HEIGHT - 2}" font-size="11" fill="{axis_color}">'
        f"frame index</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
