"""Readers and writers for the pipeline's on-disk inputs.

Three formats are handled here:

* responses: UTF-8 JSONL, one object per segment with keys exactly
  ``video_id``, ``segment_index``, ``start_frame``, ``end_frame``,
  ``raw_text``.
* embeddings: little-endian binary, one video per file.  Layout: magic
  ``CRVB`` (4 ASCII bytes), version u32 (currently 1), video-id length
  u16 followed by the UTF-8 bytes, dim u32, rows u32, then exactly three
  sections.  Each section is a tag byte (0 vision, 1 response text,
  2 description text, in that order) followed by rows*dim float32 values
  row-major.
* ground truth: either the normalized JSON form of
  :class:`~corevad.types.LabelSeries`, or the UCF-Crime / XD-Violence
  temporal annotation text formats behind a format flag.

Loaders are pure: the same file bytes always produce the same values.
Decoding problems raise :class:`FormatError`; decoded content that
violates an invariant raises :class:`ValidationFailure`.
"""

from __future__ import annotations

import io
import json
import struct
from pathlib import Path, PurePosixPath
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import FormatError, ValidationFailure
from .types import EmbeddingBundle, LabelSeries, SegmentResponse

MAGIC = b"CRVB"
VERSION = 1
_SECTION_TAGS = (0, 1, 2)  # vision, response_text, description_text

RESPONSE_KEYS = ("video_id", "segment_index", "start_frame", "end_frame", "raw_text")

GT_FORMATS = ("normalized", "ucf_crime_txt", "xd_violence_txt")


# ---------------------------------------------------------------------------
# responses (JSONL)


def load_responses(
    path: str | Path, segment_interval: Optional[int] = None
) -> dict[str, list[SegmentResponse]]:
    """Load segment responses grouped by video, sorted by segment index.

    When ``segment_interval`` is given, every span except a video's last
    must cover exactly that many frames and none may exceed it.
    """
    records: list[SegmentResponse] = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{line_no}: malformed JSON ({exc.msg})") from exc
            records.append(_response_from_object(obj, f"{path}:{line_no}"))
    grouped: dict[str, list[SegmentResponse]] = {}
    for record in records:
        grouped.setdefault(record.video_id, []).append(record)
    for video_id in grouped:
        grouped[video_id].sort(key=lambda r: r.segment_index)
        _check_video_responses(grouped[video_id], segment_interval)
    return grouped


def _response_from_object(obj: object, where: str) -> SegmentResponse:
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected a JSON object")
    if set(obj) != set(RESPONSE_KEYS):
        raise FormatError(
            f"{where}: keys must be exactly {sorted(RESPONSE_KEYS)}, got {sorted(obj)}"
        )
    if not isinstance(obj["video_id"], str) or not isinstance(obj["raw_text"], str):
        raise FormatError(f"{where}: video_id and raw_text must be strings")
    for key in ("segment_index", "start_frame", "end_frame"):
        if not isinstance(obj[key], int) or isinstance(obj[key], bool):
            raise FormatError(f"{where}: {key} must be an integer")
    return SegmentResponse(
        video_id=obj["video_id"],
        segment_index=obj["segment_index"],
        start_frame=obj["start_frame"],
        end_frame=obj["end_frame"],
        raw_text=obj["raw_text"],
    )


def _check_video_responses(
    responses: Sequence[SegmentResponse], segment_interval: Optional[int]
) -> None:
    video_id = responses[0].video_id
    seen: set[int] = set()
    for record in responses:
        if record.segment_index in seen:
            raise ValidationFailure(
                f"{video_id}: duplicate segment_index {record.segment_index}"
            )
        seen.add(record.segment_index)
        if record.segment_index < 1:
            raise ValidationFailure(f"{video_id}: segment_index must be >= 1")
        if record.start_frame < 1 or record.start_frame > record.end_frame:
            raise ValidationFailure(
                f"{video_id}: segment {record.segment_index} has invalid span "
                f"{record.start_frame}..{record.end_frame}"
            )
        if not record.raw_text:
            raise ValidationFailure(
                f"{video_id}: segment {record.segment_index} has empty raw_text"
            )
    if responses[0].segment_index != 1 or responses[0].start_frame != 1:
        raise ValidationFailure(f"{video_id}: segments must start at index 1, frame 1")
    for prev, cur in zip(responses, responses[1:]):
        if cur.segment_index != prev.segment_index + 1:
            raise ValidationFailure(
                f"{video_id}: segment indices skip from {prev.segment_index} "
                f"to {cur.segment_index}"
            )
        if cur.start_frame != prev.end_frame + 1:
            raise ValidationFailure(
                f"{video_id}: spans are not contiguous at segment {cur.segment_index}"
            )
    if segment_interval is not None:
        for record in responses[:-1]:
            if record.span_length != segment_interval:
                raise ValidationFailure(
                    f"{video_id}: segment {record.segment_index} covers "
                    f"{record.span_length} frames, expected {segment_interval}"
                )
        if responses[-1].span_length > segment_interval:
            raise ValidationFailure(
                f"{video_id}: last segment exceeds the interval {segment_interval}"
            )


def write_responses(path: str | Path, responses: Iterable[SegmentResponse]) -> None:
    """Write responses as JSONL with the canonical key order."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in responses:
            obj = {
                "video_id": record.video_id,
                "segment_index": record.segment_index,
                "start_frame": record.start_frame,
                "end_frame": record.end_frame,
                "raw_text": record.raw_text,
            }
            handle.write(json.dumps(obj, ensure_ascii=False) + "\n")


# ---------------------------------------------------------------------------
# embeddings (binary)


def load_embeddings(path: str | Path) -> EmbeddingBundle:
    """Load one video's embedding matrices from the binary format."""
    with open(path, "rb") as handle:
        data = handle.read()
    return decode_embeddings(data, where=str(path))


def decode_embeddings(data: bytes, where: str = "<bytes>") -> EmbeddingBundle:
    reader = _ByteReader(data, where)
    magic = reader.read(4)
    if magic != MAGIC:
        raise FormatError(f"{where}: bad magic {magic!r}")
    version = reader.u32()
    if version != VERSION:
        raise FormatError(f"{where}: unsupported version {version}")
    video_id = reader.read(reader.u16()).decode("utf-8")
    dim = reader.u32()
    rows = reader.u32()
    if dim < 1:
        raise FormatError(f"{where}: dim must be >= 1")
    sections: list[np.ndarray] = []
    for expected_tag in _SECTION_TAGS:
        tag = reader.u8()
        if tag != expected_tag:
            raise FormatError(f"{where}: expected section tag {expected_tag}, got {tag}")
        raw = reader.read(rows * dim * 4)
        matrix = np.frombuffer(raw, dtype="<f4").reshape(rows, dim)
        sections.append(matrix)
    if reader.remaining():
        raise FormatError(f"{where}: {reader.remaining()} trailing bytes after sections")
    for name, matrix in zip(("vision", "response_text", "description_text"), sections):
        if not np.isfinite(matrix).all():
            raise ValidationFailure(f"{where}: non-finite values in {name} section")
        norms = np.linalg.norm(matrix.astype(np.float64), axis=1)
        if rows and not (norms > 0).all():
            bad = int(np.argmin(norms))
            raise ValidationFailure(f"{where}: zero-norm row {bad} in {name} section")
    return EmbeddingBundle(
        video_id=video_id,
        vision=sections[0],
        response_text=sections[1],
        description_text=sections[2],
    )


def encode_embeddings(bundle: EmbeddingBundle) -> bytes:
    """Serialize a bundle; the byte-exact inverse of :func:`decode_embeddings`."""
    matrices = (bundle.vision, bundle.response_text, bundle.description_text)
    rows, dim = matrices[0].shape
    for matrix in matrices:
        if matrix.shape != (rows, dim):
            raise ValidationFailure(
                f"{bundle.video_id}: embedding sections disagree on shape"
            )
    out = io.BytesIO()
    out.write(MAGIC)
    out.write(struct.pack("<I", VERSION))
    encoded_id = bundle.video_id.encode("utf-8")
    out.write(struct.pack("<H", len(encoded_id)))
    out.write(encoded_id)
    out.write(struct.pack("<II", dim, rows))
    for tag, matrix in zip(_SECTION_TAGS, matrices):
        out.write(struct.pack("<B", tag))
        out.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())
    return out.getvalue()


def write_embeddings(bundle: EmbeddingBundle, path: str | Path) -> None:
    Path(path).write_bytes(encode_embeddings(bundle))


class _ByteReader:
    def __init__(self, data: bytes, where: str):
        self._data = data
        self._pos = 0
        self._where = where

    def read(self, count: int) -> bytes:
        if self._pos + count > len(self._data):
            raise FormatError(
                f"{self._where}: truncated payload (wanted {count} bytes "
                f"at offset {self._pos}, file has {len(self._data)})"
            )
        chunk = self._data[self._pos : self._pos + count]
        self._pos += count
        return chunk

    def u8(self) -> int:
        return self.read(1)[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.read(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.read(4))[0]

    def remaining(self) -> int:
        return len(self._data) - self._pos


# ---------------------------------------------------------------------------
# ground truth


def load_ground_truth(
    path: str | Path,
    format: str = "normalized",
    frame_counts: Optional[Mapping[str, int]] = None,
) -> list[LabelSeries]:
    """Load per-video ground truth in any supported annotation format.

    The text formats carry no frame counts of their own; pass
    ``frame_counts`` (video id -> total frames) to set them.  Without it
    the count falls back to the largest annotated end frame (zero for
    all-normal videos), which is enough for format round-trip checks but
    not for evaluation.
    """
    if format not in GT_FORMATS:
        raise ValueError(f"unknown ground-truth format {format!r}")
    if format == "normalized":
        return _load_normalized(path)
    if format == "ucf_crime_txt":
        return _load_annotation_txt(path, skip_class_column=True, drop_sentinels=True,
                                    frame_counts=frame_counts)
    return _load_annotation_txt(path, skip_class_column=False, drop_sentinels=False,
                                frame_counts=frame_counts)


def _load_normalized(path: str | Path) -> list[LabelSeries]:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: malformed JSON ({exc.msg})") from exc
    if isinstance(payload, dict):
        payload = [payload]
    if not isinstance(payload, list):
        raise FormatError(f"{path}: expected an object or a list of objects")
    out = []
    for obj in payload:
        if not isinstance(obj, dict) or not {"video_id", "num_frames"} <= set(obj):
            raise FormatError(f"{path}: each entry needs video_id and num_frames")
        ranges = obj.get("anomalous_ranges", [])
        try:
            pairs = [(int(s), int(e)) for s, e in ranges]
        except (TypeError, ValueError) as exc:
            raise FormatError(f"{path}: anomalous_ranges must be [start, end] pairs") from exc
        out.append(
            make_label_series(str(obj["video_id"]), int(obj["num_frames"]), pairs)
        )
    return out


_VIDEO_EXTENSIONS = {".mp4", ".avi", ".mkv", ".mov", ".webm"}


def _video_id_from_name(token: str) -> str:
    """Strip a known video extension; leave dotted titles untouched."""
    path = PurePosixPath(token)
    return path.stem if path.suffix.lower() in _VIDEO_EXTENSIONS else token


def _load_annotation_txt(
    path: str | Path,
    skip_class_column: bool,
    drop_sentinels: bool,
    frame_counts: Optional[Mapping[str, int]],
) -> list[LabelSeries]:
    out = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            tokens = line.split()
            if not tokens:
                continue
            video_id = _video_id_from_name(tokens[0])
            numbers = tokens[2:] if skip_class_column else tokens[1:]
            try:
                values = [int(tok) for tok in numbers]
            except ValueError as exc:
                raise FormatError(f"{path}:{line_no}: non-integer frame bound") from exc
            if len(values) % 2:
                raise FormatError(f"{path}:{line_no}: odd number of frame bounds")
            pairs = list(zip(values[0::2], values[1::2]))
            if drop_sentinels:
                pairs = [(s, e) for s, e in pairs if s != -1 and e != -1]
            max_end = max((e for _, e in pairs), default=0)
            num_frames = None
            if frame_counts is not None:
                num_frames = frame_counts.get(video_id)
            # the text formats carry no frame count, so never let a known
            # count truncate an annotated range
            num_frames = max_end if num_frames is None else max(num_frames, max_end)
            out.append(make_label_series(video_id, num_frames, pairs))
    return out


def make_label_series(
    video_id: str, num_frames: int, ranges: Iterable[tuple[int, int]]
) -> LabelSeries:
    """Normalize and validate ranges into a :class:`LabelSeries`."""
    ordered = sorted((int(s), int(e)) for s, e in ranges)
    for start, end in ordered:
        if start < 1 or end > num_frames or start > end:
            raise ValidationFailure(
                f"{video_id}: range ({start}, {end}) outside [1, {num_frames}]"
            )
    for (_, prev_end), (cur_start, _) in zip(ordered, ordered[1:]):
        if cur_start <= prev_end:
            raise ValidationFailure(f"{video_id}: overlapping anomalous ranges")
    return LabelSeries(
        video_id=video_id, num_frames=num_frames, anomalous_ranges=tuple(ordered)
    )


def write_ground_truth(path: str | Path, labels: Iterable[LabelSeries]) -> None:
    """Write label series in the normalized JSON form."""
    payload = [
        {
            "video_id": series.video_id,
            "num_frames": series.num_frames,
            "anomalous_ranges": [list(pair) for pair in series.anomalous_ranges],
        }
        for series in labels
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(payload, handle, indent=2, ensure_ascii=False)
        handle.write("\n")
