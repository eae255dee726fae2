import type { SegmentPlan } from "./types.js";

/**
 * Fixed-interval segmentation: segment j (1-based) covers frames
 * [(j-1)*d + 1, min(j*d, numFrames)], so only the last segment may be
 * shorter than d. Matches the scoring pipeline's span layout exactly.
 */
export function segmentSpans(numFrames: number, d: number): Array<[number, number]> {
  if (numFrames < 1) throw new Error("numFrames must be >= 1");
  if (d < 1) throw new Error("segment interval d must be >= 1");
  const count = Math.ceil(numFrames / d);
  const spans: Array<[number, number]> = [];
  for (let j = 1; j <= count; j++) {
    spans.push([(j - 1) * d + 1, Math.min(j * d, numFrames)]);
  }
  return spans;
}

/**
 * 0-based offsets of n uniform samples within a span of `length` frames:
 * round(k * (length - 1) / (n - 1)) for k = 0..n-1. Spans no longer than
 * n yield every frame once; a single sample takes the middle frame.
 */
export function sampleOffsets(length: number, n: number): number[] {
  if (length < 1) throw new Error("segment length must be >= 1");
  if (n < 1) throw new Error("samples per segment n must be >= 1");
  if (length <= n) {
    return Array.from({ length }, (_, k) => k);
  }
  if (n === 1) {
    return [Math.round((length - 1) / 2)];
  }
  const offsets: number[] = [];
  for (let k = 0; k < n; k++) {
    const offset = Math.round((k * (length - 1)) / (n - 1));
    if (offsets.length === 0 || offsets[offsets.length - 1] !== offset) {
      offsets.push(offset);
    }
  }
  return offsets;
}

export function planSegments(numFrames: number, d: number, n: number): SegmentPlan[] {
  if (n > d) throw new Error(`n (${n}) must not exceed d (${d})`);
  return segmentSpans(numFrames, d).map(([startFrame, endFrame], idx) => ({
    segmentIndex: idx + 1,
    startFrame,
    endFrame,
    sampleOffsets: sampleOffsets(endFrame - startFrame + 1, n),
  }));
}
