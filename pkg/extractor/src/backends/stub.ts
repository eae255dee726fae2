import type { Frame, ModelBackend } from "../types.js";

/**
 * Deterministic offline backend for tests and dry runs.
 *
 * Captions come from two frame statistics: inter-frame motion (mean
 * absolute luma difference between consecutive samples) and brightness
 * spread. High motion or a hard brightness jump reads as anomalous.
 * Embeddings are fixed random projections of image statistics and of
 * hashed character trigrams, so equal inputs always embed equally and
 * different texts almost surely differ.
 */
export class StubBackend implements ModelBackend {
  readonly name = "stub";
  readonly dim: number;
  readonly models = {
    caption: "stub-motion-heuristic",
    vision: "stub-histogram-projection",
    text: "stub-trigram-projection",
  };
  readonly textContextLimit = 512;

  private readonly imageProjection: Float64Array;
  private readonly motionThreshold: number;

  constructor(dim = 64, motionThreshold = 6.0) {
    if (dim < 2) throw new Error("dim must be >= 2");
    this.dim = dim;
    this.motionThreshold = motionThreshold;
    // 64 histogram-ish input features projected to dim outputs
    this.imageProjection = randomMatrix(dim * 64, 0x5eed);
  }

  async caption(frames: Frame[], prompt: string): Promise<string> {
    if (frames.length === 0) throw new Error("caption needs at least one frame");
    void prompt; // the heuristic always answers in the requested shape
    const motion = meanMotion(frames);
    const spread = brightnessSpread(frames);
    const place = ["a corridor", "a parking lot", "a storefront", "an open yard"][
      Math.floor(meanBrightness(frames[0])) % 4
    ];
    if (motion > this.motionThreshold || spread > 60) {
      return `Anomalous scenes: sudden fast movement disturbs ${place}.`;
    }
    return `Normal scenes: activity in ${place} stays steady and calm.`;
  }

  async embedImage(frame: Frame): Promise<Float32Array> {
    const features = imageFeatures(frame);
    return project(features, this.imageProjection, this.dim);
  }

  async embedText(text: string): Promise<Float32Array> {
    const features = new Float64Array(64);
    const lower = text.toLowerCase();
    for (let i = 0; i + 2 < lower.length; i++) {
      const code = hash3(lower.charCodeAt(i), lower.charCodeAt(i + 1), lower.charCodeAt(i + 2));
      features[code % 64] += 1;
    }
    const norm = Math.hypot(...features) || 1;
    for (let i = 0; i < 64; i++) features[i] /= norm;
    return project(features, this.imageProjection, this.dim);
  }
}

/** 8x8 mean-luma grid, scaled to [0, 1]. */
function imageFeatures(frame: Frame): Float64Array {
  const features = new Float64Array(64);
  const counts = new Float64Array(64);
  for (let row = 0; row < frame.height; row++) {
    const cellRow = Math.min(7, Math.floor((row * 8) / frame.height));
    for (let col = 0; col < frame.width; col++) {
      const cellCol = Math.min(7, Math.floor((col * 8) / frame.width));
      const cell = cellRow * 8 + cellCol;
      features[cell] += frame.gray[row * frame.width + col];
      counts[cell] += 1;
    }
  }
  for (let i = 0; i < 64; i++) {
    features[i] = counts[i] ? features[i] / counts[i] / 255 : 0;
  }
  return features;
}

function project(features: Float64Array, matrix: Float64Array, dim: number): Float32Array {
  const out = new Float32Array(dim);
  for (let row = 0; row < dim; row++) {
    let acc = 0;
    for (let col = 0; col < 64; col++) {
      acc += matrix[row * 64 + col] * features[col];
    }
    out[row] = acc;
  }
  return out;
}

function meanBrightness(frame: Frame): number {
  let total = 0;
  for (const value of frame.gray) total += value;
  return total / frame.gray.length;
}

function meanMotion(frames: Frame[]): number {
  if (frames.length < 2) return 0;
  let total = 0;
  for (let i = 1; i < frames.length; i++) {
    const prev = frames[i - 1].gray;
    const cur = frames[i].gray;
    let diff = 0;
    for (let p = 0; p < cur.length; p++) diff += Math.abs(cur[p] - prev[p]);
    total += diff / cur.length;
  }
  return total / (frames.length - 1);
}

function brightnessSpread(frames: Frame[]): number {
  let lo = Infinity;
  let hi = -Infinity;
  for (const frame of frames) {
    const mean = meanBrightness(frame);
    lo = Math.min(lo, mean);
    hi = Math.max(hi, mean);
  }
  return hi - lo;
}

/** mulberry32-seeded uniform values in [-1, 1], stable across runs. */
function randomMatrix(size: number, seed: number): Float64Array {
  const out = new Float64Array(size);
  let state = seed >>> 0;
  for (let i = 0; i < size; i++) {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    out[i] = (((t ^ (t >>> 14)) >>> 0) / 4294967296) * 2 - 1;
  }
  return out;
}

function hash3(a: number, b: number, c: number): number {
  let h = 2166136261;
  for (const value of [a, b, c]) {
    h ^= value;
    h = Math.imul(h, 16777619);
  }
  return h >>> 0;
}
