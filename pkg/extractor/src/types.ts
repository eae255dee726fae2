/** A decoded frame. RGB is interleaved, 3 bytes per pixel. */
export interface Frame {
  width: number;
  height: number;
  rgb: Uint8Array;
  /** Luma plane, one byte per pixel, derived from rgb at decode time. */
  gray: Uint8Array;
}

/** One fixed-interval segment and the frames sampled from it. */
export interface SegmentPlan {
  /** 1-based position within the video. */
  segmentIndex: number;
  /** 1-based inclusive frame span. */
  startFrame: number;
  endFrame: number;
  /** 0-based offsets of the sampled frames within the span. */
  sampleOffsets: number[];
}

export interface ExtractionSpec {
  /** A .y4m file or a directory of .ppm/.pgm frames. */
  video: string;
  /** Segment interval in frames. */
  d: number;
  /** Frames sampled per segment; must satisfy d >= n >= 1. */
  n: number;
  promptTemplate: string;
  outDir: string;
  /** Overrides the video id derived from the input path. */
  videoId?: string;
}

export interface SegmentResponseRecord {
  video_id: string;
  segment_index: number;
  start_frame: number;
  end_frame: number;
  raw_text: string;
}

/**
 * The model seam. One backend call per segment for captions; one call
 * per image or text for embeddings, all in a shared joint space of
 * dimension `dim`.
 */
export interface ModelBackend {
  readonly name: string;
  readonly dim: number;
  /** Identifiers recorded in the manifest (caption model, encoders). */
  readonly models: Record<string, string>;
  /** Longest text the encoder accepts; longer inputs are truncated. */
  readonly textContextLimit: number;
  caption(frames: Frame[], prompt: string): Promise<string>;
  embedImage(frame: Frame): Promise<Float32Array>;
  embedText(text: string): Promise<Float32Array>;
}

export interface ExtractionWarning {
  segmentIndex: number;
  code: string;
  message: string;
}

export interface ExtractionResult {
  videoId: string;
  numFrames: number;
  plans: SegmentPlan[];
  responses: SegmentResponseRecord[];
  responsesPath: string;
  embeddingsPath: string;
  manifestPath: string;
  warnings: ExtractionWarning[];
}
