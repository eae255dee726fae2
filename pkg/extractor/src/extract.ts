import { createHash } from "node:crypto";
import { promises as fs } from "node:fs";
import path from "node:path";

import { writeEmbeddings, writeResponsesJsonl } from "./formats.js";
import { parseResponse } from "./parse.js";
import { planSegments } from "./segment.js";
import type {
  ExtractionResult,
  ExtractionSpec,
  ExtractionWarning,
  Frame,
  ModelBackend,
  SegmentResponseRecord,
} from "./types.js";
import { loadVideo, videoIdFromPath } from "./video.js";

export const DEFAULT_PROMPT =
  "These are {n} frames sampled in order from one segment of a surveillance video. " +
  "Decide whether the segment shows abnormal, dangerous, or criminal activity. " +
  'Begin your answer with exactly "Anomalous scenes" if it does or exactly ' +
  '"Normal scenes" if it does not, then a colon and one sentence describing what ' +
  "happens over time across the frames.";

const PLACEHOLDER_TEXT = "response unavailable for this segment";

export interface ExtractOptions {
  /** Caption retries before the placeholder is recorded. */
  captionAttempts?: number;
  backoffMs?: number;
  sleepFn?: (ms: number) => Promise<void>;
}

/**
 * Full extraction for one video: decode, segment, sample, caption each
 * segment, embed averaged frame features plus both text variants, and
 * write the responses JSONL, the embeddings container, and a manifest
 * into the output directory.
 */
export async function runExtraction(
  spec: ExtractionSpec,
  backend: ModelBackend,
  options: ExtractOptions = {},
): Promise<ExtractionResult> {
  if (spec.d < 1 || spec.n < 1 || spec.n > spec.d) {
    throw new Error(`need d >= n >= 1, got d=${spec.d} n=${spec.n}`);
  }
  const frames = await loadVideo(spec.video);
  const videoId = spec.videoId ?? videoIdFromPath(spec.video);
  const plans = planSegments(frames.length, spec.d, spec.n);
  const prompt = spec.promptTemplate.replaceAll("{n}", String(spec.n));
  const attempts = options.captionAttempts ?? 3;
  const backoffMs = options.backoffMs ?? 500;
  const sleepFn = options.sleepFn ?? ((ms) => new Promise<void>((r) => setTimeout(r, ms)));

  const warnings: ExtractionWarning[] = [];
  const responses: SegmentResponseRecord[] = [];
  const vision: Float32Array[] = [];
  const responseText: Float32Array[] = [];
  const descriptionText: Float32Array[] = [];

  for (const plan of plans) {
    const sampled = plan.sampleOffsets.map(
      (offset) => frames[plan.startFrame - 1 + offset],
    );
    let rawText: string;
    try {
      rawText = await withRetries(
        () => backend.caption(sampled, prompt), attempts, backoffMs, sleepFn,
      );
      if (!rawText.trim()) rawText = PLACEHOLDER_TEXT;
    } catch (error) {
      warnings.push({
        segmentIndex: plan.segmentIndex,
        code: "caption-failed",
        message: error instanceof Error ? error.message : String(error),
      });
      rawText = PLACEHOLDER_TEXT;
    }
    responses.push({
      video_id: videoId,
      segment_index: plan.segmentIndex,
      start_frame: plan.startFrame,
      end_frame: plan.endFrame,
      raw_text: rawText,
    });

    vision.push(meanEmbedding(await Promise.all(sampled.map((f) => backend.embedImage(f)))));
    responseText.push(
      await embedTruncated(backend, rawText, plan.segmentIndex, "response", warnings),
    );
    const description = parseResponse(rawText).description || rawText;
    descriptionText.push(
      await embedTruncated(backend, description, plan.segmentIndex, "description", warnings),
    );
  }

  await fs.mkdir(spec.outDir, { recursive: true });
  const responsesPath = path.join(spec.outDir, "responses.jsonl");
  const embeddingsPath = path.join(spec.outDir, `${videoId}.crvb`);
  const manifestPath = path.join(spec.outDir, `${videoId}.extract-manifest.json`);
  await writeResponsesJsonl(responsesPath, responses);
  await writeEmbeddings(embeddingsPath, videoId, vision, responseText, descriptionText);

  const manifest = {
    video: spec.video,
    video_id: videoId,
    video_sha256: await digestInput(spec.video),
    num_frames: frames.length,
    d: spec.d,
    n: spec.n,
    prompt,
    backend: { name: backend.name, dim: backend.dim, models: backend.models },
    decoding: backend.name === "http" ? "greedy, pinned server-side" : "deterministic stub",
    segments: plans.map((plan) => ({
      segment_index: plan.segmentIndex,
      start_frame: plan.startFrame,
      end_frame: plan.endFrame,
      sample_offsets: plan.sampleOffsets,
    })),
    warnings,
  };
  await fs.writeFile(manifestPath, JSON.stringify(manifest, null, 2) + "\n", "utf-8");

  return {
    videoId,
    numFrames: frames.length,
    plans,
    responses,
    responsesPath,
    embeddingsPath,
    manifestPath,
    warnings,
  };
}

async function withRetries<T>(
  action: () => Promise<T>,
  attempts: number,
  backoffMs: number,
  sleepFn: (ms: number) => Promise<void>,
): Promise<T> {
  let lastError: unknown;
  for (let attempt = 0; attempt < attempts; attempt++) {
    if (attempt > 0) await sleepFn(backoffMs * 2 ** (attempt - 1));
    try {
      return await action();
    } catch (error) {
      lastError = error;
    }
  }
  throw lastError instanceof Error ? lastError : new Error(String(lastError));
}

async function embedTruncated(
  backend: ModelBackend,
  text: string,
  segmentIndex: number,
  kind: string,
  warnings: ExtractionWarning[],
): Promise<Float32Array> {
  let input = text;
  if (input.length > backend.textContextLimit) {
    input = input.slice(0, backend.textContextLimit);
    warnings.push({
      segmentIndex,
      code: "text-truncated",
      message: `${kind} text truncated to ${backend.textContextLimit} characters`,
    });
  }
  return backend.embedText(input);
}

function meanEmbedding(rows: Float32Array[]): Float32Array {
  const out = new Float32Array(rows[0].length);
  for (const row of rows) {
    for (let i = 0; i < out.length; i++) out[i] += row[i];
  }
  for (let i = 0; i < out.length; i++) out[i] /= rows.length;
  return out;
}

async function digestInput(videoPath: string): Promise<string> {
  const stat = await fs.stat(videoPath);
  const hash = createHash("sha256");
  if (stat.isDirectory()) {
    for (const name of (await fs.readdir(videoPath)).sort()) {
      if (/\.(ppm|pgm)$/i.test(name)) {
        hash.update(name);
        hash.update(await fs.readFile(path.join(videoPath, name)));
      }
    }
  } else {
    hash.update(await fs.readFile(videoPath));
  }
  return hash.digest("hex");
}
