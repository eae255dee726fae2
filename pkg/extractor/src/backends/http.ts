import type { Frame, ModelBackend } from "../types.js";
import { encodePpm } from "../video.js";

export interface HttpBackendOptions {
  baseUrl: string;
  captionModel: string;
  visionModel: string;
  textModel: string;
  dim: number;
  textContextLimit?: number;
  /** Attempts per request before the caller's fallback kicks in. */
  maxAttempts?: number;
  /** Base backoff delay in ms, doubled per retry. */
  backoffMs?: number;
  /** Injectable for tests. */
  fetchFn?: typeof fetch;
}

/**
 * Thin client for a captioning + dual-encoder inference server.
 *
 * Endpoints (all POST, JSON): /caption takes {model, prompt, frames:
 * [{width, height, ppm_base64}]} and returns {text}; /embed/image takes
 * {model, frame} and /embed/text takes {model, text}, both returning
 * {embedding: number[]}. Generation settings are pinned server-side to
 * greedy decoding; the recorded model ids make runs attributable.
 */
export class HttpBackend implements ModelBackend {
  readonly name = "http";
  readonly dim: number;
  readonly models: Record<string, string>;
  readonly textContextLimit: number;

  private readonly options: Required<Omit<HttpBackendOptions, "fetchFn">>;
  private readonly fetchFn: typeof fetch;

  constructor(options: HttpBackendOptions) {
    this.dim = options.dim;
    this.models = {
      caption: options.captionModel,
      vision: options.visionModel,
      text: options.textModel,
    };
    this.textContextLimit = options.textContextLimit ?? 2048;
    this.options = {
      baseUrl: options.baseUrl.replace(/\/+$/, ""),
      captionModel: options.captionModel,
      visionModel: options.visionModel,
      textModel: options.textModel,
      dim: options.dim,
      textContextLimit: this.textContextLimit,
      maxAttempts: options.maxAttempts ?? 3,
      backoffMs: options.backoffMs ?? 500,
    };
    this.fetchFn = options.fetchFn ?? fetch;
  }

  async caption(frames: Frame[], prompt: string): Promise<string> {
    if (frames.length === 0) throw new Error("caption needs at least one frame");
    const payload = {
      model: this.options.captionModel,
      prompt,
      frames: frames.map((frame) => ({
        width: frame.width,
        height: frame.height,
        ppm_base64: encodePpm(frame).toString("base64"),
      })),
    };
    const body = await this.post("/caption", payload);
    if (typeof body.text !== "string") throw new Error("caption response missing text");
    return body.text;
  }

  async embedImage(frame: Frame): Promise<Float32Array> {
    const body = await this.post("/embed/image", {
      model: this.options.visionModel,
      frame: {
        width: frame.width,
        height: frame.height,
        ppm_base64: encodePpm(frame).toString("base64"),
      },
    });
    return this.asEmbedding(body);
  }

  async embedText(text: string): Promise<Float32Array> {
    const body = await this.post("/embed/text", {
      model: this.options.textModel,
      text,
    });
    return this.asEmbedding(body);
  }

  private asEmbedding(body: Record<string, unknown>): Float32Array {
    const embedding = body.embedding;
    if (!Array.isArray(embedding) || embedding.length !== this.dim) {
      throw new Error(`embedding response must hold ${this.dim} numbers`);
    }
    return Float32Array.from(embedding as number[]);
  }

  private async post(route: string, payload: unknown): Promise<Record<string, unknown>> {
    let lastError: unknown;
    for (let attempt = 0; attempt < this.options.maxAttempts; attempt++) {
      if (attempt > 0) {
        await sleep(this.options.backoffMs * 2 ** (attempt - 1));
      }
      try {
        const response = await this.fetchFn(this.options.baseUrl + route, {
          method: "POST",
          headers: { "content-type": "application/json" },
          body: JSON.stringify(payload),
        });
        if (!response.ok) {
          throw new Error(`${route} returned HTTP ${response.status}`);
        }
        return (await response.json()) as Record<string, unknown>;
      } catch (error) {
        lastError = error;
      }
    }
    throw lastError instanceof Error ? lastError : new Error(String(lastError));
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
