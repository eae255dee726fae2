import { execFile } from "node:child_process";
import { promises as fs } from "node:fs";
import os from "node:os";
import path from "node:path";
import { promisify } from "node:util";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { StubBackend } from "../src/backends/stub.js";
import { DEFAULT_PROMPT, runExtraction } from "../src/extract.js";
import { parseResponse } from "../src/parse.js";
import type { ExtractionResult } from "../src/types.js";
import { writeSmokeClipY4m } from "./clip.js";

const run = promisify(execFile);

// Loads the emitted files with the scoring package itself: the file
// formats are the component boundary, so conformance means the other
// side accepts them.
const VALIDATE_PY = `
import json, sys
from corevad.formats import load_embeddings, load_responses
from corevad.parsing import parse_decision
from corevad.types import segment_spans
from corevad.validation import validate_bundle

out_dir, d, num_frames = sys.argv[1], int(sys.argv[2]), int(sys.argv[3])
grouped = load_responses(out_dir + "/responses.jsonl", segment_interval=d)
(video_id,) = grouped
responses = grouped[video_id]
bundle = load_embeddings(f"{out_dir}/{video_id}.crvb")
report = validate_bundle(responses, bundle)
spans = [(r.start_frame, r.end_frame) for r in responses]
expected = segment_spans(num_frames, d)
compliant = sum(parse_decision(r.raw_text).decision is not None for r in responses)
print(json.dumps({
    "video_id": video_id,
    "fatal": report.is_fatal,
    "issues": [list(i) for i in report.issues],
    "spans_match": spans == expected,
    "segments": len(responses),
    "dim": bundle.dim,
    "compliance": compliant / len(responses),
}))
`;

describe("extraction output conformance", () => {
  let workDir: string;
  let result: ExtractionResult;

  beforeAll(async () => {
    workDir = await fs.mkdtemp(path.join(os.tmpdir(), "extract-conformance-"));
    const clip = path.join(workDir, "smoke.y4m");
    await writeSmokeClipY4m(clip);
    result = await runExtraction(
      { video: clip, d: 16, n: 8, promptTemplate: DEFAULT_PROMPT, outDir: path.join(workDir, "out") },
      new StubBackend(64),
    );
  });

  afterAll(async () => {
    await fs.rm(workDir, { recursive: true, force: true });
  });

  it("emits one response per segment with the clamped spans", () => {
    expect(result.numFrames).toBe(72);
    expect(result.responses).toHaveLength(5); // ceil(72 / 16)
    expect(result.responses[0].start_frame).toBe(1);
    expect(result.responses[4].end_frame).toBe(72);
    expect(result.responses[3].end_frame - result.responses[3].start_frame + 1).toBe(16);
  });

  it("passes the scoring package's loaders and validation", async () => {
    const { stdout } = await run("python3", [
      "-c",
      VALIDATE_PY,
      path.join(workDir, "out"),
      "16",
      "72",
    ]);
    const report = JSON.parse(stdout);
    expect(report.fatal).toBe(false);
    expect(report.issues).toEqual([]);
    expect(report.spans_match).toBe(true);
    expect(report.segments).toBe(5);
    expect(report.dim).toBe(64);
    expect(report.compliance).toBeGreaterThanOrEqual(0.9);
  });

  it("reaches full prompt compliance with the stub backend", () => {
    const compliant = result.responses.filter(
      (record) => parseResponse(record.raw_text).decision !== null,
    );
    expect(compliant.length / result.responses.length).toBeGreaterThanOrEqual(0.9);
  });

  it("marks the burst segments anomalous and the calm ones normal", () => {
    const decisions = result.responses.map(
      (record) => parseResponse(record.raw_text).decision,
    );
    expect(decisions[0]).toBe(0);
    expect(decisions[2]).toBe(1); // burst covers frames 25..48
    expect(decisions[4]).toBe(0);
  });

  it("writes a manifest with the recorded settings", async () => {
    const manifest = JSON.parse(await fs.readFile(result.manifestPath, "utf-8"));
    expect(manifest.d).toBe(16);
    expect(manifest.n).toBe(8);
    expect(manifest.backend.name).toBe("stub");
    expect(manifest.prompt).toContain('"Anomalous scenes"');
    expect(manifest.segments).toHaveLength(5);
    expect(manifest.video_sha256).toMatch(/^[0-9a-f]{64}$/);
  });

  it("is deterministic across reruns", async () => {
    const second = await runExtraction(
      {
        video: path.join(workDir, "smoke.y4m"),
        d: 16,
        n: 8,
        promptTemplate: DEFAULT_PROMPT,
        outDir: path.join(workDir, "out2"),
      },
      new StubBackend(64),
    );
    const [a, b] = await Promise.all([
      fs.readFile(result.embeddingsPath),
      fs.readFile(second.embeddingsPath),
    ]);
    expect(a.equals(b)).toBe(true);
    expect(second.responses).toEqual(result.responses);
  });
});

describe("caption failure handling", () => {
  it("records a placeholder after exhausting retries", async () => {
    const workDir = await fs.mkdtemp(path.join(os.tmpdir(), "extract-fail-"));
    try {
      const clip = path.join(workDir, "smoke.y4m");
      await writeSmokeClipY4m(clip);
      const flaky = new StubBackend(16);
      let calls = 0;
      flaky.caption = async () => {
        calls++;
        throw new Error("model crashed");
      };
      const result = await runExtraction(
        { video: clip, d: 36, n: 4, promptTemplate: DEFAULT_PROMPT, outDir: path.join(workDir, "out") },
        flaky,
        { captionAttempts: 2, sleepFn: async () => {} },
      );
      expect(calls).toBe(4); // two segments, two attempts each
      expect(result.warnings.filter((w) => w.code === "caption-failed")).toHaveLength(2);
      for (const record of result.responses) {
        expect(record.raw_text).toBe("response unavailable for this segment");
        expect(parseResponse(record.raw_text).decision).toBeNull();
      }
    } finally {
      await fs.rm(workDir, { recursive: true, force: true });
    }
  });

  it("truncates over-long text and records a warning", async () => {
    const workDir = await fs.mkdtemp(path.join(os.tmpdir(), "extract-trunc-"));
    try {
      const clip = path.join(workDir, "smoke.y4m");
      await writeSmokeClipY4m(clip);
      const wordy = new StubBackend(16);
      wordy.caption = async () => "Normal scenes: " + "very ".repeat(200) + "calm.";
      const result = await runExtraction(
        { video: clip, d: 72, n: 4, promptTemplate: DEFAULT_PROMPT, outDir: path.join(workDir, "out") },
        wordy,
      );
      const truncations = result.warnings.filter((w) => w.code === "text-truncated");
      expect(truncations.length).toBeGreaterThan(0);
    } finally {
      await fs.rm(workDir, { recursive: true, force: true });
    }
  });
});
