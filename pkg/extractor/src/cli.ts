#!/usr/bin/env node
import { promises as fs } from "node:fs";
import process from "node:process";

import { HttpBackend } from "./backends/http.js";
import { StubBackend } from "./backends/stub.js";
import { DEFAULT_PROMPT, runExtraction } from "./extract.js";
import type { ModelBackend } from "./types.js";

const USAGE = `usage: corevad-extract --video <path> [--d 30] [--n 8] [--prompt <file>] --out <dir>
                       [--video-id <id>] [--backend stub|http] [--dim 64]
                       [--base-url <url>] [--caption-model <id>] [--vision-model <id>] [--text-model <id>]

Turns a video (a .y4m file or a directory of .ppm/.pgm frames) into the
scoring pipeline's input files: responses.jsonl, <video-id>.crvb, and an
extraction manifest. The default backend is the deterministic offline
stub; --backend http talks to a captioning + dual-encoder server.`;

interface CliArgs {
  [key: string]: string;
}

function parseArgs(argv: string[]): CliArgs {
  const args: CliArgs = {};
  for (let i = 0; i < argv.length; i++) {
    const token = argv[i];
    if (!token.startsWith("--")) {
      throw new Error(`unexpected argument ${token}`);
    }
    const key = token.slice(2);
    if (key === "help") {
      args.help = "true";
      continue;
    }
    const value = argv[i + 1];
    if (value === undefined || value.startsWith("--")) {
      throw new Error(`missing value for --${key}`);
    }
    args[key] = value;
    i++;
  }
  return args;
}

async function main(): Promise<number> {
  let args: CliArgs;
  try {
    args = parseArgs(process.argv.slice(2));
  } catch (error) {
    console.error(error instanceof Error ? error.message : String(error));
    console.error(USAGE);
    return 2;
  }
  if (args.help) {
    console.log(USAGE);
    return 0;
  }
  if (!args.video || !args.out) {
    console.error("--video and --out are required");
    console.error(USAGE);
    return 2;
  }

  const dim = Number.parseInt(args.dim ?? "64", 10);
  let backend: ModelBackend;
  if ((args.backend ?? "stub") === "http") {
    if (!args["base-url"]) {
      console.error("--base-url is required with --backend http");
      return 2;
    }
    backend = new HttpBackend({
      baseUrl: args["base-url"],
      captionModel: args["caption-model"] ?? "internvl2-8b",
      visionModel: args["vision-model"] ?? "clip-vit-b-16-vision",
      textModel: args["text-model"] ?? "clip-vit-b-16-text",
      dim,
    });
  } else if ((args.backend ?? "stub") === "stub") {
    backend = new StubBackend(dim);
  } else {
    console.error(`unknown backend ${args.backend}`);
    return 2;
  }

  const promptTemplate = args.prompt
    ? await fs.readFile(args.prompt, "utf-8")
    : DEFAULT_PROMPT;

  try {
    const result = await runExtraction(
      {
        video: args.video,
        d: Number.parseInt(args.d ?? "30", 10),
        n: Number.parseInt(args.n ?? "8", 10),
        promptTemplate,
        outDir: args.out,
        videoId: args["video-id"],
      },
      backend,
    );
    console.log(
      `extracted ${result.responses.length} segment(s) from ${result.numFrames} frames`,
    );
    console.log(`responses:  ${result.responsesPath}`);
    console.log(`embeddings: ${result.embeddingsPath}`);
    console.log(`manifest:   ${result.manifestPath}`);
    if (result.warnings.length > 0) {
      console.warn(`${result.warnings.length} warning(s) recorded in the manifest`);
    }
    return 0;
  } catch (error) {
    console.error(error instanceof Error ? error.message : String(error));
    return 1;
  }
}

main().then((code) => {
  process.exitCode = code;
});
