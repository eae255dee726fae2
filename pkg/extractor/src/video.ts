import { promises as fs } from "node:fs";
import path from "node:path";

import type { Frame } from "./types.js";

/**
 * Load a video as decoded frames. Two inputs are supported without any
 * external decoder: a directory of binary .ppm (P6) / .pgm (P5) frames
 * in name order, or a single YUV4MPEG2 (.y4m) file with 4:2:0 or mono
 * chroma.
 */
export async function loadVideo(videoPath: string): Promise<Frame[]> {
  const stat = await fs.stat(videoPath);
  if (stat.isDirectory()) {
    return loadFrameDirectory(videoPath);
  }
  if (videoPath.toLowerCase().endsWith(".y4m")) {
    return decodeY4m(await fs.readFile(videoPath));
  }
  throw new Error(`unsupported video input ${videoPath}: use a .y4m file or a frame directory`);
}

/** Video id for output files: file stem, or the directory name. */
export function videoIdFromPath(videoPath: string): string {
  const base = path.basename(videoPath.replace(/[/\\]+$/, ""));
  const dot = base.lastIndexOf(".");
  return dot > 0 ? base.slice(0, dot) : base;
}

async function loadFrameDirectory(dir: string): Promise<Frame[]> {
  const entries = (await fs.readdir(dir))
    .filter((name) => /\.(ppm|pgm)$/i.test(name))
    .sort();
  if (entries.length === 0) {
    throw new Error(`${dir}: no .ppm or .pgm frames found`);
  }
  const frames: Frame[] = [];
  for (const name of entries) {
    frames.push(decodeNetpbm(await fs.readFile(path.join(dir, name)), name));
  }
  return frames;
}

/** Binary netpbm decoder (P6 RGB and P5 grayscale, maxval <= 255). */
export function decodeNetpbm(data: Buffer, where = "<buffer>"): Frame {
  const magic = data.subarray(0, 2).toString("ascii");
  if (magic !== "P6" && magic !== "P5") {
    throw new Error(`${where}: unsupported netpbm magic ${magic}`);
  }
  let pos = 2;
  const fields: number[] = [];
  while (fields.length < 3) {
    // skip whitespace and comment lines between header fields
    while (pos < data.length && /\s/.test(String.fromCharCode(data[pos]))) pos++;
    if (data[pos] === 0x23) {
      while (pos < data.length && data[pos] !== 0x0a) pos++;
      continue;
    }
    let token = "";
    while (pos < data.length && !/\s/.test(String.fromCharCode(data[pos]))) {
      token += String.fromCharCode(data[pos]);
      pos++;
    }
    const value = Number.parseInt(token, 10);
    if (!Number.isFinite(value)) throw new Error(`${where}: malformed netpbm header`);
    fields.push(value);
  }
  pos++; // single whitespace after maxval
  const [width, height, maxval] = fields;
  if (maxval > 255) throw new Error(`${where}: 16-bit netpbm not supported`);
  const pixels = width * height;
  if (magic === "P6") {
    const rgb = new Uint8Array(data.subarray(pos, pos + pixels * 3));
    if (rgb.length !== pixels * 3) throw new Error(`${where}: truncated pixel data`);
    return { width, height, rgb, gray: rgbToGray(rgb, pixels) };
  }
  const gray = new Uint8Array(data.subarray(pos, pos + pixels));
  if (gray.length !== pixels) throw new Error(`${where}: truncated pixel data`);
  return { width, height, rgb: grayToRgb(gray), gray };
}

export function encodePpm(frame: Frame): Buffer {
  const header = Buffer.from(`P6\n${frame.width} ${frame.height}\n255\n`, "ascii");
  return Buffer.concat([header, Buffer.from(frame.rgb)]);
}

function rgbToGray(rgb: Uint8Array, pixels: number): Uint8Array {
  const gray = new Uint8Array(pixels);
  for (let i = 0; i < pixels; i++) {
    // BT.601 luma
    gray[i] = Math.round(
      0.299 * rgb[3 * i] + 0.587 * rgb[3 * i + 1] + 0.114 * rgb[3 * i + 2],
    );
  }
  return gray;
}

function grayToRgb(gray: Uint8Array): Uint8Array {
  const rgb = new Uint8Array(gray.length * 3);
  for (let i = 0; i < gray.length; i++) {
    rgb[3 * i] = rgb[3 * i + 1] = rgb[3 * i + 2] = gray[i];
  }
  return rgb;
}

function decodeY4m(data: Buffer): Frame[] {
  const headerEnd = data.indexOf(0x0a);
  if (headerEnd < 0) throw new Error("y4m: missing stream header");
  const header = data.subarray(0, headerEnd).toString("ascii");
  if (!header.startsWith("YUV4MPEG2")) {
    throw new Error("y4m: bad magic");
  }
  let width = 0;
  let height = 0;
  let chroma = "420";
  for (const token of header.split(" ").slice(1)) {
    if (token.startsWith("W")) width = Number.parseInt(token.slice(1), 10);
    else if (token.startsWith("H")) height = Number.parseInt(token.slice(1), 10);
    else if (token.startsWith("C")) chroma = token.slice(1);
  }
  if (!width || !height) throw new Error("y4m: missing frame geometry");
  const mono = chroma.startsWith("mono");
  if (!mono && !chroma.startsWith("420")) {
    throw new Error(`y4m: unsupported chroma mode C${chroma}`);
  }
  const lumaSize = width * height;
  const chromaSize = mono ? 0 : (width / 2) * (height / 2) * 2;
  const frames: Frame[] = [];
  let pos = headerEnd + 1;
  while (pos < data.length) {
    const markerEnd = data.indexOf(0x0a, pos);
    if (markerEnd < 0) throw new Error("y4m: truncated frame marker");
    const marker = data.subarray(pos, markerEnd).toString("ascii");
    if (!marker.startsWith("FRAME")) throw new Error("y4m: expected FRAME marker");
    pos = markerEnd + 1;
    if (pos + lumaSize + chromaSize > data.length) {
      throw new Error("y4m: truncated frame payload");
    }
    const y = new Uint8Array(data.subarray(pos, pos + lumaSize));
    const u = mono ? null : data.subarray(pos + lumaSize, pos + lumaSize + chromaSize / 2);
    const v = mono
      ? null
      : data.subarray(pos + lumaSize + chromaSize / 2, pos + lumaSize + chromaSize);
    frames.push({
      width,
      height,
      rgb: mono ? grayToRgb(y) : yuv420ToRgb(y, u!, v!, width, height),
      gray: y,
    });
    pos += lumaSize + chromaSize;
  }
  if (frames.length === 0) throw new Error("y4m: no frames");
  return frames;
}

function yuv420ToRgb(
  y: Uint8Array,
  u: Uint8Array | Buffer,
  v: Uint8Array | Buffer,
  width: number,
  height: number,
): Uint8Array {
  const rgb = new Uint8Array(width * height * 3);
  const half = width / 2;
  for (let row = 0; row < height; row++) {
    for (let col = 0; col < width; col++) {
      const idx = row * width + col;
      const cIdx = (row >> 1) * half + (col >> 1);
      const yy = y[idx];
      const cb = u[cIdx] - 128;
      const cr = v[cIdx] - 128;
      rgb[3 * idx] = clampByte(yy + 1.402 * cr);
      rgb[3 * idx + 1] = clampByte(yy - 0.344136 * cb - 0.714136 * cr);
      rgb[3 * idx + 2] = clampByte(yy + 1.772 * cb);
    }
  }
  return rgb;
}

function clampByte(value: number): number {
  return Math.max(0, Math.min(255, Math.round(value)));
}
