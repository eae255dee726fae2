import { promises as fs } from "node:fs";

import type { SegmentResponseRecord } from "./types.js";

const MAGIC = "CRVB";
const VERSION = 1;

/** UTF-8 JSONL, one object per segment, canonical key order. */
export async function writeResponsesJsonl(
  path: string,
  records: SegmentResponseRecord[],
): Promise<void> {
  const lines = records.map((record) =>
    JSON.stringify({
      video_id: record.video_id,
      segment_index: record.segment_index,
      start_frame: record.start_frame,
      end_frame: record.end_frame,
      raw_text: record.raw_text,
    }),
  );
  await fs.writeFile(path, lines.join("\n") + "\n", "utf-8");
}

/**
 * Little-endian embedding container: magic "CRVB", version u32, id
 * length u16 + UTF-8 id, dim u32, rows u32, then three sections (tag
 * byte 0 vision / 1 response text / 2 description text, each followed
 * by rows*dim float32 row-major).
 */
export function encodeEmbeddings(
  videoId: string,
  vision: Float32Array[],
  responseText: Float32Array[],
  descriptionText: Float32Array[],
): Buffer {
  const rows = vision.length;
  const dim = rows > 0 ? vision[0].length : 0;
  for (const section of [vision, responseText, descriptionText]) {
    if (section.length !== rows) throw new Error("embedding sections disagree on rows");
    for (const row of section) {
      if (row.length !== dim) throw new Error("embedding rows disagree on dim");
    }
  }
  const idBytes = Buffer.from(videoId, "utf-8");
  const headerSize = 4 + 4 + 2 + idBytes.length + 4 + 4;
  const sectionSize = 1 + rows * dim * 4;
  const out = Buffer.alloc(headerSize + 3 * sectionSize);
  let pos = 0;
  pos += out.write(MAGIC, pos, "ascii");
  pos = out.writeUInt32LE(VERSION, pos);
  pos = out.writeUInt16LE(idBytes.length, pos);
  pos += idBytes.copy(out, pos);
  pos = out.writeUInt32LE(dim, pos);
  pos = out.writeUInt32LE(rows, pos);
  const sections: Array<[number, Float32Array[]]> = [
    [0, vision],
    [1, responseText],
    [2, descriptionText],
  ];
  for (const [tag, section] of sections) {
    pos = out.writeUInt8(tag, pos);
    for (const row of section) {
      for (const value of row) {
        pos = out.writeFloatLE(value, pos);
      }
    }
  }
  return out;
}

export async function writeEmbeddings(
  path: string,
  videoId: string,
  vision: Float32Array[],
  responseText: Float32Array[],
  descriptionText: Float32Array[],
): Promise<void> {
  await fs.writeFile(path, encodeEmbeddings(videoId, vision, responseText, descriptionText));
}
