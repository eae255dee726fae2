export { HttpBackend } from "./backends/http.js";
export { StubBackend } from "./backends/stub.js";
export { DEFAULT_PROMPT, runExtraction } from "./extract.js";
export { encodeEmbeddings, writeEmbeddings, writeResponsesJsonl } from "./formats.js";
export { parseResponse } from "./parse.js";
export { planSegments, sampleOffsets, segmentSpans } from "./segment.js";
export type {
  ExtractionResult,
  ExtractionSpec,
  Frame,
  ModelBackend,
  SegmentPlan,
  SegmentResponseRecord,
} from "./types.js";
export { decodeNetpbm, encodePpm, loadVideo, videoIdFromPath } from "./video.js";
