/**
 * Marker handling for generated responses, mirroring the scoring
 * pipeline's rules: case-insensitive search for "anomalous scenes" /
 * "normal scenes", earlier occurrence wins, and the description is the
 * text minus the marker with surrounding separators stripped.
 */

const MARKER_RE = /(anomalous scenes)|(normal scenes)/i;
const SEPARATORS = " \t\r\n:\u2013\u2014-";

export interface ParsedResponse {
  /** 1 anomalous, 0 normal, null indeterminate. */
  decision: 1 | 0 | null;
  description: string;
}

export function parseResponse(rawText: string): ParsedResponse {
  const match = MARKER_RE.exec(rawText);
  if (!match) {
    return { decision: null, description: rawText };
  }
  const decision = match[1] !== undefined ? 1 : 0;
  const before = rawText.slice(0, match.index);
  const after = trimLeading(rawText.slice(match.index + match[0].length));
  return { decision, description: trimBoth(before + after) };
}

function trimLeading(text: string): string {
  let start = 0;
  while (start < text.length && SEPARATORS.includes(text[start])) start++;
  return text.slice(start);
}

function trimBoth(text: string): string {
  let start = 0;
  let end = text.length;
  while (start < end && SEPARATORS.includes(text[start])) start++;
  while (end > start && SEPARATORS.includes(text[end - 1])) end--;
  return text.slice(start, end);
}
