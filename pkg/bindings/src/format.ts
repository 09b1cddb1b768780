/**
 * Embedding file interop: raw little-endian 32-bit float payload plus a JSON
 * header sidecar ({l, d, n, labels?, name?}) at `<payload>.json`.
 */

import { readFileSync, writeFileSync } from "node:fs";

export interface Embedding {
  data: Float32Array;
  l: number;
  d: number;
  n: number;
  labels?: string[];
  name?: string;
}

const LITTLE_ENDIAN = (() => {
  const probe = new Uint8Array(new Uint16Array([1]).buffer);
  return probe[0] === 1;
})();

if (!LITTLE_ENDIAN) {
  throw new Error("big-endian hosts are not supported by the payload format");
}

export function headerPathFor(path: string): string {
  return `${path}.json`;
}

export function readEmbedding(path: string, headerPath?: string): Embedding {
  const header = JSON.parse(readFileSync(headerPath ?? headerPathFor(path), "utf8"));
  for (const key of ["l", "d", "n"]) {
    if (!Number.isInteger(header[key])) {
      throw new Error(`header field ${key} must be an integer, got ${header[key]}`);
    }
  }
  const { l, d, n } = header;
  if (!(n >= 1 && n < l)) {
    throw new Error(`need 1 <= n < l, got n=${n}, l=${l}`);
  }
  const raw = readFileSync(path);
  const expected = l * d * 4;
  if (raw.byteLength !== expected) {
    throw new Error(
      `${path}: payload is ${raw.byteLength} bytes, header implies ${expected} (${l}x${d} 32-bit floats)`,
    );
  }
  // copy so the view owns aligned memory independent of Buffer pooling
  const data = new Float32Array(l * d);
  data.set(new Float32Array(raw.buffer, raw.byteOffset, l * d));
  return { data, l, d, n, labels: header.labels, name: header.name };
}

export function writeEmbedding(path: string, emb: Embedding, headerPath?: string): void {
  if (emb.data.length !== emb.l * emb.d) {
    throw new Error(`payload has ${emb.data.length} values, expected ${emb.l * emb.d}`);
  }
  writeFileSync(path, Buffer.from(emb.data.buffer, emb.data.byteOffset, emb.data.byteLength));
  const header: Record<string, unknown> = { l: emb.l, d: emb.d, n: emb.n };
  if (emb.labels) header.labels = emb.labels;
  if (emb.name) header.name = emb.name;
  writeFileSync(headerPath ?? headerPathFor(path), JSON.stringify(header, null, 2) + "\n");
}
