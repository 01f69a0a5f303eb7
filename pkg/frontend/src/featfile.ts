/** Writer for the engine's canonical feature-file format: one compact JSON
 * header line, then `subject,sample,<hex payload>` records. Payloads are
 * little-endian float32 as lowercase base16; iris records carry four payloads
 * followed by four decimal mask ratios. Bytes must match the engine's own
 * writer so goldens and ingest validation stay bit-exact. */

import { writeFileSync } from "node:fs";

export interface FeatureRecord {
  subject: string;
  sample: string;
  vector: Float32Array;
}

export interface IrisFeatureRecord {
  subject: string;
  sample: string;
  subvectors: [Float32Array, Float32Array, Float32Array, Float32Array];
  maskRatios: [number, number, number, number];
}

function hexF32(vec: Float32Array): string {
  const buf = Buffer.alloc(vec.length * 4);
  for (let i = 0; i < vec.length; i++) buf.writeFloatLE(vec[i], i * 4);
  return buf.toString("hex");
}

/** Decimal form the engine's reader accepts; integral values keep a ".0"
 * suffix to match its writer. */
function fmtRatio(x: number): string {
  return Number.isInteger(x) ? x.toFixed(1) : String(x);
}

function header(trait: string, dim: number, count: number, subimages: 1 | 4): string {
  return JSON.stringify({
    schema: "fusebench/1",
    trait,
    dim,
    count,
    subimages,
  });
}

export function writeFeatures(path: string, trait: string, records: FeatureRecord[]): void {
  const dim = records.length ? records[0].vector.length : 0;
  const lines = [header(trait, dim, records.length, 1)];
  for (const rec of records) {
    if (rec.vector.length !== dim) {
      throw new Error(`${path}: ragged vector for ${rec.subject}/${rec.sample}`);
    }
    lines.push([rec.subject, rec.sample, hexF32(rec.vector)].join(","));
  }
  writeFileSync(path, lines.join("\n") + "\n");
}

export function writeIrisFeatures(path: string, records: IrisFeatureRecord[]): void {
  const dim = records.length ? records[0].subvectors[0].length : 0;
  const lines = [header("iris", dim, records.length, 4)];
  for (const rec of records) {
    const fields = [rec.subject, rec.sample];
    for (const sub of rec.subvectors) {
      if (sub.length !== dim) {
        throw new Error(`${path}: ragged subvector for ${rec.subject}/${rec.sample}`);
      }
      fields.push(hexF32(sub));
    }
    for (const r of rec.maskRatios) fields.push(fmtRatio(r));
    lines.push(fields.join(","));
  }
  writeFileSync(path, lines.join("\n") + "\n");
}
