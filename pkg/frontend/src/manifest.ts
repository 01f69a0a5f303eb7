/** Extraction manifest: where the images live, how filenames map to
 * subject/sample IDs, and which pinned backbone serves each trait. */

import { readFileSync } from "node:fs";
import { z } from "zod";

export const TRAITS = ["face", "periocular", "iris", "nose", "eyebrow"] as const;
export type Trait = (typeof TRAITS)[number];

const manifestSchema = z.object({
  image_dir: z.string(),
  // Regex applied to the image basename (without extension); must expose
  // named groups `subject` and `sample`.
  id_pattern: z.string(),
  backbones: z.record(z.enum(TRAITS), z.string()),
  // Command prefix for the geometry engine, e.g. ["fusebench"] or
  // ["python3", "-m", "fusebench.cli"].
  engine: z.array(z.string()).nonempty().default(["fusebench"]),
});

export interface Manifest {
  imageDir: string;
  idPattern: RegExp;
  backbones: Record<Trait, string>;
  engine: string[];
}

export function loadManifest(path: string): Manifest {
  let doc: unknown;
  try {
    doc = JSON.parse(readFileSync(path, "utf8"));
  } catch (err) {
    throw new Error(`${path}: unreadable manifest: ${(err as Error).message}`);
  }
  const parsed = manifestSchema.safeParse(doc);
  if (!parsed.success) {
    throw new Error(`${path}: invalid manifest: ${parsed.error.message}`);
  }
  const m = parsed.data;
  for (const trait of TRAITS) {
    if (!m.backbones[trait]) {
      throw new Error(`${path}: manifest missing backbone for trait ${trait}`);
    }
  }
  let pattern: RegExp;
  try {
    pattern = new RegExp(m.id_pattern);
  } catch (err) {
    throw new Error(`${path}: bad id_pattern: ${(err as Error).message}`);
  }
  return {
    imageDir: m.image_dir,
    idPattern: pattern,
    backbones: m.backbones as Record<Trait, string>,
    engine: m.engine,
  };
}
