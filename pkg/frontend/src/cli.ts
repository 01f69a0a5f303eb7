#!/usr/bin/env node
/** `fusebench-extract extract --manifest <json> --out <dir>` */

import { mkdirSync } from "node:fs";

import { extractFeatures } from "./extract.js";
import { loadManifest } from "./manifest.js";

function usage(): never {
  process.stderr.write("usage: fusebench-extract extract --manifest <json> --out <dir>\n");
  process.exit(2);
}

export function main(argv: string[]): number {
  if (argv[0] !== "extract") usage();
  let manifestPath: string | undefined;
  let outDir: string | undefined;
  for (let i = 1; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) usage();
    if (flag === "--manifest") manifestPath = value;
    else if (flag === "--out") outDir = value;
    else usage();
  }
  if (!manifestPath || !outDir) usage();

  try {
    const manifest = loadManifest(manifestPath);
    mkdirSync(outDir, { recursive: true });
    const result = extractFeatures(manifest, outDir);
    for (const path of result.written) process.stderr.write(`wrote ${path}\n`);
    if (result.skipped.length) {
      process.stderr.write(`skipped ${result.skipped.length} image(s), see skipped.json\n`);
      return 1;
    }
    return 0;
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 2;
  }
}

if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(main(process.argv.slice(2)));
}
