/** Deterministic embedding backbones, addressed by pinned identifier.
 *
 * The engine treats features as opaque unit-scale vectors, so any fixed
 * image->vector map works as a stand-in for a trained network. The shipped
 * backbone resamples a crop to a fixed grid, takes a 2D DCT-II, keeps the
 * low-frequency block and L2-normalizes. Pure float arithmetic, no RNG, no
 * external weights: identical inputs give identical bytes on every run.
 * Results are written as float32, matching the feature-file payload width.
 */

import { GrayImage } from "./pgm.js";

export type Backbone = (image: GrayImage) => Float32Array;

const GRID = 32; // resample target (GRID x GRID)
const KEEP = 16; // low-frequency block kept per axis -> KEEP*KEEP dims

export const EMBED_DIM = KEEP * KEEP;

/** Area-weighted box resample to GRID x GRID (handles fractional boxes). */
function resample(img: GrayImage): Float64Array {
  const out = new Float64Array(GRID * GRID);
  const sx = img.width / GRID;
  const sy = img.height / GRID;
  for (let oy = 0; oy < GRID; oy++) {
    const y0 = oy * sy;
    const y1 = (oy + 1) * sy;
    for (let ox = 0; ox < GRID; ox++) {
      const x0 = ox * sx;
      const x1 = (ox + 1) * sx;
      let acc = 0;
      let area = 0;
      for (let py = Math.floor(y0); py < y1; py++) {
        const wy = Math.min(py + 1, y1) - Math.max(py, y0);
        if (wy <= 0) continue;
        for (let px = Math.floor(x0); px < x1; px++) {
          const wx = Math.min(px + 1, x1) - Math.max(px, x0);
          if (wx <= 0) continue;
          acc += img.pixels[py * img.width + px] * wx * wy;
          area += wx * wy;
        }
      }
      out[oy * GRID + ox] = acc / area;
    }
  }
  return out;
}

const cosTable = new Float64Array(GRID * GRID);
for (let u = 0; u < GRID; u++) {
  for (let x = 0; x < GRID; x++) {
    cosTable[u * GRID + x] = Math.cos(((2 * x + 1) * u * Math.PI) / (2 * GRID));
  }
}

/** Orthonormal 2D DCT-II of a GRID x GRID field; returns full coefficient grid. */
function dct2(field: Float64Array): Float64Array {
  const tmp = new Float64Array(GRID * GRID);
  // rows
  for (let y = 0; y < GRID; y++) {
    for (let u = 0; u < GRID; u++) {
      let s = 0;
      for (let x = 0; x < GRID; x++) s += field[y * GRID + x] * cosTable[u * GRID + x];
      const a = (u === 0 ? Math.sqrt(1 / GRID) : Math.sqrt(2 / GRID));
      tmp[y * GRID + u] = a * s;
    }
  }
  const out = new Float64Array(GRID * GRID);
  // columns
  for (let u = 0; u < GRID; u++) {
    for (let v = 0; v < GRID; v++) {
      let s = 0;
      for (let y = 0; y < GRID; y++) s += tmp[y * GRID + u] * cosTable[v * GRID + y];
      const a = (v === 0 ? Math.sqrt(1 / GRID) : Math.sqrt(2 / GRID));
      out[v * GRID + u] = a * s;
    }
  }
  return out;
}

function blockDct(image: GrayImage): Float32Array {
  if (image.width < 1 || image.height < 1) {
    throw new Error("backbone: empty image");
  }
  const coef = dct2(resample(image));
  const vec = new Float64Array(EMBED_DIM);
  for (let v = 0; v < KEEP; v++) {
    for (let u = 0; u < KEEP; u++) vec[v * KEEP + u] = coef[v * GRID + u];
  }
  let norm = 0;
  for (let k = 0; k < EMBED_DIM; k++) norm += vec[k] * vec[k];
  norm = Math.sqrt(norm);
  if (norm === 0) {
    throw new Error("backbone: degenerate all-zero embedding");
  }
  const out = new Float32Array(EMBED_DIM);
  for (let k = 0; k < EMBED_DIM; k++) out[k] = Math.fround(vec[k] / norm);
  return out;
}

const REGISTRY: Record<string, Backbone> = {
  "blockdct-256@v1": blockDct,
};

export function resolveBackbone(id: string): Backbone {
  const fn = REGISTRY[id];
  if (!fn) {
    throw new Error(
      `unknown backbone ${JSON.stringify(id)}; available: ${Object.keys(REGISTRY).join(", ")}`,
    );
  }
  return fn;
}
