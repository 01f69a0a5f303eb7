/** Binary 8-bit PGM (P5) reader. Pixels come back as float64 in [0, 1],
 * row-major, matching the engine's image convention. */

export interface GrayImage {
  width: number;
  height: number;
  pixels: Float64Array;
}

export function readPgm(path: string, data: Buffer): GrayImage {
  const tokens: string[] = [];
  let i = 0;
  while (tokens.length < 4 && i < data.length) {
    const b = data[i];
    if (b === 0x20 || b === 0x09 || b === 0x0a || b === 0x0d) {
      i += 1;
    } else if (b === 0x23) {
      // comment: skip to end of line
      while (i < data.length && data[i] !== 0x0a) i += 1;
    } else {
      let j = i;
      while (j < data.length && !isSpace(data[j])) j += 1;
      tokens.push(data.subarray(i, j).toString("latin1"));
      i = j;
    }
  }
  if (tokens.length !== 4 || tokens[0] !== "P5") {
    throw new Error(`${path}: not a binary P5 PGM`);
  }
  const width = parseInt(tokens[1], 10);
  const height = parseInt(tokens[2], 10);
  const maxval = parseInt(tokens[3], 10);
  if (maxval !== 255) {
    throw new Error(`${path}: only 8-bit PGM supported (maxval ${maxval})`);
  }
  i += 1; // single whitespace after maxval
  const n = width * height;
  if (data.length - i < n) {
    throw new Error(`${path}: truncated pixel data`);
  }
  const pixels = new Float64Array(n);
  for (let k = 0; k < n; k++) pixels[k] = data[i + k] / 255.0;
  return { width, height, pixels };
}

function isSpace(b: number): boolean {
  return b === 0x20 || b === 0x09 || b === 0x0a || b === 0x0d;
}
