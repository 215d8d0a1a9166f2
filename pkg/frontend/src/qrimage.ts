import type { Ctx2D } from "./map.js";

/**
 * Parse PBM P1 text into a cell grid. Accepts packed digit rows as well
 * as whitespace-separated bits, and `#` comments per the format.
 */
export function parsePbm(text: string): boolean[][] {
  const tokens: string[] = [];
  for (const rawLine of text.split("\n")) {
    const hash = rawLine.indexOf("#");
    const line = hash === -1 ? rawLine : rawLine.slice(0, hash);
    for (const token of line.trim().split(/\s+/)) {
      if (token.length > 0) tokens.push(token);
    }
  }
  if (tokens[0] !== "P1") {
    throw new Error("not a PBM P1 image");
  }
  const width = Number(tokens[1]);
  const height = Number(tokens[2]);
  if (!Number.isInteger(width) || !Number.isInteger(height) || width < 1 || height < 1) {
    throw new Error("bad PBM dimensions");
  }
  const bits: boolean[] = [];
  for (const token of tokens.slice(3)) {
    for (const ch of token) {
      if (ch === "0") bits.push(false);
      else if (ch === "1") bits.push(true);
      else throw new Error(`unexpected PBM character ${JSON.stringify(ch)}`);
    }
  }
  if (bits.length !== width * height) {
    throw new Error(`PBM body has ${bits.length} bits, expected ${width * height}`);
  }
  const grid: boolean[][] = [];
  for (let row = 0; row < height; row += 1) {
    grid.push(bits.slice(row * width, (row + 1) * width));
  }
  return grid;
}

/** Paint a parsed PBM grid, dark modules as filled squares. */
export function drawQr(ctx: Ctx2D, grid: boolean[][], scale = 4): void {
  const side = grid.length * scale;
  ctx.fillStyle = "#fff";
  ctx.fillRect(0, 0, side, side);
  ctx.fillStyle = "#000";
  grid.forEach((row, r) => {
    row.forEach((dark, c) => {
      if (dark) ctx.fillRect(c * scale, r * scale, scale, scale);
    });
  });
}
