import { describe, expect, it } from "vitest";

import { drawQr, parsePbm } from "../src/qrimage.js";
import type { Ctx2D } from "../src/map.js";

describe("parsePbm", () => {
  it("reads packed digit rows", () => {
    expect(parsePbm("P1\n2 2\n10\n01\n")).toEqual([
      [true, false],
      [false, true],
    ]);
  });

  it("reads whitespace-separated bits and comments", () => {
    const text = "P1\n# made by a test\n3 2\n1 0 0\n0 1 1\n";
    expect(parsePbm(text)).toEqual([
      [true, false, false],
      [false, true, true],
    ]);
  });

  it("accepts dimensions and bits split across arbitrary lines", () => {
    expect(parsePbm("P1 2\n2 11\n00")).toEqual([
      [true, true],
      [false, false],
    ]);
  });

  it("rejects images that are not P1", () => {
    expect(() => parsePbm("P4\n2 2\n10\n01\n")).toThrow(/not a PBM/);
  });

  it("rejects bodies with the wrong number of bits", () => {
    expect(() => parsePbm("P1\n2 2\n101\n")).toThrow(/expected 4/);
    expect(() => parsePbm("P1\n2 2\n10101\n")).toThrow(/expected 4/);
  });

  it("rejects junk characters and bad dimensions", () => {
    expect(() => parsePbm("P1\n2 2\n1x\n01\n")).toThrow(/unexpected/);
    expect(() => parsePbm("P1\n0 2\n")).toThrow(/dimensions/);
    expect(() => parsePbm("P1\nq 2\n")).toThrow(/dimensions/);
  });
});

describe("drawQr", () => {
  it("paints one filled square per dark module over a light ground", () => {
    const rects: Array<[number, number, number, number]> = [];
    const fills: string[] = [];
    let style = "";
    const ctx = {
      strokeStyle: "",
      lineWidth: 0,
      font: "",
      beginPath: () => {},
      moveTo: () => {},
      lineTo: () => {},
      stroke: () => {},
      arc: () => {},
      fill: () => {},
      fillRect: (x: number, y: number, w: number, h: number) => {
        rects.push([x, y, w, h]);
        fills.push(style);
      },
      clearRect: () => {},
      fillText: () => {},
      set fillStyle(value: string) { style = value; },
      get fillStyle() { return style; },
    } as Ctx2D;
    drawQr(ctx, [[true, false], [false, true]], 5);
    expect(rects[0]).toEqual([0, 0, 10, 10]);
    expect(fills[0]).toBe("#fff");
    expect(rects.slice(1)).toEqual([[0, 0, 5, 5], [5, 5, 5, 5]]);
    expect(fills.slice(1)).toEqual(["#000", "#000"]);
  });
});
