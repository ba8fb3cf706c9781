import { mkdtemp, readFile, rm, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { runCli } from "../src/cli.js";
import { InvalidInput, ShapeMismatch } from "../src/errors.js";
import { metric } from "../src/client.js";
import { mask, type Mask } from "../src/grid.js";
import { writeMaskPng } from "../src/png.js";
import { Canvas, mulberry32, randomMask } from "./phantom.js";

let dir: string;

beforeAll(async () => {
  dir = await mkdtemp(join(tmpdir(), "metrics-test-"));
});

afterAll(async () => {
  await rm(dir, { recursive: true, force: true });
});

/** tp / pred-only / gt-only pixel counts, straight from the arrays. */
function counts(pred: Mask, gt: Mask): { tp: number; fp: number; fn: number } {
  let tp = 0, fp = 0, fn = 0;
  for (let i = 0; i < pred.data.length; i++) {
    const p = pred.data[i]!, g = gt.data[i]!;
    if (p && g) tp++;
    else if (p) fp++;
    else if (g) fn++;
  }
  return { tp, fp, fn };
}

describe("count metrics match pixel arithmetic exactly", () => {
  it("agrees with the oracle on seeded random pairs", async () => {
    const rand = mulberry32(99);
    for (let trial = 0; trial < 4; trial++) {
      const pred = randomMask(24, 24, rand, 0.35);
      const gt = randomMask(24, 24, rand, 0.35);
      const { tp, fp, fn } = counts(pred, gt);
      const dsc = await metric("dsc", pred, gt);
      const jac = await metric("jac", pred, gt);
      const prec = await metric("precision", pred, gt);
      expect(dsc).toEqual({ status: "ok", value: (2 * tp) / (2 * tp + fp + fn) });
      expect(jac).toEqual({ status: "ok", value: tp / (tp + fp + fn) });
      expect(prec).toEqual({ status: "ok", value: tp / (tp + fp) });
    }
  });

  it("agrees with the oracle across a 40-pair batch in one invocation", async () => {
    const rand = mulberry32(7);
    const where = join(dir, "batch");
    const pairs: { image_id: string; pred: string; gt: string }[] = [];
    const expected = new Map<string, { dsc: number; jac: number; precision: number }>();
    await rm(where, { recursive: true, force: true });
    const { mkdir } = await import("node:fs/promises");
    await mkdir(where, { recursive: true });
    for (let i = 0; i < 40; i++) {
      const pred = randomMask(16, 16, rand, 0.4);
      const gt = randomMask(16, 16, rand, 0.4);
      await writeMaskPng(join(where, `p${i}.png`), pred);
      await writeMaskPng(join(where, `g${i}.png`), gt);
      pairs.push({ image_id: `r${i}`, pred: `p${i}.png`, gt: `g${i}.png` });
      const { tp, fp, fn } = counts(pred, gt);
      expected.set(`r${i}`, {
        dsc: (2 * tp) / (2 * tp + fp + fn),
        jac: tp / (tp + fp + fn),
        precision: tp / (tp + fp),
      });
    }
    const manifest = join(where, "pairs.json");
    await writeFile(manifest, JSON.stringify({ pairs }));
    const csvPath = join(where, "out.csv");
    await runCli(["metrics", "-p", manifest, "-o", csvPath]);
    const lines = (await readFile(csvPath, "utf-8")).trimEnd().split("\n").slice(1);
    let checked = 0;
    for (const line of lines) {
      const [, imageId, , name, value, status] = line.split(",");
      const want = expected.get(imageId!);
      if (want === undefined || !(name! in want)) continue;
      expect(status).toBe("ok");
      expect(JSON.parse(value!)).toBe(want[name as keyof typeof want]);
      checked++;
    }
    expect(checked).toBe(120);
  });

  it("reproduces the overlap fixture: |pred| 10, |gt| 8, 6 shared", async () => {
    const pred = new Canvas(16, 16).rect(2, 2, 11, 2).toMask();  // 10 px row
    const gt = new Canvas(16, 16).rect(6, 2, 13, 2).toMask();    // 8 px row, 6 shared
    expect(await metric("dsc", pred, gt)).toEqual({ status: "ok", value: 12 / 18 });
    expect(await metric("jac", pred, gt)).toEqual({ status: "ok", value: 6 / 12 });
    expect(await metric("precision", pred, gt)).toEqual({ status: "ok", value: 6 / 10 });
  });
});

describe("boundary and topology metrics", () => {
  it("scores identical masks perfectly", async () => {
    const m = new Canvas(24, 24).disk(12, 12, 6).toMask();
    expect(await metric("hd95", m, m)).toEqual({ status: "ok", value: 0 });
    expect(await metric("cldice", m, m)).toEqual({ status: "ok", value: 1 });
  });

  it("reads a uniform shift out of hd95", async () => {
    // 1-px vertical lines 3 apart: every boundary pixel is exactly 3 away
    const pred = new Canvas(24, 24).line(13, 4, 13, 19, 1).toMask();
    const gt = new Canvas(24, 24).line(10, 4, 10, 19, 1).toMask();
    expect(await metric("hd95", pred, gt)).toEqual({ status: "ok", value: 3 });
  });

  it("scales hd95 by the physical pixel size", async () => {
    const pred = new Canvas(24, 24).line(13, 4, 13, 19, 1).toMask();
    const gt = new Canvas(24, 24).line(10, 4, 10, 19, 1).toMask();
    expect(await metric("hd95", pred, gt, { umPerPx: 2.5 }))
      .toEqual({ status: "ok", value: 7.5 });
  });

  it("gives clDice 1.0 when the centerline is contained", async () => {
    // gt: full-width 1-px line; pred: the same line dilated to 3 rows
    const gt = new Canvas(32, 32).rect(0, 16, 31, 16).toMask();
    const pred = new Canvas(32, 32).rect(0, 15, 31, 17).toMask();
    expect(await metric("cldice", pred, gt)).toEqual({ status: "ok", value: 1 });
  });
});

describe("undefined outcomes and validation", () => {
  const empty = (n: number) => mask(n, n, new Uint8Array(n * n));

  it("reports precision of an empty prediction as undefined", async () => {
    const gt = new Canvas(16, 16).rect(4, 4, 8, 8).toMask();
    expect(await metric("precision", empty(16), gt))
      .toEqual({ status: "undefined", reason: "NoPositives" });
  });

  it("reports hd95 with one empty side as undefined", async () => {
    const gt = new Canvas(16, 16).rect(4, 4, 8, 8).toMask();
    expect(await metric("hd95", empty(16), gt))
      .toEqual({ status: "undefined", reason: "EmptyMask" });
  });

  it("scores two empty masks as a perfect match", async () => {
    expect(await metric("dsc", empty(8), empty(8))).toEqual({ status: "ok", value: 1 });
    expect(await metric("hd95", empty(8), empty(8))).toEqual({ status: "ok", value: 0 });
  });

  it("rejects mismatched shapes before spawning anything", async () => {
    const a = new Canvas(16, 16).rect(1, 1, 2, 2).toMask();
    const b = new Canvas(16, 8).rect(1, 1, 2, 2).toMask();
    await expect(metric("dsc", a, b)).rejects.toThrow(ShapeMismatch);
  });

  it("rejects unknown metric names locally", async () => {
    const m = new Canvas(8, 8).rect(1, 1, 2, 2).toMask();
    await expect(metric("hausdorff" as never, m, m)).rejects.toThrow(InvalidInput);
  });
});
