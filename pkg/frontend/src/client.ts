/**
 * High-level operations: quantify, metric, curate.
 *
 * Each call materializes its arrays in the documented file formats inside a
 * scratch directory, invokes the core executable on a matching manifest and
 * parses the files it wrote back. All numbers therefore come from the same
 * kernels the command line uses; nothing is recomputed on this side.
 */

import { mkdir, mkdtemp, readFile, rm, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { runCli, type CliOptions } from "./cli.js";
import { CliError, InvalidInput } from "./errors.js";
import { sameShape, type Mask, type ProbMap } from "./grid.js";
import { readMaskPng, writeMaskPng, writeProbmapPng } from "./png.js";
import type { Report } from "./report.js";

export type Laterality = "OD" | "OS" | "Unknown";

export interface QuantifyOptions extends CliOptions {
  /** Manifest image id; "image" when omitted. */
  imageId?: string;
  /** Known fovea center (x, y), forwarded as a manifest override. */
  foveaXy?: [number, number];
  /** Known laterality, forwarded as a manifest override. */
  laterality?: Laterality;
  umPerPx?: number;
  /** Raw TOML config text passed to the run. */
  configToml?: string;
  /** Keep all inputs and outputs here instead of a scratch directory. */
  workDir?: string;
}

async function inScratch<T>(workDir: string | undefined,
                            job: (dir: string) => Promise<T>): Promise<T> {
  let dir: string;
  if (workDir === undefined) {
    dir = await mkdtemp(join(tmpdir(), "fundusquant-client-"));
  } else {
    await mkdir(workDir, { recursive: true });
    dir = workDir;
  }
  try {
    return await job(dir);
  } finally {
    if (workDir === undefined) await rm(dir, { recursive: true, force: true });
  }
}

/**
 * Full biomarker report for one set of class masks.
 *
 * Class names follow the core taxonomy (aliases accepted); a name the
 * registry cannot resolve surfaces as a CliError with code "UnknownClass".
 */
export async function quantify(masks: Record<string, Mask>,
                               opts: QuantifyOptions = {}): Promise<Report> {
  const names = Object.keys(masks);
  if (names.length === 0) throw new InvalidInput("quantify needs at least one class mask");
  const first = masks[names[0]!]!;
  for (const name of names) sameShape(first, masks[name]!, `mask ${JSON.stringify(name)}`);

  const imageId = opts.imageId ?? "image";
  return inScratch(opts.workDir, async (dir) => {
    const entry: Record<string, unknown> = { image_id: imageId, masks: {} as Record<string, string> };
    let i = 0;
    for (const name of names) {
      const file = `m${i++}.png`;
      await writeMaskPng(join(dir, file), masks[name]!);
      (entry["masks"] as Record<string, string>)[name] = file;
    }
    if (opts.foveaXy !== undefined) entry["fovea_xy"] = opts.foveaXy;
    if (opts.laterality !== undefined) entry["laterality"] = opts.laterality;
    if (opts.umPerPx !== undefined) entry["um_per_px"] = opts.umPerPx;
    const manifest = join(dir, "manifest.json");
    await writeFile(manifest, JSON.stringify({ images: [entry] }));

    const args = ["quantify", "-m", manifest, "-o", join(dir, "out")];
    if (opts.configToml !== undefined) {
      const cfg = join(dir, "config.toml");
      await writeFile(cfg, opts.configToml);
      args.push("-c", cfg);
    }
    await runCli(args, opts);

    const reportPath = join(dir, "out", "reports", `${imageId}.json`);
    try {
      return JSON.parse(await readFile(reportPath, "utf-8")) as Report;
    } catch {
      // per-image failures keep exit code 0; the summary names the cause
      const summary = JSON.parse(await readFile(join(dir, "out", "summary.json"), "utf-8"));
      const failure = (summary.failures as { image_id: string; error: string; message: string }[])
        .find((f) => f.image_id === imageId);
      if (failure) throw new CliError(failure.error, failure.message, 0, "");
      throw new CliError("CliError", `report for ${imageId} missing from batch output`, 0, "");
    }
  });
}

export const METRIC_NAMES = ["dsc", "jac", "precision", "hd95", "cldice"] as const;
export type MetricName = (typeof METRIC_NAMES)[number];

export type MetricOutcome =
  | { status: "ok"; value: number }
  | { status: "undefined"; reason: string };

export interface MetricOptions extends CliOptions {
  /** Physical scale for hd95; ignored by the count metrics. */
  umPerPx?: number;
  workDir?: string;
}

function parseCsvLine(line: string): string[] {
  const out: string[] = [];
  let field = "";
  let quoted = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i]!;
    if (quoted) {
      if (ch === '"' && line[i + 1] === '"') { field += '"'; i++; }
      else if (ch === '"') quoted = false;
      else field += ch;
    } else if (ch === '"') {
      quoted = true;
    } else if (ch === ",") {
      out.push(field); field = "";
    } else {
      field += ch;
    }
  }
  out.push(field);
  return out;
}

const STATUS_SHAPE = /^undefined\(([A-Za-z]+)\)$/;

/** One segmentation-quality metric for a pred/gt pair. */
export async function metric(name: MetricName, pred: Mask, gt: Mask,
                             opts: MetricOptions = {}): Promise<MetricOutcome> {
  if (!METRIC_NAMES.includes(name)) {
    throw new InvalidInput(`unknown metric ${JSON.stringify(name)}; choose from ${METRIC_NAMES.join(", ")}`);
  }
  sameShape(pred, gt, "pred vs gt");

  return inScratch(opts.workDir, async (dir) => {
    await writeMaskPng(join(dir, "pred.png"), pred);
    await writeMaskPng(join(dir, "gt.png"), gt);
    const pair: Record<string, unknown> = {
      image_id: "pair", class: "mask", pred: "pred.png", gt: "gt.png",
    };
    if (opts.umPerPx !== undefined) pair["um_per_px"] = opts.umPerPx;
    const pairs = join(dir, "pairs.json");
    await writeFile(pairs, JSON.stringify({ pairs: [pair] }));
    const csvPath = join(dir, "metrics.csv");
    await runCli(["metrics", "-p", pairs, "-o", csvPath], opts);

    const lines = (await readFile(csvPath, "utf-8")).trimEnd().split("\n");
    const header = parseCsvLine(lines[0]!);
    const iImage = header.indexOf("image_id");
    const iMetric = header.indexOf("metric");
    const iValue = header.indexOf("value");
    const iStatus = header.indexOf("status");
    for (const line of lines.slice(1)) {
      const row = parseCsvLine(line);
      if (row[iImage] !== "pair" || row[iMetric] !== name) continue;
      if (row[iStatus] === "ok") return { status: "ok", value: JSON.parse(row[iValue]!) as number };
      const m = STATUS_SHAPE.exec(row[iStatus]!);
      return { status: "undefined", reason: m?.[1] ?? row[iStatus]! };
    }
    throw new CliError("CliError", `metric ${name} missing from CSV output`, 0, "");
  });
}

export interface RuleOutcome {
  rule: "disconnection" | "fragmentation" | "spurs";
  measured: number;
  threshold: number;
  violated: boolean;
}

export interface CurationVerdict {
  accepted: boolean;
  reasons: RuleOutcome[];
  stats: {
    n_components: number;
    largest_component_frac: number;
    n_spurs: number;
    spur_len_threshold: number;
  };
}

export interface CurateResult {
  accepted: boolean;
  /** Thresholded hard mask when accepted, else null. */
  mask: Mask | null;
  verdict: CurationVerdict;
}

export interface CurateOptions extends CliOptions {
  /** Class name recorded in the verdict; "Vessel" when omitted. */
  className?: string;
  /** Raw TOML config text for the topology rules. */
  configToml?: string;
  workDir?: string;
}

/** Threshold a probability map and judge the hard mask's topology. */
export async function curate(prob: ProbMap, threshold = 0.75,
                             opts: CurateOptions = {}): Promise<CurateResult> {
  const imageId = "probe";
  const className = opts.className ?? "Vessel";
  return inScratch(opts.workDir, async (dir) => {
    await writeProbmapPng(join(dir, "prob.png"), prob);
    const manifest = join(dir, "manifest.json");
    await writeFile(manifest, JSON.stringify({
      images: [{ image_id: imageId, probmaps: { [className]: "prob.png" } }],
    }));
    const args = ["curate", "-m", manifest, "-t", String(threshold), "-o", join(dir, "out")];
    if (opts.configToml !== undefined) {
      const cfg = join(dir, "config.toml");
      await writeFile(cfg, opts.configToml);
      args.push("-c", cfg);
    }
    await runCli(args, opts);

    const verdicts = JSON.parse(await readFile(join(dir, "out", "verdicts.json"), "utf-8"));
    const record = (verdicts.records as ({ image_id: string; class: string } & CurationVerdict)[])
      .find((r) => r.image_id === imageId && r.class === className);
    if (record === undefined) {
      throw new CliError("CliError", "verdict missing from curate output", 0, "");
    }
    const verdict: CurationVerdict = {
      accepted: record.accepted, reasons: record.reasons, stats: record.stats,
    };
    if (!verdict.accepted) return { accepted: false, mask: null, verdict };
    const maskFile = `${imageId}_${className.toLowerCase().replaceAll(" ", "_")}.png`;
    const m = await readMaskPng(join(dir, "out", "masks", maskFile));
    return { accepted: true, mask: m, verdict };
  });
}
