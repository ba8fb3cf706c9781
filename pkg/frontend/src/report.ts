/**
 * Shape of the JSON report and small helpers for walking it.
 *
 * Every metric in a report is a leaf object: status "ok" with a value, or
 * status "undefined" with a machine-readable reason. Everything above the
 * leaves is plain nesting.
 */

export interface OkLeaf {
  value: number | string | boolean;
  status: "ok";
}

export interface UndefinedLeaf {
  value: null;
  status: "undefined";
  reason: string;
}

export type Leaf = OkLeaf | UndefinedLeaf;

export type ReportNode = Leaf | { [key: string]: ReportNode } | number | string;

export interface Report {
  schema_version: number;
  artifact_version: string;
  image_id: string;
  config_fingerprint: string;
  n_metrics: number;
  [section: string]: ReportNode;
}

export function isLeaf(node: unknown): node is Leaf {
  return typeof node === "object" && node !== null && !Array.isArray(node)
    && "status" in node;
}

/** Yield [dottedPath, leaf] for every metric leaf, in schema order. */
export function* metricLeaves(report: Report): Generator<[string, Leaf]> {
  function* walk(node: { [key: string]: ReportNode }, prefix: string): Generator<[string, Leaf]> {
    for (const [key, val] of Object.entries(node)) {
      const path = prefix ? `${prefix}.${key}` : key;
      if (isLeaf(val)) {
        yield [path, val];
      } else if (typeof val === "object" && val !== null) {
        yield* walk(val as { [key: string]: ReportNode }, path);
      }
    }
  }
  yield* walk(report as unknown as { [key: string]: ReportNode }, "");
}

export function countMetrics(report: Report): number {
  let n = 0;
  for (const _ of metricLeaves(report)) n++;
  return n;
}
