export {
  CliError,
  ConfigError,
  DecodeError,
  FundusQuantError,
  InvalidInput,
  ManifestError,
  ShapeMismatch,
  fromCliFailure,
} from "./errors.js";
export { countForeground, mask, probmap, sameShape } from "./grid.js";
export type { Mask, ProbMap } from "./grid.js";
export {
  decodeGray,
  encodeGray,
  readMaskPng,
  readProbmapPng,
  writeMaskPng,
  writeProbmapPng,
} from "./png.js";
export type { DecodedGray } from "./png.js";
export { resolveBin, runCli } from "./cli.js";
export type { CliOptions, CliResult } from "./cli.js";
export { countMetrics, isLeaf, metricLeaves } from "./report.js";
export type { Leaf, OkLeaf, Report, ReportNode, UndefinedLeaf } from "./report.js";
export { METRIC_NAMES, curate, metric, quantify } from "./client.js";
export type {
  CurateOptions,
  CurateResult,
  CurationVerdict,
  Laterality,
  MetricName,
  MetricOptions,
  MetricOutcome,
  QuantifyOptions,
  RuleOutcome,
} from "./client.js";
