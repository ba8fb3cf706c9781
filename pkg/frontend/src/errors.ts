/**
 * Typed errors for the client.
 *
 * Every error carries a short stable `code`. Errors raised by the core tool
 * cross the process boundary as `error [Code]: message` on stderr plus an
 * exit code (2 manifest, 3 config, 1 anything else); `fromCliFailure`
 * reconstructs the matching typed error so callers can switch on `code`
 * exactly as they would against the core error taxonomy.
 */

export class FundusQuantError extends Error {
  readonly code: string;

  constructor(code: string, message: string) {
    super(message);
    this.name = new.target.name;
    this.code = code;
  }
}

/** Manifest missing or malformed (core exit code 2). */
export class ManifestError extends FundusQuantError {
  constructor(message: string) {
    super("ManifestError", message);
  }
}

/** Configuration malformed or out of range (core exit code 3). */
export class ConfigError extends FundusQuantError {
  constructor(message: string) {
    super("ConfigError", message);
  }
}

/** Input rasters disagree in shape; checked before anything is written. */
export class ShapeMismatch extends FundusQuantError {
  constructor(message: string) {
    super("ShapeMismatch", message);
  }
}

/** A PNG produced by the core (or handed to us) could not be decoded. */
export class DecodeError extends FundusQuantError {
  constructor(message: string) {
    super("DecodeError", message);
  }
}

/** Locally rejected input (bad probability range, empty grid, ...). */
export class InvalidInput extends FundusQuantError {
  constructor(message: string) {
    super("InvalidInput", message);
  }
}

/**
 * Any other core failure; `code` is the core code string verbatim
 * (BadThreshold, DecodeError, NoFOV, ...), `exitCode` the process status.
 */
export class CliError extends FundusQuantError {
  readonly exitCode: number;
  readonly stderr: string;

  constructor(code: string, message: string, exitCode: number, stderr: string) {
    super(code, message);
    this.exitCode = exitCode;
    this.stderr = stderr;
  }
}

const STDERR_SHAPE = /error \[([A-Za-z]+)\]: (.*)/;

/** Map a non-zero CLI exit into the typed error mirroring the core code. */
export function fromCliFailure(exitCode: number, stderr: string): FundusQuantError {
  const m = STDERR_SHAPE.exec(stderr);
  const code = m?.[1] ?? "CliError";
  const message = m?.[2] ?? stderr.trim();
  if (exitCode === 2) return new ManifestError(message);
  if (exitCode === 3) return new ConfigError(message);
  return new CliError(code, message, exitCode, stderr);
}
