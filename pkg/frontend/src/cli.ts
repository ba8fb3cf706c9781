/**
 * Process boundary: every operation shells out to the `fundusquant`
 * executable and communicates through files, never through imports.
 */

import { execFile } from "node:child_process";

import { fromCliFailure } from "./errors.js";

export interface CliOptions {
  /** Executable to spawn; FUNDUSQUANT_BIN env var, then "fundusquant". */
  bin?: string;
  /** Working directory for the invocation. */
  cwd?: string;
}

export interface CliResult {
  stdout: string;
  stderr: string;
}

export function resolveBin(opts?: CliOptions): string {
  return opts?.bin ?? process.env["FUNDUSQUANT_BIN"] ?? "fundusquant";
}

/** Run a subcommand; non-zero exit becomes the matching typed error. */
export function runCli(args: string[], opts?: CliOptions): Promise<CliResult> {
  return new Promise((resolve, reject) => {
    execFile(resolveBin(opts), args, { cwd: opts?.cwd, maxBuffer: 64 * 1024 * 1024 },
             (err, stdout, stderr) => {
      if (err === null) {
        resolve({ stdout, stderr });
        return;
      }
      const anyErr = err as NodeJS.ErrnoException & { code?: number | string };
      if (typeof anyErr.code === "number") {
        reject(fromCliFailure(anyErr.code, stderr));
      } else {
        // spawn failure (executable missing, EACCES, ...)
        reject(err);
      }
    });
  });
}
