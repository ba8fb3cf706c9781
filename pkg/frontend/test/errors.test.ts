import { mkdtemp, rm, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { runCli } from "../src/cli.js";
import {
  CliError,
  ConfigError,
  ManifestError,
  fromCliFailure,
} from "../src/errors.js";

let dir: string;

beforeAll(async () => {
  dir = await mkdtemp(join(tmpdir(), "errors-test-"));
});

afterAll(async () => {
  await rm(dir, { recursive: true, force: true });
});

describe("stderr parsing", () => {
  it("maps exit 2 to ManifestError with the core message", () => {
    const err = fromCliFailure(2, "error [ManifestError]: manifest not found: x.json\n");
    expect(err).toBeInstanceOf(ManifestError);
    expect(err.code).toBe("ManifestError");
    expect(err.message).toBe("manifest not found: x.json");
  });

  it("maps exit 3 to ConfigError", () => {
    const err = fromCliFailure(3, "error [ConfigError]: unknown config key(s): ['nope']\n");
    expect(err).toBeInstanceOf(ConfigError);
  });

  it("carries arbitrary core codes on generic failures", () => {
    const err = fromCliFailure(1, "error [BadThreshold]: threshold must lie in (0, 1), got 2.0\n");
    expect(err).toBeInstanceOf(CliError);
    expect(err.code).toBe("BadThreshold");
    expect((err as CliError).exitCode).toBe(1);
  });

  it("degrades gracefully on unrecognized stderr", () => {
    const err = fromCliFailure(1, "Traceback (most recent call last): ...");
    expect(err).toBeInstanceOf(CliError);
    expect(err.code).toBe("CliError");
  });
});

describe("live process failures", () => {
  it("raises ManifestError for a missing manifest", async () => {
    const err = await runCli([
      "quantify", "-m", join(dir, "no-such.json"), "-o", join(dir, "out"),
    ]).catch((e) => e);
    expect(err).toBeInstanceOf(ManifestError);
    expect((err as ManifestError).code).toBe("ManifestError");
    expect((err as ManifestError).message).toMatch(/no-such\.json/);
  });

  it("raises ManifestError for malformed manifest JSON", async () => {
    const manifest = join(dir, "broken.json");
    await writeFile(manifest, "{not json");
    const err = await runCli([
      "quantify", "-m", manifest, "-o", join(dir, "out"),
    ]).catch((e) => e);
    expect(err).toBeInstanceOf(ManifestError);
  });

  it("raises ConfigError for a config the core rejects", async () => {
    const manifest = join(dir, "m.json");
    await writeFile(manifest, JSON.stringify({ images: [] }));
    const config = join(dir, "bad.toml");
    await writeFile(config, "[vessel]\nannulus = [3.0, 2.0]\n");
    const err = await runCli([
      "quantify", "-m", manifest, "-c", config, "-o", join(dir, "out"),
    ]).catch((e) => e);
    expect(err).toBeInstanceOf(ConfigError);
    expect((err as ConfigError).code).toBe("ConfigError");
  });
});
