import { existsSync, mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { main } from "../src/cli.js";

const golden = (rel: string) => fileURLToPath(new URL(`./golden/${rel}`, import.meta.url));
const out = mkdtempSync(join(tmpdir(), "plotkit-cli-"));

describe("nlwave-plot", () => {
  it("exits 0 and writes the image", () => {
    const file = join(out, "energy.png");
    const code = main(["--kind", "energy", "--in", golden("linear/series.csv"), "--out", file]);
    expect(code).toBe(0);
    expect(existsSync(file)).toBe(true);
  });

  it("accepts space-separated inputs after --in", () => {
    const file = join(out, "conv.png");
    const code = main([
      "--kind",
      "convergence",
      "--in",
      golden("conv_0.1/series.csv"),
      golden("conv_0.05/series.csv"),
      golden("conv_0.025/series.csv"),
      "--out",
      file,
    ]);
    expect(code).toBe(0);
    expect(existsSync(file)).toBe(true);
  });

  it("accepts repeated --in flags and axis options", () => {
    const file = join(out, "profile.png");
    const code = main([
      "--kind",
      "field-profile",
      "--in",
      golden("linear/state_000000.nlwv"),
      "--in",
      golden("linear/state_000010.nlwv"),
      "--out",
      file,
      "--y-scale",
      "linear",
      "--width",
      "640",
      "--height",
      "480",
    ]);
    expect(code).toBe(0);
    expect(existsSync(file)).toBe(true);
  });

  it("exits 1 on an empty CSV and writes nothing", () => {
    const empty = join(out, "empty.csv");
    writeFileSync(empty, "");
    const file = join(out, "never.png");
    expect(main(["--kind", "energy", "--in", empty, "--out", file])).toBe(1);
    expect(existsSync(file)).toBe(false);
  });

  it("exits 1 on an unknown kind", () => {
    expect(
      main(["--kind", "pie", "--in", golden("linear/series.csv"), "--out", join(out, "x.png")])
    ).toBe(1);
  });

  it("exits 1 when required flags are missing", () => {
    expect(main([])).toBe(1);
    expect(main(["--kind", "energy"])).toBe(1);
    expect(main(["--kind", "energy", "--in", golden("linear/series.csv")])).toBe(1);
  });

  it("exits 1 on a bad axis scale", () => {
    expect(
      main([
        "--kind",
        "energy",
        "--in",
        golden("linear/series.csv"),
        "--out",
        join(out, "x.png"),
        "--y-scale",
        "cubic",
      ])
    ).toBe(1);
  });

  it("exits 1 on an unknown flag", () => {
    expect(main(["--kind", "energy", "--frobnicate"])).toBe(1);
  });

  it("prints usage and exits 0 on --help", () => {
    expect(main(["--help"])).toBe(0);
  });
});
