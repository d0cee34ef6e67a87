import { parseArgs } from "node:util";

import { AxisScale, PlotKind, PLOT_KINDS, render } from "./plots.js";

const USAGE = `usage: nlwave-plot --kind <kind> --in <path...> --out <image.png>
                   [--x-scale linear|log] [--y-scale linear|log]
                   [--width N] [--height N]

kinds:
  energy         corrected-energy drift relative to t=0 (one series.csv)
  norms          sup and H^s norms over time (one series.csv)
  field-profile  u over the grid (one or more .nlwv snapshots)
  convergence    drift vs window length with fitted order (two or more
                 series.csv from runs at different window lengths)

exits 0 only when the image was written.`;

function parseScale(value: string | undefined, flag: string): AxisScale | undefined {
  if (value === undefined) return undefined;
  if (value === "linear" || value === "log") return value;
  throw new Error(`${flag} must be "linear" or "log", got "${value}"`);
}

function parseSize(value: string | undefined, flag: string): number | undefined {
  if (value === undefined) return undefined;
  const n = Number(value);
  if (!Number.isInteger(n) || n < 120) {
    throw new Error(`${flag} must be an integer >= 120, got "${value}"`);
  }
  return n;
}

export function main(argv: string[]): number {
  let kind: string | undefined;
  let out: string | undefined;
  let inputs: string[];
  let xScale: AxisScale | undefined;
  let yScale: AxisScale | undefined;
  let width: number | undefined;
  let height: number | undefined;
  try {
    const { values, positionals } = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        kind: { type: "string" },
        in: { type: "string", multiple: true },
        out: { type: "string" },
        "x-scale": { type: "string" },
        "y-scale": { type: "string" },
        width: { type: "string" },
        height: { type: "string" },
        help: { type: "boolean", short: "h" },
      },
    });
    if (values.help) {
      console.log(USAGE);
      return 0;
    }
    kind = values.kind;
    out = values.out;
    // `--in a b c` puts b and c in the positionals; accept both spellings
    inputs = [...(values.in ?? []), ...positionals];
    xScale = parseScale(values["x-scale"], "--x-scale");
    yScale = parseScale(values["y-scale"], "--y-scale");
    width = parseSize(values.width, "--width");
    height = parseSize(values.height, "--height");
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    console.error(USAGE);
    return 1;
  }

  if (!kind || !out || inputs.length === 0) {
    console.error("error: --kind, --in, and --out are all required");
    console.error(USAGE);
    return 1;
  }

  try {
    const result = render({
      kind: kind as PlotKind,
      inputs,
      output: out,
      xScale,
      yScale,
      width,
      height,
    });
    console.log(`wrote ${result.output}`);
    if (result.order !== undefined) {
      console.log(`observed order: ${result.order.toFixed(3)}`);
    }
    return 0;
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    return 1;
  }
}

export { PLOT_KINDS };
