/**
 * The four figure kinds rendered from solver outputs:
 *
 *   energy         corrected-energy drift relative to t=0 (log y)
 *   norms          sup and H^s norms of u and u_t over time
 *   field-profile  u over the grid from one or more snapshots
 *   convergence    drift vs window length across runs, slope annotated
 */

import { existsSync, readFileSync, writeFileSync } from "node:fs";

import { column, parseSeries, SeriesTable } from "./csv.js";
import { componentReal, parseSnapshot, Snapshot } from "./nlwv.js";
import { BLACK, Color, GRAY, LIGHT_GRAY, PALETTE, Raster } from "./raster.js";

export type PlotKind = "energy" | "norms" | "field-profile" | "convergence";
export type AxisScale = "linear" | "log";

export const PLOT_KINDS: readonly PlotKind[] = ["energy", "norms", "field-profile", "convergence"];

export interface PlotRequest {
  kind: PlotKind;
  /** CSV paths (energy, norms, convergence) or snapshot paths (field-profile) */
  inputs: string[];
  output: string;
  xScale?: AxisScale;
  yScale?: AxisScale;
  width?: number;
  height?: number;
}

export interface RenderResult {
  output: string;
  /** fitted order, set by the convergence kind */
  order?: number;
  /** max |E_corrected(t) - E_corrected(0)| / |E_corrected(0)|, set by the energy kind */
  maxCorrectedDrift?: number;
}

interface SeriesData {
  xs: number[];
  ys: number[];
  label: string;
  color: Color;
  line: boolean;
  markers: boolean;
}

interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  xScale: AxisScale;
  yScale: AxisScale;
  width: number;
  height: number;
  annotations: string[];
  series: SeriesData[];
}

const MARGIN = { left: 80, right: 16, top: 36, bottom: 44 };

function formatTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    return v.toExponential(1).replace("e+", "e");
  }
  let s = v.toPrecision(4);
  if (s.includes(".")) s = s.replace(/\.?0+$/, "");
  return s;
}

function niceStep(rough: number): number {
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const r = rough / mag;
  if (r <= 1) return mag;
  if (r <= 2) return 2 * mag;
  if (r <= 5) return 5 * mag;
  return 10 * mag;
}

interface Axis {
  toPixel(v: number): number;
  ticks: number[];
  usable(v: number): boolean;
}

function makeAxis(
  scale: AxisScale,
  values: number[],
  pixLo: number,
  pixHi: number,
  what: string
): Axis {
  const usable =
    scale === "log" ? (v: number) => Number.isFinite(v) && v > 0 : (v: number) => Number.isFinite(v);
  const vals = values.filter(usable);
  if (vals.length === 0) {
    throw new Error(`no plottable ${what} values${scale === "log" ? " (log scale needs > 0)" : ""}`);
  }
  let lo = Math.min(...vals);
  let hi = Math.max(...vals);

  if (scale === "log") {
    if (lo === hi) {
      lo /= 10;
      hi *= 10;
    }
    const llo = Math.log10(lo);
    const lhi = Math.log10(hi);
    const ticks: number[] = [];
    for (let d = Math.ceil(llo); d <= Math.floor(lhi); d++) ticks.push(Math.pow(10, d));
    if (ticks.length < 2) {
      const step = (lhi - llo) / 4;
      for (let i = 0; i <= 4; i++) ticks.push(Math.pow(10, llo + i * step));
    }
    return {
      toPixel: (v) => pixLo + ((Math.log10(v) - llo) / (lhi - llo)) * (pixHi - pixLo),
      ticks,
      usable,
    };
  }

  if (lo === hi) {
    const pad = Math.max(Math.abs(lo) * 0.5, 0.5);
    lo -= pad;
    hi += pad;
  }
  const step = niceStep((hi - lo) / 5);
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return {
    toPixel: (v) => pixLo + ((v - lo) / (hi - lo)) * (pixHi - pixLo),
    ticks,
    usable,
  };
}

function drawChart(spec: ChartSpec): Raster {
  const r = new Raster(spec.width, spec.height);
  const left = MARGIN.left;
  const right = spec.width - MARGIN.right;
  const top = MARGIN.top;
  const bottom = spec.height - MARGIN.bottom;

  const xAxis = makeAxis(spec.xScale, spec.series.flatMap((s) => s.xs), left, right, "x");
  const yAxis = makeAxis(spec.yScale, spec.series.flatMap((s) => s.ys), bottom, top, "y");

  // gridlines and ticks
  for (const tv of xAxis.ticks) {
    const px = Math.round(xAxis.toPixel(tv));
    if (px < left || px > right) continue;
    r.line(px, top, px, bottom, LIGHT_GRAY);
    r.line(px, bottom, px, bottom + 4, BLACK);
    const label = formatTick(tv);
    r.text(px - Raster.textWidth(label) / 2, bottom + 8, label, BLACK);
  }
  for (const tv of yAxis.ticks) {
    const py = Math.round(yAxis.toPixel(tv));
    if (py < top || py > bottom) continue;
    r.line(left, py, right, py, LIGHT_GRAY);
    r.line(left - 4, py, left, py, BLACK);
    const label = formatTick(tv);
    r.text(left - 6 - Raster.textWidth(label), py - 3, label, BLACK);
  }

  // frame
  r.line(left, top, right, top, BLACK);
  r.line(left, bottom, right, bottom, BLACK);
  r.line(left, top, left, bottom, BLACK);
  r.line(right, top, right, bottom, BLACK);

  // data
  for (const s of spec.series) {
    let prevX: number | null = null;
    let prevY: number | null = null;
    for (let i = 0; i < s.xs.length; i++) {
      if (!xAxis.usable(s.xs[i]) || !yAxis.usable(s.ys[i])) {
        prevX = null;
        prevY = null;
        continue;
      }
      const px = xAxis.toPixel(s.xs[i]);
      const py = yAxis.toPixel(s.ys[i]);
      if (s.line && prevX !== null && prevY !== null) {
        r.line(prevX, prevY, px, py, s.color);
      }
      if (s.markers) {
        r.fillRect(Math.round(px) - 2, Math.round(py) - 2, 5, 5, s.color);
      }
      prevX = px;
      prevY = py;
    }
  }

  // title, axis labels, annotations, legend
  r.text(left, 10, spec.title, BLACK, 2);
  r.text(
    left + (right - left) / 2 - Raster.textWidth(spec.xLabel) / 2,
    spec.height - 14,
    spec.xLabel,
    BLACK
  );
  r.text(4, top - 12, spec.yLabel, BLACK);

  let ay = top + 6;
  for (const note of spec.annotations) {
    r.text(left + 8, ay, note, BLACK);
    ay += 12;
  }

  const legendW = Math.max(...spec.series.map((s) => Raster.textWidth(s.label)), 0) + 26;
  let ly = top + 6;
  for (const s of spec.series) {
    if (!s.label) continue;
    r.line(right - legendW, ly + 3, right - legendW + 14, ly + 3, s.color);
    r.text(right - legendW + 18, ly, s.label, BLACK);
    ly += 12;
  }

  return r;
}

function readSeriesFile(path: string): SeriesTable {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (e) {
    throw new Error(`cannot read ${path}: ${(e as Error).message}`);
  }
  return parseSeries(text, path);
}

function readSnapshotFile(path: string): Snapshot {
  let buf: Buffer;
  try {
    buf = readFileSync(path);
  } catch (e) {
    throw new Error(`cannot read ${path}: ${(e as Error).message}`);
  }
  return parseSnapshot(buf, path);
}

function requireRows(table: SeriesTable): void {
  if (table.rows.length === 0) {
    throw new Error(`${table.path}: CSV has a header but no data rows`);
  }
}

function relativeDrift(values: number[]): number[] {
  const scale = Math.max(Math.abs(values[0]), 1e-300);
  return values.map((v) => Math.abs(v - values[0]) / scale);
}

function renderEnergy(req: PlotRequest): RenderResult {
  const table = readSeriesFile(req.inputs[0]);
  requireRows(table);
  const t = column(table, "t");
  const corrected = relativeDrift(column(table, "E_corrected"));
  const uncorrected = relativeDrift(column(table, "E_total"));
  const raster = drawChart({
    title: "corrected energy drift",
    xLabel: "t",
    yLabel: "|E(t)-E(0)|/|E(0)|",
    xScale: req.xScale ?? "linear",
    yScale: req.yScale ?? "log",
    width: req.width ?? 800,
    height: req.height ?? 560,
    annotations: [],
    series: [
      { xs: t, ys: corrected, label: "E_corrected", color: PALETTE[0], line: true, markers: false },
      { xs: t, ys: uncorrected, label: "E_total", color: GRAY, line: true, markers: false },
    ],
  });
  writeFileSync(req.output, raster.toPng());
  return { output: req.output, maxCorrectedDrift: Math.max(...corrected) };
}

function renderNorms(req: PlotRequest): RenderResult {
  const table = readSeriesFile(req.inputs[0]);
  requireRows(table);
  const t = column(table, "t");
  const names = ["sup_u", "hs_u", "sup_ut", "hs_ut"] as const;
  const raster = drawChart({
    title: "solution norms",
    xLabel: "t",
    yLabel: "norm",
    xScale: req.xScale ?? "linear",
    yScale: req.yScale ?? "linear",
    width: req.width ?? 800,
    height: req.height ?? 560,
    annotations: [],
    series: names.map((name, i) => ({
      xs: t,
      ys: column(table, name),
      label: name,
      color: PALETTE[i % PALETTE.length],
      line: true,
      markers: false,
    })),
  });
  writeFileSync(req.output, raster.toPng());
  return { output: req.output };
}

function renderProfileHeatmap(req: PlotRequest, snap: Snapshot): RenderResult {
  const width = req.width ?? 800;
  const height = req.height ?? 560;
  const r = new Raster(width, height);
  const left = MARGIN.left;
  const right = width - MARGIN.right;
  const top = MARGIN.top;
  const bottom = height - MARGIN.bottom;

  const vals = componentReal(snap, 0);
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of vals) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  const span = hi > lo ? hi - lo : 1;
  const M = snap.M;
  for (let py = top; py < bottom; py++) {
    const j = Math.min(M - 1, Math.floor(((bottom - 1 - py) / (bottom - top)) * M));
    for (let px = left; px < right; px++) {
      const i = Math.min(M - 1, Math.floor(((px - left) / (right - left)) * M));
      const g = Math.round(255 * (1 - (vals[i * M + j] - lo) / span));
      r.set(px, py, [g, g, g]);
    }
  }
  r.line(left, top, right, top, BLACK);
  r.line(left, bottom, right, bottom, BLACK);
  r.line(left, top, left, bottom, BLACK);
  r.line(right, top, right, bottom, BLACK);
  r.text(left, 10, `field u[0] at t=${formatTick(snap.t)}`, BLACK, 2);
  r.text(left, height - 14, `box [0, 2L)^2, L=${formatTick(snap.L)}, M=${M}`, BLACK);
  r.text(left, height - 26, `range [${formatTick(lo)}, ${formatTick(hi)}], dark=high`, BLACK);
  writeFileSync(req.output, r.toPng());
  return { output: req.output };
}

function renderFieldProfile(req: PlotRequest): RenderResult {
  const snaps = req.inputs.map(readSnapshotFile);
  if (snaps[0].n === 2) {
    return renderProfileHeatmap(req, snaps[0]);
  }
  if (snaps[0].n !== 1) {
    throw new Error(`field-profile supports n in {1, 2}, snapshot has n=${snaps[0].n}`);
  }
  const series: SeriesData[] = [];
  let k = 0;
  for (const snap of snaps) {
    if (snap.n !== 1) {
      throw new Error("field-profile inputs mix 1-d and 2-d snapshots");
    }
    const h = (2 * snap.L) / snap.M;
    const xs = Array.from({ length: snap.M }, (_, j) => j * h);
    for (let c = 0; c < snap.N; c++) {
      const comp = componentReal(snap, c);
      const tag = snap.N > 1 ? `u[${c}] t=${formatTick(snap.t)}` : `t=${formatTick(snap.t)}`;
      series.push({
        xs,
        ys: Array.from(comp),
        label: tag,
        color: PALETTE[k++ % PALETTE.length],
        line: true,
        markers: false,
      });
    }
  }
  const raster = drawChart({
    title: "field profile",
    xLabel: "x",
    yLabel: "u",
    xScale: req.xScale ?? "linear",
    yScale: req.yScale ?? "linear",
    width: req.width ?? 800,
    height: req.height ?? 560,
    annotations: [],
    series,
  });
  writeFileSync(req.output, raster.toPng());
  return { output: req.output };
}

/** Least-squares slope and intercept of log(drift) against log(T). */
export function fitOrder(points: { T: number; drift: number }[]): { slope: number; intercept: number } {
  const lx = points.map((p) => Math.log(p.T));
  const ly = points.map((p) => Math.log(p.drift));
  const mx = lx.reduce((a, b) => a + b, 0) / lx.length;
  const my = ly.reduce((a, b) => a + b, 0) / ly.length;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < lx.length; i++) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx === 0) {
    throw new Error("convergence inputs share one window length, cannot fit an order");
  }
  const slope = sxy / sxx;
  return { slope, intercept: my - slope * mx };
}

function runPoint(path: string): { T: number; drift: number } {
  const table = readSeriesFile(path);
  requireRows(table);
  const T = Math.max(...column(table, "window_T"));
  if (!(T > 0)) {
    throw new Error(`${path}: column "window_T" has no positive entries`);
  }
  const drift = Math.max(...relativeDrift(column(table, "E_corrected")));
  if (!(drift > 0)) {
    throw new Error(`${path}: corrected-energy drift is exactly zero, nothing to fit`);
  }
  return { T, drift };
}

function renderConvergence(req: PlotRequest): RenderResult {
  if (req.inputs.length < 2) {
    throw new Error(`convergence needs at least 2 run CSVs, got ${req.inputs.length}`);
  }
  const points = req.inputs.map(runPoint).sort((a, b) => a.T - b.T);
  const { slope, intercept } = fitOrder(points);
  const fitXs = points.map((p) => p.T);
  const fitYs = fitXs.map((T) => Math.exp(intercept + slope * Math.log(T)));
  const raster = drawChart({
    title: "drift vs window length",
    xLabel: "window T",
    yLabel: "max |E(t)-E(0)|/|E(0)|",
    xScale: req.xScale ?? "log",
    yScale: req.yScale ?? "log",
    width: req.width ?? 800,
    height: req.height ?? 560,
    annotations: [`observed order ${slope.toFixed(2)}`],
    series: [
      {
        xs: points.map((p) => p.T),
        ys: points.map((p) => p.drift),
        label: "runs",
        color: PALETTE[0],
        line: false,
        markers: true,
      },
      { xs: fitXs, ys: fitYs, label: "fit", color: GRAY, line: true, markers: false },
    ],
  });
  writeFileSync(req.output, raster.toPng());
  return { output: req.output, order: slope };
}

export function render(req: PlotRequest): RenderResult {
  if (!PLOT_KINDS.includes(req.kind)) {
    throw new Error(`unknown plot kind "${req.kind}", expected one of ${PLOT_KINDS.join(", ")}`);
  }
  if (req.inputs.length === 0) {
    throw new Error("no input files given");
  }
  for (const p of req.inputs) {
    if (!existsSync(p)) {
      throw new Error(`input not found: ${p}`);
    }
  }
  switch (req.kind) {
    case "energy":
      return renderEnergy(req);
    case "norms":
      return renderNorms(req);
    case "field-profile":
      return renderFieldProfile(req);
    case "convergence":
      return renderConvergence(req);
  }
}
