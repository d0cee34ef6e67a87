export { column, parseSeries, SchemaError, SERIES_COLUMNS } from "./csv.js";
export type { SeriesColumn, SeriesTable } from "./csv.js";
export { componentReal, parseSnapshot, SnapshotError } from "./nlwv.js";
export type { Snapshot } from "./nlwv.js";
export { crc32, encodePng, PNG_SIGNATURE } from "./png.js";
export { Raster, PALETTE } from "./raster.js";
export type { Color } from "./raster.js";
export { fitOrder, PLOT_KINDS, render } from "./plots.js";
export type { AxisScale, PlotKind, PlotRequest, RenderResult } from "./plots.js";
export { main } from "./cli.js";
