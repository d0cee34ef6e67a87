/**
 * Reader for the solver's series.csv output.
 *
 * The producer writes exactly these 16 columns, one header row, repr'd
 * floats, no quoting, '\n' line endings.  Validation failures name the
 * offending column (and row, where one exists).
 */

export const SERIES_COLUMNS = [
  "t",
  "E_total",
  "E_corrected",
  "E_kinetic",
  "E_disp_a",
  "E_disp_A",
  "E_zero_mode",
  "E_potential",
  "E_correction",
  "sup_u",
  "hs_u",
  "sup_ut",
  "hs_ut",
  "picard_iters",
  "contraction_ratio",
  "window_T",
] as const;

export type SeriesColumn = (typeof SERIES_COLUMNS)[number];

export interface SeriesTable {
  /** source path, kept for error messages downstream */
  path: string;
  /** rows[i][j] is column SERIES_COLUMNS[j] of data row i */
  rows: number[][];
}

export class SchemaError extends Error {}

export function parseSeries(text: string, path: string): SeriesTable {
  const lines = text.split(/\r?\n/);
  while (lines.length > 0 && lines[lines.length - 1] === "") lines.pop();
  if (lines.length === 0) {
    throw new SchemaError(`${path}: empty CSV, expected header starting with column "t"`);
  }

  const header = lines[0].split(",");
  for (let j = 0; j < SERIES_COLUMNS.length; j++) {
    if (header[j] !== SERIES_COLUMNS[j]) {
      const found = j < header.length ? `"${header[j]}"` : "nothing";
      throw new SchemaError(
        `${path}: header column ${j + 1} should be "${SERIES_COLUMNS[j]}", found ${found}`
      );
    }
  }
  if (header.length > SERIES_COLUMNS.length) {
    throw new SchemaError(
      `${path}: unexpected extra column "${header[SERIES_COLUMNS.length]}" in header`
    );
  }

  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== SERIES_COLUMNS.length) {
      throw new SchemaError(
        `${path}: row ${i} has ${cells.length} cells, expected ${SERIES_COLUMNS.length}`
      );
    }
    const row = new Array<number>(cells.length);
    for (let j = 0; j < cells.length; j++) {
      const v = Number(cells[j]);
      if (cells[j] === "" || !Number.isFinite(v)) {
        throw new SchemaError(
          `${path}: column "${SERIES_COLUMNS[j]}" row ${i} is not a finite number: "${cells[j]}"`
        );
      }
      row[j] = v;
    }
    rows.push(row);
  }
  return { path, rows };
}

export function column(table: SeriesTable, name: SeriesColumn): number[] {
  const j = SERIES_COLUMNS.indexOf(name);
  return table.rows.map((r) => r[j]);
}
