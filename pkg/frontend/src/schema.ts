/**
 * Readers for the result files a `chaoshedge` run emits:
 * report.json, learning_curve.csv, payoff_scatter.csv, hedge_paths.csv.
 *
 * Every reader validates the columns/fields it consumes and throws a
 * `SchemaError` naming the offending file and column, so a stale or
 * hand-edited results directory fails loudly instead of producing an
 * empty-looking figure.
 */

import { readFileSync } from "node:fs";
import { basename } from "node:path";
import { csvParseRows } from "d3-dsv";
import { z } from "zod";

/** A results file is missing, unreadable, or lacks an expected column. */
export class SchemaError extends Error {
  readonly file: string;

  constructor(file: string, detail: string) {
    super(`${file}: ${detail}`);
    this.name = "SchemaError";
    this.file = file;
  }
}

function readText(path: string): string {
  try {
    return readFileSync(path, "utf8");
  } catch (cause) {
    const reason = cause instanceof Error ? cause.message : String(cause);
    throw new SchemaError(basename(path), `cannot read file (${reason})`);
  }
}

/**
 * Parse a CSV file into a header row plus data rows, verifying that every
 * required column is present. Returns the header (for discovering optional
 * columns such as the per-order prediction columns) and the raw rows.
 */
function readCsv(
  path: string,
  required: readonly string[],
): { header: string[]; rows: string[][] } {
  const file = basename(path);
  const table = csvParseRows(readText(path));
  if (table.length === 0) {
    throw new SchemaError(file, "empty file: expected a header row");
  }
  const header = table[0];
  for (const column of required) {
    if (!header.includes(column)) {
      throw new SchemaError(file, `missing column "${column}"`);
    }
  }
  return { header, rows: table.slice(1) };
}

/** Cell accessor bound to one CSV file, for uniform error reporting. */
class RowReader {
  constructor(
    private readonly file: string,
    private readonly header: string[],
  ) {}

  private cell(row: string[], column: string, rowIndex: number): string {
    const at = this.header.indexOf(column);
    const value = row[at];
    if (value === undefined) {
      throw new SchemaError(
        this.file,
        `row ${rowIndex + 2} is truncated: no value for column "${column}"`,
      );
    }
    return value;
  }

  /** Required numeric cell. */
  num(row: string[], column: string, rowIndex: number): number {
    const raw = this.cell(row, column, rowIndex);
    const value = Number(raw);
    if (raw.trim() === "" || Number.isNaN(value)) {
      throw new SchemaError(
        this.file,
        `row ${rowIndex + 2}, column "${column}": expected a number, got "${raw}"`,
      );
    }
    return value;
  }

  /** Numeric cell where the harness writes an empty string for "not available". */
  numOrNull(row: string[], column: string, rowIndex: number): number | null {
    const raw = this.cell(row, column, rowIndex);
    if (raw.trim() === "") {
      return null;
    }
    return this.num(row, column, rowIndex);
  }
}

// ---------------------------------------------------------------------------
// learning_curve.csv

export interface LearningCurveRow {
  order: number;
  nParams: number;
  trainMse: number | null;
  testMse: number | null;
  imseTest: number | null;
  runtimeSeconds: number | null;
}

export const LEARNING_CURVE_COLUMNS = [
  "N",
  "n_params",
  "train_mse",
  "test_mse",
  "imse_test",
  "runtime_seconds",
] as const;

export function readLearningCurve(path: string): LearningCurveRow[] {
  const { header, rows } = readCsv(path, LEARNING_CURVE_COLUMNS);
  const reader = new RowReader(basename(path), header);
  return rows.map((row, i) => ({
    order: reader.num(row, "N", i),
    nParams: reader.num(row, "n_params", i),
    trainMse: reader.numOrNull(row, "train_mse", i),
    testMse: reader.numOrNull(row, "test_mse", i),
    imseTest: reader.numOrNull(row, "imse_test", i),
    runtimeSeconds: reader.numOrNull(row, "runtime_seconds", i),
  }));
}

// ---------------------------------------------------------------------------
// payoff_scatter.csv

export interface PayoffSample {
  pathIds: number[];
  payoffTrue: number[];
  /** One series per fitted order, taken from the pred_N<order> columns. */
  predictions: { order: number; values: number[] }[];
}

export function readPayoffScatter(path: string): PayoffSample {
  const { header, rows } = readCsv(path, ["path_id", "payoff_true"]);
  const file = basename(path);
  const reader = new RowReader(file, header);

  const predColumns: { order: number; column: string }[] = [];
  for (const column of header) {
    const match = /^pred_N(\d+)$/.exec(column);
    if (match) {
      predColumns.push({ order: Number(match[1]), column });
    }
  }

  const sample: PayoffSample = {
    pathIds: [],
    payoffTrue: [],
    predictions: predColumns.map(({ order }) => ({ order, values: [] })),
  };
  rows.forEach((row, i) => {
    sample.pathIds.push(reader.num(row, "path_id", i));
    sample.payoffTrue.push(reader.num(row, "payoff_true", i));
    predColumns.forEach(({ column }, j) => {
      sample.predictions[j].values.push(reader.num(row, column, i));
    });
  });
  return sample;
}

// ---------------------------------------------------------------------------
// hedge_paths.csv

export interface HedgePoint {
  pathId: number;
  t: number;
  asset: number;
  thetaHat: number;
  thetaRef: number | null;
}

export const HEDGE_PATH_COLUMNS = [
  "path_id",
  "t",
  "asset",
  "theta_hat",
  "theta_ref",
] as const;

export function readHedgePaths(path: string): HedgePoint[] {
  const { header, rows } = readCsv(path, HEDGE_PATH_COLUMNS);
  const reader = new RowReader(basename(path), header);
  return rows.map((row, i) => ({
    pathId: reader.num(row, "path_id", i),
    t: reader.num(row, "t", i),
    asset: reader.num(row, "asset", i),
    thetaHat: reader.num(row, "theta_hat", i),
    thetaRef: reader.numOrNull(row, "theta_ref", i),
  }));
}

// ---------------------------------------------------------------------------
// report.json

const reportDocument = z.object({
  config: z.object({
    model: z.object({ kind: z.string() }).passthrough(),
    payoff: z.object({ kind: z.string() }).passthrough(),
    n_paths: z.number(),
  }).passthrough(),
  n_train: z.number(),
  n_test: z.number(),
  oracle: z.object({
    available: z.boolean(),
    note: z.string(),
  }).passthrough(),
  orders: z.array(z.object({ order: z.number() }).passthrough()),
}).passthrough();

export interface ReportInfo {
  modelKind: string;
  payoffKind: string;
  nPaths: number;
  nTrain: number;
  nTest: number;
  oracleAvailable: boolean;
  oracleNote: string;
}

export function readReport(path: string): ReportInfo {
  const file = basename(path);
  let doc: unknown;
  try {
    doc = JSON.parse(readText(path));
  } catch (cause) {
    if (cause instanceof SchemaError) {
      throw cause;
    }
    const reason = cause instanceof Error ? cause.message : String(cause);
    throw new SchemaError(file, `invalid JSON (${reason})`);
  }
  const parsed = reportDocument.safeParse(doc);
  if (!parsed.success) {
    const issue = parsed.error.issues[0];
    const where = issue.path.join(".") || "(document root)";
    throw new SchemaError(file, `invalid field "${where}": ${issue.message}`);
  }
  const report = parsed.data;
  return {
    modelKind: report.config.model.kind,
    payoffKind: report.config.payoff.kind,
    nPaths: report.config.n_paths,
    nTrain: report.n_train,
    nTest: report.n_test,
    oracleAvailable: report.oracle.available,
    oracleNote: report.oracle.note,
  };
}
