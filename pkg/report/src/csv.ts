/**
 * Loading abrsim run directories.
 *
 * Schemas (written by the simulator CLI):
 *   acr.csv       time_ns, vc_id, acr_mbps
 *   queues.csv    time_ns, node_id, queue_id, cells
 *   delivered.csv time_ns, vc_id, cumulative_cells
 *   summary.csv   scenario, column, metric, value
 *   run.json      manifest with scenario/column/optimal_mbps
 */

import { existsSync, readFileSync } from "node:fs";
import { dirname, join } from "node:path";

export class CsvShapeError extends Error {
  constructor(
    public readonly file: string,
    detail: string,
  ) {
    super(`${file}: ${detail}`);
  }
}

export interface Point {
  timeNs: number;
  value: number;
}

export interface RunMeta {
  scenario: string;
  column: string;
  optimal_mbps?: Record<string, number>;
  bucket_ns?: number;
}

export interface RunData {
  dir: string;
  meta: RunMeta;
  /** per-VC allowed-cell-rate samples (change points) */
  acr: Map<string, Point[]>;
  /** per-(node, queue) backlog bucket maxima, keyed "node queue_id" */
  queues: Map<string, Point[]>;
  /** per-VC cumulative delivered cells */
  delivered: Map<string, Point[]>;
}

export interface SummaryRow {
  scenario: string;
  column: string;
  metric: string;
  value: number | null;
}

function readCsv(path: string, header: string[]): string[][] {
  if (!existsSync(path)) {
    throw new CsvShapeError(path, "file not found");
  }
  const lines = readFileSync(path, "utf8")
    .split("\n")
    .map((l) => (l.endsWith("\r") ? l.slice(0, -1) : l))
    .filter((l) => l.length > 0);
  if (lines.length === 0 || lines[0] !== header.join(",")) {
    throw new CsvShapeError(path, `expected header ${header.join(",")}, got ${lines[0] ?? "<empty>"}`);
  }
  const rows: string[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== header.length) {
      throw new CsvShapeError(path, `row ${i + 1} has ${cells.length} fields, expected ${header.length}`);
    }
    rows.push(cells);
  }
  return rows;
}

function groupSeries(rows: string[][], key: (r: string[]) => string, point: (r: string[]) => Point): Map<string, Point[]> {
  const out = new Map<string, Point[]>();
  for (const r of rows) {
    const k = key(r);
    let series = out.get(k);
    if (!series) {
      series = [];
      out.set(k, series);
    }
    series.push(point(r));
  }
  return out;
}

export function loadRunDir(dir: string): RunData {
  const metaPath = join(dir, "run.json");
  if (!existsSync(metaPath)) {
    throw new CsvShapeError(metaPath, "file not found");
  }
  const meta = JSON.parse(readFileSync(metaPath, "utf8")) as RunMeta;
  const acrRows = readCsv(join(dir, "acr.csv"), ["time_ns", "vc_id", "acr_mbps"]);
  const queueRows = readCsv(join(dir, "queues.csv"), ["time_ns", "node_id", "queue_id", "cells"]);
  const deliveredRows = readCsv(join(dir, "delivered.csv"), ["time_ns", "vc_id", "cumulative_cells"]);
  return {
    dir,
    meta,
    acr: groupSeries(acrRows, (r) => r[1], (r) => ({ timeNs: Number(r[0]), value: Number(r[2]) })),
    queues: groupSeries(queueRows, (r) => `${r[1]} ${r[2]}`, (r) => ({ timeNs: Number(r[0]), value: Number(r[3]) })),
    delivered: groupSeries(deliveredRows, (r) => r[1], (r) => ({ timeNs: Number(r[0]), value: Number(r[2]) })),
  };
}

/** summary.csv sits next to a run dir (or is passed directly). */
export function findSummary(dir: string): string | null {
  for (const candidate of [join(dir, "summary.csv"), join(dirname(dir), "summary.csv")]) {
    if (existsSync(candidate)) {
      return candidate;
    }
  }
  return null;
}

export function loadSummary(path: string): SummaryRow[] {
  return readCsv(path, ["scenario", "column", "metric", "value"]).map((r) => ({
    scenario: r[0],
    column: r[1],
    metric: r[2],
    value: r[3] === "" ? null : Number(r[3]),
  }));
}
