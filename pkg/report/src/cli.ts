/**
 * report <run-dir> [--kind rates|queues|summary_bars] [--out <path>]
 *        [--from-ms N] [--to-ms N]
 *
 * Renders one SVG per requested figure kind; with no --kind all three
 * are written.  --out names the output file for a single kind, or the
 * output directory otherwise (default: the run directory itself).
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { basename, dirname, extname, join } from "node:path";

import type { FigureKind, TimeWindowMs } from "./charts.js";
import { queuesChart, ratesChart, summaryBarsChart } from "./charts.js";
import { CsvShapeError, findSummary, loadRunDir, loadSummary } from "./csv.js";
import { renderSvg } from "./render.js";

const KINDS: FigureKind[] = ["rates", "queues", "summary_bars"];

interface Args {
  runDir: string;
  kind?: FigureKind;
  out?: string;
  window: TimeWindowMs;
}

function usage(): never {
  console.error("usage: report <run-dir> [--kind rates|queues|summary_bars] [--out <path>] [--from-ms N] [--to-ms N]");
  process.exit(2);
}

function parseArgs(argv: string[]): Args {
  const args: Args = { runDir: "", window: {} };
  const rest = [...argv];
  while (rest.length > 0) {
    const a = rest.shift()!;
    if (a === "--kind") {
      const k = rest.shift();
      if (!k || !KINDS.includes(k as FigureKind)) {
        usage();
      }
      args.kind = k as FigureKind;
    } else if (a === "--out") {
      args.out = rest.shift() ?? usage();
    } else if (a === "--from-ms") {
      args.window.fromMs = Number(rest.shift() ?? usage());
    } else if (a === "--to-ms") {
      args.window.toMs = Number(rest.shift() ?? usage());
    } else if (a.startsWith("--")) {
      usage();
    } else if (args.runDir === "") {
      args.runDir = a;
    } else {
      usage();
    }
  }
  if (args.runDir === "") {
    usage();
  }
  return args;
}

export function buildFigure(kind: FigureKind, runDir: string, window: TimeWindowMs) {
  if (kind === "summary_bars") {
    const summary = findSummary(runDir);
    if (summary === null) {
      throw new CsvShapeError(join(runDir, "summary.csv"), "file not found (looked beside and above the run dir)");
    }
    return summaryBarsChart(loadSummary(summary));
  }
  const run = loadRunDir(runDir);
  return kind === "rates" ? ratesChart(run, window) : queuesChart(run, window);
}

export function main(argv: string[]): number {
  const args = parseArgs(argv);
  const kinds = args.kind ? [args.kind] : KINDS;
  for (const kind of kinds) {
    let outPath: string;
    if (args.kind && args.out && extname(args.out) !== "") {
      outPath = args.out;
    } else {
      const dir = args.out ?? args.runDir;
      outPath = join(dir, `${basename(args.runDir)}__${kind}.svg`);
    }
    try {
      const svg = renderSvg(buildFigure(kind, args.runDir, args.window));
      mkdirSync(dirname(outPath), { recursive: true });
      writeFileSync(outPath, svg);
      console.log(`wrote ${outPath}`);
    } catch (err) {
      if (err instanceof CsvShapeError) {
        console.error(`error: ${err.message}`);
        return 1;
      }
      throw err;
    }
  }
  return 0;
}

const invoked = process.argv[1] ?? "";
if (basename(invoked) === "cli.js" || basename(invoked) === "abrsim-report") {
  process.exit(main(process.argv.slice(2)));
}
