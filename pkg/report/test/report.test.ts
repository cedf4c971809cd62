import { execFileSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { beforeAll, describe, expect, it } from "vitest";

import { finalRates, ratesChart, queuesChart, summaryBarsChart } from "../src/charts.js";
import { buildFigure, main } from "../src/cli.js";
import { CsvShapeError, loadRunDir, loadSummary, findSummary } from "../src/csv.js";
import { renderSvg } from "../src/render.js";

const GOLDEN_CONFIG = `
[[run]]
scenario = "parking_lot"
arch = "vsvd"
preset = "D"

[[run]]
scenario = "two_src_vbr"
arch = "vsvd"
[run.options]
vc_rate = "frm2_ccr"
input_rate = "per_class"
congestion = "prev_only"
alloc_update = "frm_only"
`;

let out: string;
let parkingDir: string;
let divergedDir: string;

beforeAll(() => {
  // golden runs come from the simulator's own CLI: the CSV schemas are
  // the only interface between the two packages
  out = mkdtempSync(join(tmpdir(), "abrsim-report-"));
  const cfg = join(out, "golden.toml");
  writeFileSync(cfg, GOLDEN_CONFIG);
  execFileSync("python3", ["-m", "abrsim.cli", "run", cfg, "--out", out, "--workers", "2"], {
    stdio: "pipe",
  });
  parkingDir = join(out, "parking_lot__D");
  divergedDir = join(out, "two_src_vbr__custom");
}, 240_000);

describe("run-dir loading", () => {
  it("parses all three csv files plus the manifest", () => {
    const run = loadRunDir(parkingDir);
    expect(run.meta.scenario).toBe("parking_lot");
    expect(run.meta.column).toBe("D");
    expect([...run.acr.keys()].sort()).toEqual(["S1", "S2", "S3"]);
    expect(run.queues.size).toBeGreaterThan(0);
    expect(run.delivered.size).toBe(3);
  });

  it("rejects a missing file by name", () => {
    expect(() => loadRunDir(join(out, "no_such_run"))).toThrowError(/no_such_run.*run\.json.*not found/);
  });

  it("rejects a shape mismatch by file and row", () => {
    const broken = mkdtempSync(join(tmpdir(), "abrsim-broken-"));
    for (const name of ["run.json", "acr.csv", "queues.csv", "delivered.csv"]) {
      writeFileSync(join(broken, name), readFileSync(join(parkingDir, name)));
    }
    writeFileSync(join(broken, "acr.csv"), "time_ns,vc_id,acr_mbps\n1,2\n");
    expect(() => loadRunDir(broken)).toThrowError(CsvShapeError);
    expect(() => loadRunDir(broken)).toThrowError(/acr\.csv: row 2/);
  });
});

describe("figures", () => {
  it("renders the rates figure for the golden parking-lot run", () => {
    const svg = renderSvg(ratesChart(loadRunDir(parkingDir)));
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg).toContain("optimal S1");
  });

  it("plots every parking-lot VC ending inside the fair-share band", () => {
    const run = loadRunDir(parkingDir);
    const finals = finalRates(run);
    expect(Object.keys(finals).sort()).toEqual(["S1", "S2", "S3"]);
    for (const vc of ["S1", "S2", "S3"]) {
      expect(finals[vc]).toBeGreaterThanOrEqual(46.66 * 0.9);
      expect(finals[vc]).toBeLessThanOrEqual(46.66 * 1.1);
    }
  });

  it("renders the queue figure for the diverging run", () => {
    const run = loadRunDir(divergedDir);
    const svg = renderSvg(queuesChart(run));
    expect(svg.startsWith("<svg")).toBe(true);
    // the misconfigured coupling grows the bottleneck queue cycle over cycle
    const backbone = [...run.queues.entries()].find(([k]) => k === "SW1 abr:SW2");
    expect(backbone).toBeDefined();
    const peak = Math.max(...backbone![1].map((p) => p.value));
    expect(peak).toBeGreaterThan(10_000);
  });

  it("renders summary bars from the shared summary.csv", () => {
    const summary = findSummary(parkingDir);
    expect(summary).not.toBeNull();
    const svg = renderSvg(summaryBarsChart(loadSummary(summary!)));
    expect(svg.startsWith("<svg")).toBe(true);
  });

  it("renders empty axes for an empty time window", () => {
    const option = ratesChart(loadRunDir(parkingDir), { fromMs: 500, toMs: 600 });
    const svg = renderSvg(option);
    expect(svg.startsWith("<svg")).toBe(true);
  });
});

describe("cli", () => {
  it("writes one svg per kind by default", () => {
    expect(main([parkingDir])).toBe(0);
    for (const kind of ["rates", "queues", "summary_bars"]) {
      expect(existsSync(join(parkingDir, `parking_lot__D__${kind}.svg`))).toBe(true);
    }
  });

  it("honors --kind and --out", () => {
    const target = join(out, "figs", "div.svg");
    expect(main([divergedDir, "--kind", "queues", "--out", target])).toBe(0);
    expect(readFileSync(target, "utf8").startsWith("<svg")).toBe(true);
  });

  it("exits nonzero and names the file on a missing run dir", () => {
    expect(main([join(out, "missing")])).toBe(1);
  });

  it("summary_bars demands a reachable summary.csv", () => {
    const orphan = mkdtempSync(join(tmpdir(), "abrsim-orphan-"));
    for (const name of ["run.json", "acr.csv", "queues.csv", "delivered.csv"]) {
      writeFileSync(join(orphan, name), readFileSync(join(parkingDir, name)));
    }
    expect(() => buildFigure("summary_bars", orphan, {})).toThrowError(/summary\.csv/);
  });
});
