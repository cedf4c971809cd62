/**
 * Pure chart builders: run data in, echarts options out.  Keeping these
 * side-effect free lets the tests assert on exactly the values that get
 * plotted.
 */

import type { EChartsOption, SeriesOption } from "echarts";

import type { Point, RunData, SummaryRow } from "./csv.js";

export type FigureKind = "rates" | "queues" | "summary_bars";

export interface TimeWindowMs {
  fromMs?: number;
  toMs?: number;
}

const MS = 1e6;

function clip(series: Point[], win: TimeWindowMs): Array<[number, number]> {
  const from = (win.fromMs ?? -Infinity) * MS;
  const to = (win.toMs ?? Infinity) * MS;
  const pts: Array<[number, number]> = [];
  let carried: Point | null = null;
  for (const p of series) {
    if (p.timeNs < from) {
      carried = p;
      continue;
    }
    if (p.timeNs > to) {
      break;
    }
    if (carried) {
      pts.push([from / MS, carried.value]); // value holding at window start
      carried = null;
    }
    pts.push([p.timeNs / MS, p.value]);
  }
  return pts;
}

/** Final plotted rate per VC; what the rates figure shows at its right edge. */
export function finalRates(run: RunData, win: TimeWindowMs = {}): Record<string, number> {
  const out: Record<string, number> = {};
  for (const [vc, series] of run.acr) {
    const pts = clip(series, win);
    if (pts.length > 0) {
      out[vc] = pts[pts.length - 1][1];
    }
  }
  return out;
}

export function ratesChart(run: RunData, win: TimeWindowMs = {}): EChartsOption {
  const series: SeriesOption[] = [];
  for (const [vc, samples] of run.acr) {
    series.push({
      name: vc,
      type: "line",
      step: "end",
      showSymbol: false,
      data: clip(samples, win),
    });
  }
  const optimal = run.meta.optimal_mbps ?? {};
  const marks = Object.entries(optimal).map(([vc, mbps]) => ({
    name: `optimal ${vc}`,
    yAxis: mbps,
    label: { formatter: `optimal ${vc}: ${mbps.toFixed(2)}`, position: "insideEndTop" as const },
  }));
  if (series.length > 0 && marks.length > 0) {
    series[0] = {
      ...series[0],
      markLine: { silent: true, symbol: "none", lineStyle: { type: "dashed" }, data: marks },
    } as SeriesOption;
  }
  return {
    title: { text: `Allowed cell rates: ${run.meta.scenario} / ${run.meta.column}` },
    legend: { top: 28 },
    xAxis: { type: "value", name: "time (ms)" },
    yAxis: { type: "value", name: "ACR (Mbps)" },
    series,
  };
}

export function queuesChart(run: RunData, win: TimeWindowMs = {}): EChartsOption {
  const series: SeriesOption[] = [];
  for (const [label, samples] of run.queues) {
    if (!label.includes(" abr:") && !label.includes(" vc:")) {
      continue; // only the ABR queues; VBR has no backlog story to tell
    }
    const pts = clip(samples, win);
    if (pts.every(([, v]) => v === 0)) {
      continue;
    }
    series.push({ name: label, type: "line", showSymbol: false, data: pts });
  }
  return {
    title: { text: `ABR queue backlog: ${run.meta.scenario} / ${run.meta.column}` },
    legend: { top: 28, type: "scroll" },
    xAxis: { type: "value", name: "time (ms)" },
    yAxis: { type: "value", name: "queue length (cells)" },
    series,
  };
}

const BAR_METRICS: Array<{ metric: string; title: string }> = [
  { metric: "response_ms", title: "response time (ms)" },
  { metric: "convergence_ms", title: "convergence time (ms)" },
  { metric: "max_queue_kcells", title: "max queue (Kcells)" },
  { metric: "throughput_kcells", title: "mean throughput (Kcells)" },
];

/** One subplot per metric; bars by column, one series per scenario. */
export function summaryBarsChart(rows: SummaryRow[]): EChartsOption {
  const scenarios = [...new Set(rows.map((r) => r.scenario))].sort();
  const preferred = ["A", "B", "C", "D", "E", "F", "nonvsvd"];
  const seen = new Set(rows.map((r) => r.column));
  const columns = [...preferred.filter((c) => seen.has(c)), ...[...seen].filter((c) => !preferred.includes(c)).sort()];

  const value = (scenario: string, column: string, metric: string): number | null => {
    if (metric === "throughput_kcells") {
      const ts = rows.filter(
        (r) => r.scenario === scenario && r.column === column && r.metric.startsWith("throughput_kcells:"),
      );
      const vals = ts.map((r) => r.value).filter((v): v is number => v !== null);
      return vals.length > 0 ? vals.reduce((a, b) => a + b, 0) / vals.length : null;
    }
    const row = rows.find((r) => r.scenario === scenario && r.column === column && r.metric === metric);
    return row ? row.value : null;
  };

  const grids = [];
  const xAxes = [];
  const yAxes = [];
  const titles = [];
  const series: SeriesOption[] = [];
  for (let i = 0; i < BAR_METRICS.length; i++) {
    const left = i % 2 === 0 ? "7%" : "57%";
    const top = i < 2 ? "8%" : "56%";
    grids.push({ left, top, width: "36%", height: "34%" });
    xAxes.push({ type: "category" as const, data: columns, gridIndex: i });
    yAxes.push({ type: "value" as const, gridIndex: i });
    titles.push({
      text: BAR_METRICS[i].title,
      textStyle: { fontSize: 12 },
      left,
      top: i < 2 ? "2%" : "50%",
    });
    for (const scenario of scenarios) {
      series.push({
        name: scenario,
        type: "bar",
        xAxisIndex: i,
        yAxisIndex: i,
        data: columns.map((c) => value(scenario, c, BAR_METRICS[i].metric)),
      });
    }
  }
  return {
    title: titles,
    legend: { bottom: 0 },
    grid: grids,
    xAxis: xAxes,
    yAxis: yAxes,
    series,
  };
}
