import * as echarts from "echarts";
import type { EChartsOption } from "echarts";

/** Render a chart option to an SVG string (no DOM needed). */
export function renderSvg(option: EChartsOption, width = 960, height = 540): string {
  const chart = echarts.init(null, null, { renderer: "svg", ssr: true, width, height });
  try {
    chart.setOption(option);
    return chart.renderToSVGString();
  } finally {
    chart.dispose();
  }
}
