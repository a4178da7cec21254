/**
 * Figure construction and rendering.
 *
 * Three kinds, mirroring the benchmark study's plots:
 *  - scatter:  closed-loop spectral radius vs parameter error;
 *  - error:    median learning error vs horizon T, one curve per k (log y,
 *              k = 2 omitted by default: its error dwarfs the others);
 *  - pct:      stabilization percentage vs horizon T, one curve per k.
 *
 * Curve colors follow the k convention: 2 blue, 3 red, 4 green, 5 black.
 * Charts render server-side to SVG (echarts SSR) and rasterize to PNG
 * (resvg); with pinned versions the bytes are a pure function of the CSV.
 */

import * as echarts from "echarts";
import { Resvg } from "@resvg/resvg-js";
import {
  aggregateCells,
  applyFilters,
  distinct,
  Filters,
} from "./aggregate";
import {
  readScatterCsv,
  readTrialCsv,
  SchemaMismatchError,
} from "./schema";

export type FigureKind = "scatter" | "error" | "pct";

export interface FigureSpec {
  kind: FigureKind;
  input: string;
  output: string;
  algo?: string;
  sigma?: number;
  includeK2?: boolean;
  width?: number;
  height?: number;
}

export const K_COLORS: Record<number, string> = {
  2: "#1f6fd6", // blue
  3: "#d62728", // red
  4: "#2ca02c", // green
  5: "#000000", // black
};

const FONT = "DejaVu Sans";

function baseOption(title: string): echarts.EChartsOption {
  return {
    animation: false,
    backgroundColor: "#ffffff",
    textStyle: { fontFamily: FONT },
    title: { text: title, left: "center", textStyle: { fontSize: 14 } },
    grid: { left: 70, right: 30, top: 60, bottom: 55 },
  };
}

function scatterOption(spec: FigureSpec): echarts.EChartsOption {
  const rows = readScatterCsv(spec.input);
  const points = rows
    .filter((r) => Number.isFinite(r.closed_loop_radius))
    .map((r) => [r.perturbation_norm, r.closed_loop_radius]);
  return {
    ...baseOption("Closed-loop spectral radius vs parameter error"),
    xAxis: { type: "value", name: "parameter error", nameLocation: "middle", nameGap: 30 },
    yAxis: { type: "value", name: "spectral radius", nameLocation: "middle", nameGap: 45 },
    series: [
      {
        type: "scatter",
        symbolSize: 5,
        itemStyle: { color: "#1f6fd6", opacity: 0.55 },
        data: points,
      },
      {
        // stability boundary
        type: "line",
        markLine: {
          silent: true,
          symbol: "none",
          lineStyle: { color: "#888888", type: "dashed" },
          label: { formatter: "radius = 1", fontFamily: FONT },
          data: [{ yAxis: 1 }],
        },
        data: [],
      },
    ],
  };
}

interface Curve {
  name: string;
  k: number;
  algo: string;
  points: [number, number][];
}

function buildCurves(
  spec: FigureSpec,
  value: (cell: { medianError: number; stabilizedPct: number }) => number,
  requireFinite: boolean,
): Curve[] {
  const filters: Filters = { algo: spec.algo, sigma: spec.sigma };
  const rows = applyFilters(readTrialCsv(spec.input), filters);
  if (rows.length === 0) {
    throw new SchemaMismatchError("no rows left after filtering");
  }
  const sigmas = distinct(rows.map((r) => r.sigma));
  if (sigmas.length > 1) {
    throw new SchemaMismatchError(
      `several sigma values present (${sigmas.join(", ")}); pass --sigma to pick one`,
    );
  }
  const cells = aggregateCells(rows);
  const algos = distinct(cells.map((c) => c.algo)).sort();
  const ks = distinct(cells.map((c) => c.k)).sort((a, b) => a - b);
  const curves: Curve[] = [];
  for (const algo of algos) {
    for (const k of ks) {
      if (k === 2 && spec.kind === "error" && !spec.includeK2) continue;
      const points = cells
        .filter((c) => c.algo === algo && c.k === k)
        .sort((a, b) => a.T - b.T)
        .map((c) => [c.T, value(c)] as [number, number])
        .filter((p) => !requireFinite || Number.isFinite(p[1]));
      if (points.length === 0) continue;
      const name = algos.length > 1 ? `${algo} k = ${k}` : `k = ${k}`;
      curves.push({ name, k, algo, points });
    }
  }
  return curves;
}

function curvesOption(
  spec: FigureSpec,
  curves: Curve[],
  title: string,
  yAxis: echarts.EChartsOption["yAxis"],
): echarts.EChartsOption {
  const algos = distinct(curves.map((c) => c.algo)).sort();
  return {
    ...baseOption(title),
    legend: { bottom: 0, data: curves.map((c) => c.name), textStyle: { fontFamily: FONT } },
    xAxis: { type: "log", name: "T", nameLocation: "middle", nameGap: 30 },
    yAxis,
    series: curves.map((c) => ({
      name: c.name,
      type: "line",
      symbol: "circle",
      symbolSize: 6,
      data: c.points,
      itemStyle: { color: K_COLORS[c.k] ?? "#7f7f7f" },
      lineStyle: {
        color: K_COLORS[c.k] ?? "#7f7f7f",
        type: algos.length > 1 && c.algo === "sp" ? "dashed" : "solid",
      },
    })),
  };
}

function errorOption(spec: FigureSpec): echarts.EChartsOption {
  const curves = buildCurves(spec, (c) => c.medianError, true);
  if (curves.length === 0) {
    throw new SchemaMismatchError("no finite medians to plot");
  }
  return curvesOption(
    spec, curves, "Median learning error vs T",
    { type: "log", name: "median error", nameLocation: "middle", nameGap: 50 },
  );
}

function pctOption(spec: FigureSpec): echarts.EChartsOption {
  const curves = buildCurves(spec, (c) => c.stabilizedPct, false);
  return curvesOption(
    spec, curves, "Stabilization percentage vs T",
    { type: "value", min: 0, max: 100, name: "% stabilized", nameLocation: "middle", nameGap: 45 },
  );
}

export function buildOption(spec: FigureSpec): echarts.EChartsOption {
  switch (spec.kind) {
    case "scatter":
      return scatterOption(spec);
    case "error":
      return errorOption(spec);
    case "pct":
      return pctOption(spec);
    default:
      throw new SchemaMismatchError(`unknown figure kind ${JSON.stringify(spec.kind)}`);
  }
}

export function renderToSvg(spec: FigureSpec): string {
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width: spec.width ?? 800,
    height: spec.height ?? 560,
  });
  try {
    chart.setOption(buildOption(spec));
    return chart.renderToSVGString();
  } finally {
    chart.dispose();
  }
}

export function renderToPng(spec: FigureSpec): Buffer {
  const svg = renderToSvg(spec);
  const resvg = new Resvg(svg, {
    font: { loadSystemFonts: true, defaultFontFamily: FONT },
    background: "#ffffff",
  });
  return resvg.render().asPng();
}
