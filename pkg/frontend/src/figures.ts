/**
 * The eight figure kinds, rendered from runner CSV directories.
 *
 * Color convention for the collapse figures: curves below the critical
 * point in greens, above in purples.
 */

import { existsSync } from "fs";
import path from "path";

import {
  CollapseRow, CurveRow, curveFamily, readCollapse, readFit, readInfo,
  readOtoc,
} from "./csv.js";
import { Series, buildChart, buildHeatmap } from "./svg.js";

export const FIGURE_KINDS = [
  "density_loglog", "survival_loglog", "spread_loglog", "collapse",
  "otoc_heatmap", "otoc_profile_collapse", "fidelity_vs_p", "info_vs_t",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface StyleOpts {
  width?: number;
  height?: number;
  title?: string;
}

const FAMILY_COLORS = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
  "#e377c2", "#17becf", "#bcbd22", "#7f7f7f",
];

const GREENS = ["#a1d99b", "#74c476", "#41ab5d", "#238b45", "#006d2c", "#00441b"];
const PURPLES = ["#bcbddc", "#9e9ac8", "#807dba", "#6a51a3", "#54278f", "#3f007d"];

function seriesLabel(p: number): string {
  return Number.isNaN(p) ? "run" : `p = ${p}`;
}

function loglogFigure(inputDir: string, column: keyof CurveRow,
                      semColumn: keyof CurveRow, yLabel: string,
                      title: string, style: StyleOpts): string {
  const family = curveFamily(inputDir);
  const series: Series[] = [];
  let i = 0;
  for (const [p, rows] of family) {
    series.push({
      x: rows.map((r) => r.t),
      y: rows.map((r) => r[column] as number),
      sem: rows.map((r) => r[semColumn] as number),
      color: FAMILY_COLORS[i % FAMILY_COLORS.length],
      label: seriesLabel(p),
    });
    i += 1;
  }
  // overlay the fitted power law when a fit table sits next to the curves
  const fitFile = path.join(inputDir, "fit.csv");
  if (existsSync(fitFile)) {
    const obsName = column === "P" ? "P" : column === "R2" ? "R2" : "rho";
    for (const fit of readFit(fitFile)) {
      if (fit.observable !== obsName || !Number.isFinite(fit.amplitude)) continue;
      const ts = [fit.window_lo, fit.window_hi];
      series.push({
        x: ts,
        y: ts.map((t) => fit.amplitude * Math.pow(t, fit.exponent)),
        color: "#ff8c00",
        label: `fit t^${fit.exponent.toFixed(3)}`,
        dash: "6,3",
        width: 1.8,
      });
    }
  }
  return buildChart({
    title: style.title ?? title,
    xLabel: "t",
    yLabel,
    xScale: "log",
    yScale: "log",
    series,
    width: style.width,
    height: style.height,
  });
}

function collapseSeries(rows: CollapseRow[], observable: string): Series[] {
  const series: Series[] = [];
  for (const branch of ["below", "above"] as const) {
    const palette = branch === "below" ? GREENS : PURPLES;
    const ps = [...new Set(rows.filter(
      (r) => r.observable === observable && r.branch === branch,
    ).map((r) => r.p))].sort((a, b) => a - b);
    ps.forEach((p, i) => {
      const pts = rows.filter(
        (r) => r.observable === observable && r.branch === branch && r.p === p,
      );
      series.push({
        x: pts.map((r) => r.x_scaled),
        y: pts.map((r) => r.y_scaled),
        color: palette[i % palette.length],
        label: `${branch} p = ${p}`,
      });
    });
  }
  if (series.length === 0) {
    throw new Error(`collapse.csv holds no below/above rows for "${observable}"`);
  }
  return series;
}

export function renderFigure(kind: FigureKind, inputDir: string,
                             style: StyleOpts = {}): string {
  switch (kind) {
    case "density_loglog":
      return loglogFigure(inputDir, "rho", "rho_sem", "rho(t)",
                          "Particle density", style);
    case "survival_loglog":
      return loglogFigure(inputDir, "P", "P_sem", "P(t)",
                          "Survival probability", style);
    case "spread_loglog":
      return loglogFigure(inputDir, "R2", "R2_sem", "R2(t)",
                          "Mean-squared spreading", style);

    case "collapse": {
      const rows = readCollapse(path.join(inputDir, "collapse.csv"));
      // one panel per call: density collapse is the canonical panel
      const obs = rows.some((r) => r.observable === "rho") ? "rho"
        : rows[0]?.observable;
      if (!obs) throw new Error("collapse.csv is empty");
      return buildChart({
        title: style.title ?? `Finite-time scaling collapse (${obs})`,
        xLabel: "t |p - p_c|^nu_par",
        yLabel: "rescaled observable",
        xScale: "log",
        yScale: "log",
        series: collapseSeries(rows, obs),
        width: style.width,
        height: style.height,
      });
    }

    case "otoc_heatmap": {
      const rows = readOtoc(path.join(inputDir, "otoc.csv"));
      const ts = [...new Set(rows.map((r) => r.t))].sort((a, b) => a - b);
      const xs = [...new Set(rows.map((r) => r.x))].sort((a, b) => a - b);
      const grid = ts.map(() => xs.map(() => 0));
      const ti = new Map(ts.map((t, i) => [t, i]));
      const xi = new Map(xs.map((x, i) => [x, i]));
      for (const r of rows) grid[ti.get(r.t)!][xi.get(r.x)!] = r.C_mean;
      return buildHeatmap({
        title: style.title ?? "Averaged OTOC C(x, t)",
        xLabel: "x",
        yLabel: "t",
        values: grid,
        rowCoords: ts,
        colCoords: xs,
        logColor: true,
        width: style.width,
        height: style.height,
      });
    }

    case "otoc_profile_collapse": {
      const rows = readCollapse(path.join(inputDir, "collapse.csv"))
        .filter((r) => r.observable === "otoc");
      if (rows.length === 0) {
        throw new Error("collapse.csv holds no otoc profile rows");
      }
      const ts = [...new Set(rows.map((r) => r.t))].sort((a, b) => a - b);
      const series: Series[] = ts.map((t, i) => {
        const pts = rows.filter((r) => r.t === t)
          .sort((a, b) => a.x_scaled - b.x_scaled);
        return {
          x: pts.map((r) => r.x_scaled),
          y: pts.map((r) => r.y_scaled),
          color: FAMILY_COLORS[i % FAMILY_COLORS.length],
          label: `t = ${t}`,
        };
      });
      return buildChart({
        title: style.title ?? "OTOC profile collapse at the critical point",
        xLabel: "x t^(-1/z)",
        yLabel: "C(x,t) t^(2 delta)",
        series,
        width: style.width,
        height: style.height,
      });
    }

    case "fidelity_vs_p": {
      const rows = readInfo(path.join(inputDir, "info.csv"));
      const tMax = Math.max(...rows.map((r) => r.t));
      const late = rows.filter((r) => r.t === tMax && Number.isFinite(r.F_mean))
        .sort((a, b) => a.p - b.p);
      if (late.length === 0) throw new Error("info.csv has no late-time fidelity");
      return buildChart({
        title: style.title ?? `Decoding fidelity at t = ${tMax}`,
        xLabel: "swap rate p",
        yLabel: "mean fidelity",
        series: [{
          x: late.map((r) => r.p),
          y: late.map((r) => r.F_mean),
          sem: late.map((r) => r.F_sem),
          color: "#1f77b4",
          markers: true,
        }],
        width: style.width,
        height: style.height,
        legend: false,
      });
    }

    case "info_vs_t": {
      const rows = readInfo(path.join(inputDir, "info.csv"));
      const ps = [...new Set(rows.map((r) => r.p))].sort((a, b) => a - b);
      const series: Series[] = ps.map((p, i) => {
        const pts = rows.filter((r) => r.p === p).sort((a, b) => a.t - b.t);
        return {
          x: pts.map((r) => r.t),
          y: pts.map((r) => r.Ic_E_mean),
          sem: pts.map((r) => r.Ic_E_sem),
          color: FAMILY_COLORS[i % FAMILY_COLORS.length],
          label: `p = ${p}`,
        };
      });
      return buildChart({
        title: style.title ?? "Coherent information into the radiation",
        xLabel: "t",
        yLabel: "I_c(A>E)",
        series,
        width: style.width,
        height: style.height,
      });
    }
  }
}
