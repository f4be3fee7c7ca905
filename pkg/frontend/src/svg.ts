/**
 * Minimal deterministic SVG chart builder: linear/log axes, line series,
 * optional error bands, cell heatmaps with a logarithmic color scale.
 * No timestamps or random ids, so identical inputs give identical bytes.
 */

export type Scale = "linear" | "log";

export interface Series {
  x: number[];
  y: number[];
  sem?: number[];
  color: string;
  label?: string;
  width?: number;
  dash?: string;
  markers?: boolean;
}

export interface ChartOpts {
  title: string;
  xLabel: string;
  yLabel: string;
  xScale?: Scale;
  yScale?: Scale;
  series: Series[];
  width?: number;
  height?: number;
  legend?: boolean;
}

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function niceTicksLinear(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((n) => n >= rough) ?? rough;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step * 1e-9; v += step) ticks.push(v);
  return ticks;
}

function decadeTicks(min: number, max: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(min) - 1e-9); Math.pow(10, e) <= max * (1 + 1e-9); e++) {
    ticks.push(Math.pow(10, e));
  }
  if (ticks.length < 2) {
    // narrow range: fall back to 1-2-5 sub-decade ticks
    ticks.length = 0;
    const e0 = Math.floor(Math.log10(min));
    const e1 = Math.ceil(Math.log10(max));
    for (let e = e0; e <= e1; e++) {
      for (const m of [1, 2, 5]) {
        const v = m * Math.pow(10, e);
        if (v >= min * (1 - 1e-9) && v <= max * (1 + 1e-9)) ticks.push(v);
      }
    }
    if (ticks.length === 0) ticks.push(min, max);
  }
  return ticks;
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(0).replace("+", "");
  return Number(v.toPrecision(3)).toString();
}

interface Mapper {
  (v: number): number;
}

function makeScale(scale: Scale, lo: number, hi: number, out0: number, out1: number): Mapper {
  if (scale === "log") {
    const l0 = Math.log10(lo);
    const l1 = Math.log10(hi);
    return (v) => out0 + ((Math.log10(v) - l0) / (l1 - l0 || 1)) * (out1 - out0);
  }
  return (v) => out0 + ((v - lo) / (hi - lo || 1)) * (out1 - out0);
}

function finitePoints(s: Series, xScale: Scale, yScale: Scale): [number, number][] {
  const pts: [number, number][] = [];
  for (let i = 0; i < s.x.length; i++) {
    const x = s.x[i];
    const y = s.y[i];
    if (!Number.isFinite(x) || !Number.isFinite(y)) continue;
    if (xScale === "log" && x <= 0) continue;
    if (yScale === "log" && y <= 0) continue;
    pts.push([x, y]);
  }
  return pts;
}

export function buildChart(opts: ChartOpts): string {
  const W = opts.width ?? 640;
  const H = opts.height ?? 420;
  const xScale = opts.xScale ?? "linear";
  const yScale = opts.yScale ?? "linear";
  const ml = 64;
  const mr = 16;
  const mt = 34;
  const mb = 48;

  const pts = opts.series.map((s) => finitePoints(s, xScale, yScale));
  const allX = pts.flat().map((p) => p[0]);
  const allY = pts.flat().map((p) => p[1]);
  if (allX.length === 0) throw new Error(`no plottable points for "${opts.title}"`);
  let xLo = Math.min(...allX);
  let xHi = Math.max(...allX);
  let yLo = Math.min(...allY);
  let yHi = Math.max(...allY);
  if (xScale === "linear") {
    const pad = 0.02 * (xHi - xLo || 1);
    xLo -= pad;
    xHi += pad;
  }
  if (yScale === "linear") {
    const pad = 0.05 * (yHi - yLo || 1);
    yLo -= pad;
    yHi += pad;
  } else {
    yLo /= 1.3;
    yHi *= 1.3;
  }

  const xOf = makeScale(xScale, xLo, xHi, ml, W - mr);
  const yOf = makeScale(yScale, yLo, yHi, H - mb, mt);

  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${W}" height="${H}" fill="#fff"/>\n`;
  s += `<text x="${ml}" y="${mt - 14}" font-size="13" font-weight="600" fill="#222">${esc(opts.title)}</text>\n`;

  const xTicks = xScale === "log" ? decadeTicks(xLo, xHi) : niceTicksLinear(xLo, xHi, 6);
  const yTicks = yScale === "log" ? decadeTicks(yLo, yHi) : niceTicksLinear(yLo, yHi, 6);
  for (const v of xTicks) {
    const px = xOf(v);
    s += `<line x1="${px.toFixed(2)}" y1="${mt}" x2="${px.toFixed(2)}" y2="${H - mb}" stroke="#eee"/>\n`;
    s += `<text x="${px.toFixed(2)}" y="${H - mb + 16}" font-size="10" fill="#444" text-anchor="middle">${fmtTick(v)}</text>\n`;
  }
  for (const v of yTicks) {
    const py = yOf(v);
    s += `<line x1="${ml}" y1="${py.toFixed(2)}" x2="${W - mr}" y2="${py.toFixed(2)}" stroke="#eee"/>\n`;
    s += `<text x="${ml - 6}" y="${(py + 3).toFixed(2)}" font-size="10" fill="#444" text-anchor="end">${fmtTick(v)}</text>\n`;
  }
  s += `<rect x="${ml}" y="${mt}" width="${W - ml - mr}" height="${H - mt - mb}" fill="none" stroke="#999"/>\n`;
  s += `<text x="${(ml + W - mr) / 2}" y="${H - 12}" font-size="11" fill="#222" text-anchor="middle">${esc(opts.xLabel)}</text>\n`;
  s += `<text x="16" y="${(mt + H - mb) / 2}" font-size="11" fill="#222" text-anchor="middle" transform="rotate(-90 16 ${(mt + H - mb) / 2})">${esc(opts.yLabel)}</text>\n`;

  opts.series.forEach((ser, i) => {
    const p = pts[i];
    if (p.length === 0) return;
    if (ser.sem) {
      // error band where finite
      const band: [number, number, number][] = [];
      for (let j = 0; j < ser.x.length; j++) {
        const sem = ser.sem[j];
        if (!Number.isFinite(ser.x[j]) || !Number.isFinite(ser.y[j]) || !Number.isFinite(sem)) continue;
        const lo = ser.y[j] - sem;
        const hi = ser.y[j] + sem;
        if (yScale === "log" && lo <= 0) continue;
        if (xScale === "log" && ser.x[j] <= 0) continue;
        band.push([ser.x[j], lo, hi]);
      }
      if (band.length > 1) {
        const fwd = band.map(([x, , hi]) => `${xOf(x).toFixed(2)},${yOf(hi).toFixed(2)}`);
        const bwd = band.slice().reverse().map(([x, lo]) => `${xOf(x).toFixed(2)},${yOf(lo).toFixed(2)}`);
        s += `<polygon points="${fwd.join(" ")} ${bwd.join(" ")}" fill="${ser.color}" opacity="0.15"/>\n`;
      }
    }
    const path = p.map(([x, y]) => `${xOf(x).toFixed(2)},${yOf(y).toFixed(2)}`).join(" ");
    s += `<polyline points="${path}" fill="none" stroke="${ser.color}" stroke-width="${ser.width ?? 1.4}"${ser.dash ? ` stroke-dasharray="${ser.dash}"` : ""}/>\n`;
    if (ser.markers) {
      for (const [x, y] of p) {
        s += `<circle cx="${xOf(x).toFixed(2)}" cy="${yOf(y).toFixed(2)}" r="2.2" fill="${ser.color}"/>\n`;
      }
    }
  });

  if (opts.legend !== false) {
    let ly = mt + 8;
    for (const ser of opts.series) {
      if (!ser.label) continue;
      const lx = W - mr - 150;
      s += `<line x1="${lx}" y1="${ly}" x2="${lx + 18}" y2="${ly}" stroke="${ser.color}" stroke-width="2"${ser.dash ? ` stroke-dasharray="${ser.dash}"` : ""}/>\n`;
      s += `<text x="${lx + 24}" y="${ly + 3}" font-size="10" fill="#333">${esc(ser.label)}</text>\n`;
      ly += 14;
    }
  }
  s += "</svg>\n";
  return s;
}

export interface HeatmapOpts {
  title: string;
  xLabel: string;
  yLabel: string;
  // values[row][col]; rows map to the y axis (increasing upward)
  values: number[][];
  rowCoords: number[];
  colCoords: number[];
  logColor?: boolean;
  width?: number;
  height?: number;
}

/** Viridis-like four-stop gradient, interpolated in RGB. */
function colorOf(u: number): string {
  const stops: [number, number, number][] = [
    [68, 1, 84], [49, 104, 142], [53, 183, 121], [253, 231, 37],
  ];
  const c = Math.min(Math.max(u, 0), 1) * (stops.length - 1);
  const i = Math.min(Math.floor(c), stops.length - 2);
  const f = c - i;
  const rgb = stops[i].map((a, j) => Math.round(a + f * (stops[i + 1][j] - a)));
  return `rgb(${rgb[0]},${rgb[1]},${rgb[2]})`;
}

export function buildHeatmap(opts: HeatmapOpts): string {
  const W = opts.width ?? 640;
  const H = opts.height ?? 460;
  const ml = 58;
  const mr = 70;
  const mt = 34;
  const mb = 46;
  const rows = opts.values.length;
  const cols = opts.values[0]?.length ?? 0;
  if (rows === 0 || cols === 0) throw new Error(`empty heatmap for "${opts.title}"`);

  const flat = opts.values.flat().filter((v) => Number.isFinite(v));
  let vMax = Math.max(...flat, 1e-300);
  let vMin: number;
  let mapVal: (v: number) => number;
  if (opts.logColor !== false) {
    const positive = flat.filter((v) => v > 0);
    vMin = positive.length ? Math.min(...positive) : 1e-6;
    // compress to at most 4 decades of contrast like a log color bar
    vMin = Math.max(vMin, vMax * 1e-4);
    const l0 = Math.log10(vMin);
    const l1 = Math.log10(vMax);
    mapVal = (v) => (v <= vMin ? 0 : (Math.log10(v) - l0) / (l1 - l0 || 1));
  } else {
    vMin = Math.min(...flat);
    mapVal = (v) => (v - vMin) / (vMax - vMin || 1);
  }

  const pw = W - ml - mr;
  const ph = H - mt - mb;
  const cw = pw / cols;
  const ch = ph / rows;

  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${W}" height="${H}" fill="#fff"/>\n`;
  s += `<text x="${ml}" y="${mt - 14}" font-size="13" font-weight="600" fill="#222">${esc(opts.title)}</text>\n`;
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < cols; c++) {
      const v = opts.values[r][c];
      const fill = colorOf(Number.isFinite(v) ? mapVal(v) : 0);
      const x = ml + c * cw;
      const y = mt + ph - (r + 1) * ch;
      s += `<rect x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${(cw + 0.05).toFixed(2)}" height="${(ch + 0.05).toFixed(2)}" fill="${fill}"/>\n`;
    }
  }
  s += `<rect x="${ml}" y="${mt}" width="${pw}" height="${ph}" fill="none" stroke="#999"/>\n`;
  // sparse coordinate labels
  const colStep = Math.max(1, Math.floor(cols / 8));
  for (let c = 0; c < cols; c += colStep) {
    const x = ml + (c + 0.5) * cw;
    s += `<text x="${x.toFixed(2)}" y="${H - mb + 16}" font-size="10" fill="#444" text-anchor="middle">${fmtTick(opts.colCoords[c])}</text>\n`;
  }
  const rowStep = Math.max(1, Math.floor(rows / 8));
  for (let r = 0; r < rows; r += rowStep) {
    const y = mt + ph - (r + 0.5) * ch;
    s += `<text x="${ml - 6}" y="${(y + 3).toFixed(2)}" font-size="10" fill="#444" text-anchor="end">${fmtTick(opts.rowCoords[r])}</text>\n`;
  }
  s += `<text x="${ml + pw / 2}" y="${H - 10}" font-size="11" fill="#222" text-anchor="middle">${esc(opts.xLabel)}</text>\n`;
  s += `<text x="16" y="${mt + ph / 2}" font-size="11" fill="#222" text-anchor="middle" transform="rotate(-90 16 ${mt + ph / 2})">${esc(opts.yLabel)}</text>\n`;
  // color bar
  const bx = W - mr + 16;
  const steps = 48;
  for (let i = 0; i < steps; i++) {
    const y = mt + ph - ((i + 1) / steps) * ph;
    s += `<rect x="${bx}" y="${y.toFixed(2)}" width="12" height="${(ph / steps + 0.05).toFixed(2)}" fill="${colorOf((i + 0.5) / steps)}"/>\n`;
  }
  const barLabel = opts.logColor !== false ? "log scale" : "linear";
  s += `<text x="${bx + 6}" y="${mt - 4}" font-size="9" fill="#444" text-anchor="middle">${barLabel}</text>\n`;
  s += `<text x="${bx + 16}" y="${mt + 8}" font-size="9" fill="#444">${fmtTick(vMax)}</text>\n`;
  s += `<text x="${bx + 16}" y="${mt + ph}" font-size="9" fill="#444">${fmtTick(vMin)}</text>\n`;
  s += "</svg>\n";
  return s;
}
