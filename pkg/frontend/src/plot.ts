/**
 * Figure model: an abstract plot (axes, line/scatter series) that both the
 * SVG writer and the PNG rasterizer consume, so the two outputs always agree.
 */

export interface Series {
  x: number[];
  y: number[];
  color: string;
  label: string;
  kind: "line" | "scatter";
  dash?: string; // stroke-dasharray for SVG; dashes are dotted in rasters
}

export interface PlotModel {
  title: string;
  xLabel: string;
  yLabel: string;
  logX: boolean;
  logY: boolean;
  series: Series[];
}

export interface Frame {
  width: number;
  height: number;
  left: number;
  right: number;
  top: number;
  bottom: number;
}

export const FRAME: Frame = { width: 800, height: 520, left: 72, right: 24, top: 40, bottom: 52 };

export interface Mapper {
  sx(v: number): number;
  sy(v: number): number;
  xTicks: number[];
  yTicks: number[];
  xRange: [number, number];
  yRange: [number, number];
}

function finite(values: number[], log: boolean): number[] {
  return values.filter((v) => Number.isFinite(v) && (!log || v > 0));
}

function niceTicks(lo: number, hi: number, log: boolean): number[] {
  if (log) {
    const ticks: number[] = [];
    const e0 = Math.floor(Math.log10(lo));
    const e1 = Math.ceil(Math.log10(hi));
    for (let e = e0; e <= e1; e++) ticks.push(10 ** e);
    return ticks.filter((t) => t >= lo / 1.001 && t <= hi * 1.001);
  }
  const span = hi - lo || 1;
  const step = 10 ** Math.floor(Math.log10(span / 4));
  const mult = span / step <= 8 ? 1 : span / step <= 16 ? 2 : 5;
  const s = step * mult;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-12 * span; v += s) ticks.push(v);
  return ticks;
}

/** Build the data -> pixel mapping; degenerate/empty data gets a unit box. */
export function makeMapper(model: PlotModel, frame: Frame = FRAME): Mapper {
  const xs = model.series.flatMap((s) => finite(s.x, model.logX));
  const ys = model.series.flatMap((s) => finite(s.y, model.logY));
  let [x0, x1] = xs.length ? [Math.min(...xs), Math.max(...xs)] : [0, 1];
  let [y0, y1] = ys.length ? [Math.min(...ys), Math.max(...ys)] : [0, 1];
  if (model.logX && x0 <= 0) [x0, x1] = [0.1, Math.max(x1, 1)];
  if (model.logY && y0 <= 0) [y0, y1] = [0.1, Math.max(y1, 1)];
  if (x0 === x1) [x0, x1] = model.logX ? [x0 / 2, x1 * 2] : [x0 - 0.5, x1 + 0.5];
  if (y0 === y1) [y0, y1] = model.logY ? [y0 / 2, y1 * 2] : [y0 - 0.5, y1 + 0.5];
  if (!model.logY && ys.length && y0 > 0 && y0 / (y1 - y0 + 1e-300) < 0.3) y0 = 0;
  const tx = (v: number) => (model.logX ? Math.log10(v) : v);
  const ty = (v: number) => (model.logY ? Math.log10(v) : v);
  const plotW = frame.width - frame.left - frame.right;
  const plotH = frame.height - frame.top - frame.bottom;
  const sx = (v: number) =>
    frame.left + ((tx(v) - tx(x0)) / (tx(x1) - tx(x0) || 1)) * plotW;
  const sy = (v: number) =>
    frame.height - frame.bottom - ((ty(v) - ty(y0)) / (ty(y1) - ty(y0) || 1)) * plotH;
  return {
    sx,
    sy,
    xTicks: niceTicks(x0, x1, model.logX),
    yTicks: niceTicks(y0, y1, model.logY),
    xRange: [x0, x1],
    yRange: [y0, y1],
  };
}

export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(0);
  return String(Math.round(v * 1e6) / 1e6);
}
