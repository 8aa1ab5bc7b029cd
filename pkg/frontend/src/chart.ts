/** Tiny canvas line charts, no dependencies.
 *
 * The drawing context is typed structurally so tests can pass a recording
 * fake instead of a real canvas.
 */

import { TracePoint } from "./buffer.js";

export interface Context2DLike {
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  fillText(text: string, x: number, y: number): void;
}

export interface ChartSeries {
  label: string;
  color: string;
  points: TracePoint[];
}

export interface ChartOptions {
  yMin?: number;
  yMax?: number;
  /** Axis caption under the x range, defaults to "t (min)". */
  xLabel?: string;
}

const PAD_LEFT = 44;
const PAD_RIGHT = 10;
const PAD_TOP = 18;
const PAD_BOTTOM = 22;

export function drawChart(
  ctx: Context2DLike,
  width: number,
  height: number,
  series: ChartSeries[],
  options: ChartOptions = {},
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.font = "11px sans-serif";

  const drawable = series.filter((s) => s.points.length > 0);
  if (drawable.length === 0) {
    ctx.fillStyle = "#888";
    ctx.fillText("no data yet", PAD_LEFT, height / 2);
    return;
  }

  let tMin = Infinity;
  let tMax = -Infinity;
  let yMin = options.yMin ?? Infinity;
  let yMax = options.yMax ?? -Infinity;
  for (const s of drawable) {
    for (const p of s.points) {
      if (p.t < tMin) tMin = p.t;
      if (p.t > tMax) tMax = p.t;
      if (options.yMin === undefined && p.v < yMin) yMin = p.v;
      if (options.yMax === undefined && p.v > yMax) yMax = p.v;
    }
  }
  if (tMax === tMin) tMax = tMin + 1;
  if (yMax === yMin) yMax = yMin + 1;

  const plotW = width - PAD_LEFT - PAD_RIGHT;
  const plotH = height - PAD_TOP - PAD_BOTTOM;
  const xOf = (t: number) => PAD_LEFT + ((t - tMin) / (tMax - tMin)) * plotW;
  const yOf = (v: number) => PAD_TOP + (1 - (v - yMin) / (yMax - yMin)) * plotH;

  // frame
  ctx.strokeStyle = "#ccc";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(PAD_LEFT, PAD_TOP);
  ctx.lineTo(PAD_LEFT, PAD_TOP + plotH);
  ctx.lineTo(PAD_LEFT + plotW, PAD_TOP + plotH);
  ctx.stroke();

  ctx.fillStyle = "#555";
  ctx.fillText(formatNum(yMax), 4, PAD_TOP + 4);
  ctx.fillText(formatNum(yMin), 4, PAD_TOP + plotH + 4);
  ctx.fillText(formatNum(tMin), PAD_LEFT - 8, height - 6);
  ctx.fillText(formatNum(tMax), PAD_LEFT + plotW - 24, height - 6);
  ctx.fillText(options.xLabel ?? "t (min)", PAD_LEFT + plotW / 2 - 16, height - 6);

  for (const s of drawable) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    const first = s.points[0]!;
    ctx.moveTo(xOf(first.t), yOf(clamp(first.v, yMin, yMax)));
    for (let i = 1; i < s.points.length; i++) {
      const p = s.points[i]!;
      ctx.lineTo(xOf(p.t), yOf(clamp(p.v, yMin, yMax)));
    }
    ctx.stroke();
  }

  let legendX = PAD_LEFT;
  for (const s of drawable) {
    ctx.fillStyle = s.color;
    ctx.fillText(s.label, legendX, 12);
    legendX += 8 * s.label.length + 16;
  }
}

function clamp(v: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, v));
}

function formatNum(v: number): string {
  if (v === 0) return "0";
  const abs = Math.abs(v);
  if (abs >= 100) return v.toFixed(0);
  if (abs >= 1) return v.toFixed(1);
  return v.toFixed(2);
}
