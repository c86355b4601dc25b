// Canvas plotting for Bode, Nyquist, and Nichols views. The geometry mapping
// is kept separate from drawing so it can be tested headless.

import type { PlotSeries } from "./api.js";
import { linTicks, logTicks } from "./format.js";

export interface Extent {
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

export interface Mapped {
  // device coordinates per trace, NaN-separated segments flattened out
  points: Array<{ x: number; y: number }[]>;
  extent: Extent;
  xLog: boolean;
}

export const TRACE_COLORS = ["#2774ae", "#d95f02", "#1b9e77", "#e7298a", "#66a61e"];

function finiteExtent(values: number[], lo: number, hi: number): [number, number] {
  for (const v of values) {
    if (Number.isFinite(v)) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  return [lo, hi];
}

export function mapTraces(
  traces: Array<{ x: number[]; y: number[] }>,
  width: number,
  height: number,
  xLog: boolean,
  pad = 0.05,
): Mapped {
  let xMin = Infinity;
  let xMax = -Infinity;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const t of traces) {
    [xMin, xMax] = finiteExtent(t.x, xMin, xMax);
    [yMin, yMax] = finiteExtent(t.y, yMin, yMax);
  }
  if (!Number.isFinite(xMin)) {
    xMin = 0;
    xMax = 1;
  }
  if (!Number.isFinite(yMin)) {
    yMin = 0;
    yMax = 1;
  }
  if (yMin === yMax) {
    yMin -= 1;
    yMax += 1;
  }
  const ySpan = yMax - yMin;
  yMin -= pad * ySpan;
  yMax += pad * ySpan;

  const tx = (x: number) =>
    xLog
      ? ((Math.log10(x) - Math.log10(xMin)) / (Math.log10(xMax) - Math.log10(xMin))) * width
      : ((x - xMin) / (xMax - xMin)) * width;
  const ty = (y: number) => height - ((y - yMin) / (yMax - yMin)) * height;

  const points = traces.map((t) =>
    t.x.map((x, i) => ({ x: tx(x), y: ty(t.y[i]) })).filter(
      (p) => Number.isFinite(p.x) && Number.isFinite(p.y),
    ),
  );
  return { points, extent: { xMin, xMax, yMin, yMax }, xLog };
}

export interface ViewTraces {
  top: Array<{ x: number[]; y: number[]; label: string }>;
  bottom: Array<{ x: number[]; y: number[]; label: string }> | null;
  xLog: boolean;
  xLabel: string;
  topLabel: string;
  bottomLabel: string | null;
}

// Select columns per view. Bode occupies two stacked panes; the others one.
export function seriesToTraces(series: PlotSeries[]): ViewTraces {
  if (series.length === 0) {
    return { top: [], bottom: null, xLog: true, xLabel: "", topLabel: "", bottomLabel: null };
  }
  const view = series[0].view;
  if (view === "bode") {
    return {
      top: series.map((s) => ({
        x: s.columns.freq_hz,
        y: s.columns.magnitude_db,
        label: s.controller,
      })),
      bottom: series.map((s) => ({
        x: s.columns.freq_hz,
        y: s.columns.phase_deg,
        label: s.controller,
      })),
      xLog: true,
      xLabel: "frequency [Hz]",
      topLabel: "magnitude [dB]",
      bottomLabel: "phase [deg]",
    };
  }
  if (view === "nyquist") {
    return {
      top: series.map((s) => ({ x: s.columns.re, y: s.columns.im, label: s.controller })),
      bottom: null,
      xLog: false,
      xLabel: "Re",
      topLabel: "Im",
      bottomLabel: null,
    };
  }
  return {
    top: series.map((s) => ({
      x: s.columns.phase_deg,
      y: s.columns.magnitude_db,
      label: s.controller,
    })),
    bottom: null,
    xLog: false,
    xLabel: "phase [deg]",
    topLabel: "magnitude [dB]",
    bottomLabel: null,
  };
}

export function drawPane(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  traces: Array<{ x: number[]; y: number[]; label: string }>,
  xLog: boolean,
  xLabel: string,
  yLabel: string,
): void {
  ctx.clearRect(0, 0, width, height);
  const m = { l: 52, r: 12, t: 10, b: 26 };
  const w = width - m.l - m.r;
  const h = height - m.t - m.b;
  const mapped = mapTraces(traces, w, h, xLog);

  ctx.save();
  ctx.translate(m.l, m.t);

  // grid + ticks
  ctx.strokeStyle = "#e3e3e3";
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.lineWidth = 1;
  const { xMin, xMax, yMin, yMax } = mapped.extent;
  const xticks = xLog ? logTicks(xMin, xMax) : linTicks(xMin, xMax, 6);
  for (const t of xticks) {
    const x = xLog
      ? ((Math.log10(t) - Math.log10(xMin)) / (Math.log10(xMax) - Math.log10(xMin))) * w
      : ((t - xMin) / (xMax - xMin)) * w;
    if (x < -1 || x > w + 1) continue;
    ctx.beginPath();
    ctx.moveTo(x, 0);
    ctx.lineTo(x, h);
    ctx.stroke();
    ctx.fillText(xLog ? t.toExponential(0) : t.toPrecision(3), x - 10, h + 16);
  }
  for (const t of linTicks(yMin, yMax, 5)) {
    const y = h - ((t - yMin) / (yMax - yMin)) * h;
    ctx.beginPath();
    ctx.moveTo(0, y);
    ctx.lineTo(w, y);
    ctx.stroke();
    ctx.fillText(t.toPrecision(3), -m.l + 4, y + 4);
  }

  // frame + labels
  ctx.strokeStyle = "#888";
  ctx.strokeRect(0, 0, w, h);
  ctx.fillText(xLabel, w / 2 - 30, h + 24);
  ctx.save();
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(yLabel, -h / 2 - 30, -m.l + 14);
  ctx.restore();

  // traces
  mapped.points.forEach((pts, i) => {
    ctx.strokeStyle = TRACE_COLORS[i % TRACE_COLORS.length];
    ctx.lineWidth = 1.6;
    ctx.beginPath();
    pts.forEach((p, j) => (j === 0 ? ctx.moveTo(p.x, p.y) : ctx.lineTo(p.x, p.y)));
    ctx.stroke();
  });

  // legend
  traces.forEach((t, i) => {
    ctx.fillStyle = TRACE_COLORS[i % TRACE_COLORS.length];
    ctx.fillRect(w - 110, 8 + i * 16, 10, 10);
    ctx.fillStyle = "#333";
    ctx.fillText(t.label, w - 95, 17 + i * 16);
  });

  ctx.restore();
}
