// Display formatting for the performance panel and plot axes.

export function fmtDb(value: number | null): string {
  if (value === null) return "∞ dB";
  return `${value.toFixed(2)} dB`;
}

export function fmtDeg(value: number | null): string {
  if (value === null) return "—";
  return `${value.toFixed(1)}°`;
}

export function fmtHz(value: number | null): string {
  if (value === null) return "—";
  if (value >= 1000) return `${(value / 1000).toPrecision(4)} kHz`;
  if (value < 0.1) return `${(value * 1000).toPrecision(3)} mHz`;
  return `${value.toPrecision(4)} Hz`;
}

export function fmtPlain(value: number | null, digits = 3): string {
  if (value === null) return "—";
  return value.toFixed(digits);
}

// axis tick labels for log-frequency plots
export function logTicks(min: number, max: number): number[] {
  const ticks: number[] = [];
  const lo = Math.ceil(Math.log10(min) - 1e-9);
  const hi = Math.floor(Math.log10(max) + 1e-9);
  for (let d = lo; d <= hi; d++) ticks.push(Math.pow(10, d));
  return ticks;
}

export function linTicks(min: number, max: number, count = 5): number[] {
  if (!(max > min)) return [min];
  const rawStep = (max - min) / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const norm = rawStep / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  const ticks: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + 1e-12; v += step) ticks.push(v);
  return ticks;
}
