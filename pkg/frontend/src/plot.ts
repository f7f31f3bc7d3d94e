// Minimal canvas strip chart: reference vs position over the sliding
// window. No chart library; two polylines and an axis is all this needs.

import type { SeriesPoint } from "./panel.js";

export interface PlotStyle {
  refColor: string;
  posColor: string;
  gridColor: string;
  textColor: string;
}

const DEFAULT_STYLE: PlotStyle = {
  refColor: "#e0a030",
  posColor: "#4aa3df",
  gridColor: "#2a2f38",
  textColor: "#8a93a3",
};

export function drawSeries(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  points: SeriesPoint[],
  style: PlotStyle = DEFAULT_STYLE,
): void {
  ctx.clearRect(0, 0, width, height);
  if (points.length < 2) return;

  const t0 = points[0].t_ms;
  const t1 = points[points.length - 1].t_ms;
  const span = Math.max(t1 - t0, 1);

  let lo = Infinity;
  let hi = -Infinity;
  for (const p of points) {
    lo = Math.min(lo, p.ref, p.pos);
    hi = Math.max(hi, p.ref, p.pos);
  }
  const pad = Math.max((hi - lo) * 0.1, 5);
  lo -= pad;
  hi += pad;

  const x = (t: number) => ((t - t0) / span) * width;
  const y = (v: number) => height - ((v - lo) / (hi - lo)) * height;

  // neutral-offset grid line when in range
  ctx.strokeStyle = style.gridColor;
  ctx.lineWidth = 1;
  if (lo <= 32768 && 32768 <= hi) {
    ctx.beginPath();
    ctx.moveTo(0, y(32768));
    ctx.lineTo(width, y(32768));
    ctx.stroke();
  }

  const trace = (pick: (p: SeriesPoint) => number, color: string) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.2;
    ctx.beginPath();
    points.forEach((p, i) => {
      const px = x(p.t_ms);
      const py = y(pick(p));
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
  };
  trace((p) => p.ref, style.refColor);
  trace((p) => p.pos, style.posColor);

  ctx.fillStyle = style.textColor;
  ctx.font = "10px monospace";
  ctx.fillText(String(Math.round(hi)), 4, 10);
  ctx.fillText(String(Math.round(lo)), 4, height - 3);
}
