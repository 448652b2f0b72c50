// Diagnostics panel: measured blend error vs gamma with the theoretical
// bound overlay and a marker at gamma_f / 2. Rendered as an inline SVG so it
// stays testable without a canvas.

import { ErrorCurveReport } from "./api";

export interface CurvePoint {
  gamma: number;
  value: number;
}

export interface CurveData {
  measured: CurvePoint[];
  bound: CurvePoint[];
  peak: CurvePoint;
  midGamma: number;
  /** true when the measured peak sits within one sample of gamma_f / 2 */
  peakNearMid: boolean;
}

export function prepareCurve(report: ErrorCurveReport): CurveData {
  const measured = report.gammas.map((g, i) => ({ gamma: g, value: report.err_linf[i] }));
  const bound = report.gammas.map((g, i) => ({ gamma: g, value: report.bound[i] }));
  let peakIdx = 0;
  for (let i = 1; i < measured.length; i++) {
    if (measured[i].value > measured[peakIdx].value) peakIdx = i;
  }
  const step = report.gammas.length > 1 ? report.gammas[1] - report.gammas[0] : 0;
  const midGamma = report.gamma_f / 2;
  return {
    measured,
    bound,
    peak: measured[peakIdx],
    midGamma,
    peakNearMid: Math.abs(measured[peakIdx].gamma - midGamma) <= step + 1e-12,
  };
}

function polyline(points: CurvePoint[], sx: (g: number) => number, sy: (v: number) => number): string {
  return points.map((p) => `${sx(p.gamma).toFixed(2)},${sy(p.value).toFixed(2)}`).join(" ");
}

export function renderCurveSvg(
  report: ErrorCurveReport,
  width = 420,
  height = 220,
  showBound = true,
): string {
  const data = prepareCurve(report);
  const pad = 34;
  const gMax = report.gamma_f || 1;
  const values = data.measured.map((p) => p.value).concat(showBound ? data.bound.map((p) => p.value) : []);
  const vMax = Math.max(...values, 1e-12);
  const sx = (g: number) => pad + (g / gMax) * (width - 2 * pad);
  const sy = (v: number) => height - pad - (v / vMax) * (height - 2 * pad);

  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="#10151c"/>`,
    `<line x1="${pad}" y1="${height - pad}" x2="${width - pad}" y2="${height - pad}" stroke="#4a5568"/>`,
    `<line x1="${pad}" y1="${pad}" x2="${pad}" y2="${height - pad}" stroke="#4a5568"/>`,
    `<line x1="${sx(data.midGamma)}" y1="${pad}" x2="${sx(data.midGamma)}" y2="${height - pad}" stroke="#718096" stroke-dasharray="4 3"/>`,
    `<text x="${sx(data.midGamma)}" y="${pad - 6}" fill="#a0aec0" font-size="10" text-anchor="middle">gamma_f/2</text>`,
  ];
  if (showBound) {
    parts.push(
      `<polyline points="${polyline(data.bound, sx, sy)}" fill="none" stroke="#805ad5" stroke-width="1.5" class="bound"/>`,
    );
  }
  parts.push(
    `<polyline points="${polyline(data.measured, sx, sy)}" fill="none" stroke="#48bb78" stroke-width="2" class="measured"/>`,
  );
  for (const p of data.measured) {
    parts.push(`<circle cx="${sx(p.gamma).toFixed(2)}" cy="${sy(p.value).toFixed(2)}" r="2.5" fill="#48bb78"/>`);
  }
  parts.push(
    `<circle cx="${sx(data.peak.gamma).toFixed(2)}" cy="${sy(data.peak.value).toFixed(2)}" r="4" fill="none" stroke="#f6e05e" class="peak"/>`,
    `<text x="${width - pad}" y="${height - pad + 14}" fill="#a0aec0" font-size="10" text-anchor="end">gamma</text>`,
    `<text x="${pad}" y="${pad - 6}" fill="#a0aec0" font-size="10">err / bbox diag</text>`,
    `</svg>`,
  );
  return parts.join("");
}
