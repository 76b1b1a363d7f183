// Minimal deterministic SVG scene builder: fixed canvas, linear scales,
// step/line series, ticked axes, legend. No DOM, no randomness.

export interface Series {
  label: string;
  color: string;
  points: Array<[number, number]>;
  step?: boolean;
  width?: number;
  dash?: string;
}

export interface Panel {
  title: string;
  series: Series[];
  xLabel?: string;
  yLabel?: string;
  yDomain?: [number, number];
}

const FONT = "DejaVu Sans, Helvetica, sans-serif";

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.01) return v.toExponential(1);
  return Number(v.toPrecision(3)).toString();
}

function ticks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) return [lo];
  const raw = (hi - lo) / n;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const step = [1, 2, 2.5, 5, 10].map((m) => m * mag).find((s) => (hi - lo) / s <= n) ?? raw;
  const first = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = first; v <= hi + 1e-12 * (hi - lo); v += step) out.push(v);
  return out;
}

export function seriesPath(
  s: Series,
  xs: (v: number) => number,
  ys: (v: number) => number,
): string {
  if (s.points.length === 0) return "";
  const parts: string[] = [];
  let prev: [number, number] | null = null;
  for (const [x, y] of s.points) {
    const px = xs(x).toFixed(2);
    const py = ys(y).toFixed(2);
    if (prev === null) {
      parts.push(`M${px},${py}`);
    } else if (s.step) {
      parts.push(`H${px}`, `V${py}`);
    } else {
      parts.push(`L${px},${py}`);
    }
    prev = [x, y];
  }
  return parts.join(" ");
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderPanel(
  panel: Panel,
  x0: number,
  y0: number,
  w: number,
  h: number,
): string {
  const margin = { left: 46, right: 10, top: 24, bottom: 34 };
  const iw = w - margin.left - margin.right;
  const ih = h - margin.top - margin.bottom;
  const allX = panel.series.flatMap((s) => s.points.map((p) => p[0]));
  const allY = panel.series.flatMap((s) => s.points.map((p) => p[1]));
  let xLo = Math.min(...allX);
  let xHi = Math.max(...allX);
  let [yLo, yHi] = panel.yDomain ?? [Math.min(...allY), Math.max(...allY)];
  if (!(xHi > xLo)) {
    xLo -= 0.5;
    xHi += 0.5;
  }
  if (!(yHi > yLo)) {
    // constant series: pad so the axis never collapses
    yLo -= 0.5;
    yHi += 0.5;
  }
  const xs = (v: number) => x0 + margin.left + ((v - xLo) / (xHi - xLo)) * iw;
  const ys = (v: number) => y0 + margin.top + ih - ((v - yLo) / (yHi - yLo)) * ih;
  const parts: string[] = [];
  parts.push(
    `<rect x="${x0 + margin.left}" y="${y0 + margin.top}" width="${iw}" height="${ih}" fill="white" stroke="#444" stroke-width="1"/>`,
  );
  for (const tv of ticks(xLo, xHi)) {
    const px = xs(tv);
    parts.push(
      `<line x1="${px.toFixed(2)}" y1="${ys(yLo).toFixed(2)}" x2="${px.toFixed(2)}" y2="${(ys(yLo) + 4).toFixed(2)}" stroke="#444"/>`,
      `<text x="${px.toFixed(2)}" y="${(ys(yLo) + 16).toFixed(2)}" font-family="${FONT}" font-size="10" text-anchor="middle">${fmtTick(tv)}</text>`,
    );
  }
  for (const tv of ticks(yLo, yHi)) {
    const py = ys(tv);
    parts.push(
      `<line x1="${(xs(xLo) - 4).toFixed(2)}" y1="${py.toFixed(2)}" x2="${xs(xLo).toFixed(2)}" y2="${py.toFixed(2)}" stroke="#444"/>`,
      `<text x="${(xs(xLo) - 7).toFixed(2)}" y="${(py + 3).toFixed(2)}" font-family="${FONT}" font-size="10" text-anchor="end">${fmtTick(tv)}</text>`,
    );
  }
  for (const s of panel.series) {
    const d = seriesPath(s, xs, ys);
    if (d) {
      parts.push(
        `<path d="${d}" fill="none" stroke="${s.color}" stroke-width="${s.width ?? 1.6}"${s.dash ? ` stroke-dasharray="${s.dash}"` : ""}/>`,
      );
    }
  }
  parts.push(
    `<text x="${(x0 + margin.left + iw / 2).toFixed(2)}" y="${y0 + 14}" font-family="${FONT}" font-size="12" text-anchor="middle" font-weight="bold">${esc(panel.title)}</text>`,
  );
  if (panel.xLabel) {
    parts.push(
      `<text x="${(x0 + margin.left + iw / 2).toFixed(2)}" y="${(y0 + h - 6).toFixed(2)}" font-family="${FONT}" font-size="11" text-anchor="middle">${esc(panel.xLabel)}</text>`,
    );
  }
  if (panel.yLabel) {
    const cx = x0 + 12;
    const cy = y0 + margin.top + ih / 2;
    parts.push(
      `<text x="${cx}" y="${cy.toFixed(2)}" font-family="${FONT}" font-size="11" text-anchor="middle" transform="rotate(-90 ${cx} ${cy.toFixed(2)})">${esc(panel.yLabel)}</text>`,
    );
  }
  return parts.join("\n");
}

export interface LegendEntry {
  label: string;
  color: string;
  dash?: string;
}

export function renderFigure(
  panels: Panel[][],
  width: number,
  height: number,
  legend: LegendEntry[],
): string {
  const legendH = 26;
  const nRows = panels.length;
  const nCols = Math.max(...panels.map((r) => r.length));
  const pw = width / nCols;
  const ph = (height - legendH) / nRows;
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
  ];
  panels.forEach((row, i) => {
    row.forEach((panel, j) => {
      parts.push(renderPanel(panel, j * pw, legendH + i * ph, pw, ph));
    });
  });
  let lx = 14;
  for (const entry of legend) {
    parts.push(
      `<line x1="${lx}" y1="14" x2="${lx + 26}" y2="14" stroke="${entry.color}" stroke-width="2"${entry.dash ? ` stroke-dasharray="${entry.dash}"` : ""}/>`,
      `<text x="${lx + 32}" y="18" font-family="${FONT}" font-size="12">${esc(entry.label)}</text>`,
    );
    lx += 42 + 7 * entry.label.length;
  }
  parts.push("</svg>");
  return parts.join("\n");
}
