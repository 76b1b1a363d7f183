import { parseFittedCsv, parseObservedCsv, readText } from "./csv";
import { Panel, Series, renderFigure, LegendEntry } from "./svg";

const MODEL_COLORS = ["#2980b9", "#e67e22", "#27ae60", "#8e44ad"];

export function fitOverlaySvg(observedPath: string, fittedPath: string): string {
  const observed = parseObservedCsv(readText(observedPath), observedPath);
  const fitted = parseFittedCsv(readText(fittedPath), fittedPath);
  const series: Series[] = [
    {
      label: "observed",
      color: "#111111",
      step: true,
      width: 1.8,
      points: observed.map((r) => [r.t, r.value]),
    },
  ];
  const legend: LegendEntry[] = [{ label: "observed", color: "#111111" }];
  let idx = 0;
  for (const [model, rows] of [...fitted.entries()].sort()) {
    const color = MODEL_COLORS[idx % MODEL_COLORS.length];
    const dash = idx % 2 === 0 ? "6,3" : "2,3";
    series.push({
      label: model,
      color,
      dash,
      width: 1.6,
      points: rows.map((r) => [r.t, r.value]),
    });
    legend.push({ label: model, color, dash });
    idx += 1;
  }
  const panel: Panel = {
    title: "observed cumulative fraction vs fitted limits",
    series,
    xLabel: "time",
    yLabel: "events / population",
  };
  return renderFigure([[panel]], 840, 520, legend);
}
