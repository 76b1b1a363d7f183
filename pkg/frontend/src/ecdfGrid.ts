import { existsSync } from "fs";
import { join } from "path";

import { armsOf, parseEcdfCsv, readText, EcdfRow } from "./csv";
import { Panel, Series, renderFigure, LegendEntry } from "./svg";

export const STATS = ["ks", "cvm", "ad"] as const;
export const STAGES = ["untransformed", "transformed"] as const;

export const ARM_STYLE: Record<string, { color: string; dash?: string }> = {
  tested: { color: "#c0392b" },
  target: { color: "#2c3e50", dash: "5,3" },
};

export function expectedFiles(): string[] {
  const out: string[] = [];
  for (const stage of STAGES) {
    for (const stat of STATS) {
      out.push(`ecdf_${stat}_${stage}.csv`);
    }
  }
  return out;
}

export function ecdfSeries(rows: EcdfRow[]): Series[] {
  const byArm = armsOf(rows);
  const series: Series[] = [];
  for (const [arm, armRows] of [...byArm.entries()].sort()) {
    const sorted = [...armRows].sort((a, b) => a.value - b.value);
    const style = ARM_STYLE[arm] ?? { color: "#27ae60" };
    series.push({
      label: arm,
      color: style.color,
      dash: style.dash,
      step: true,
      points: sorted.map((r) => [r.value, r.ecdf]),
    });
  }
  return series;
}

const STAT_TITLE: Record<string, string> = {
  ks: "supremum statistic",
  cvm: "mean-square statistic",
  ad: "1/t-weighted statistic",
};

export function ecdfGridSvg(dir: string): string {
  const missing = expectedFiles().filter((f) => !existsSync(join(dir, f)));
  if (missing.length > 0) {
    throw new Error(`missing ECDF inputs in ${dir}: ${missing.join(", ")}`);
  }
  const panels: Panel[][] = STAGES.map((stage) =>
    STATS.map((stat) => {
      const file = `ecdf_${stat}_${stage}.csv`;
      const rows = parseEcdfCsv(readText(join(dir, file)), file);
      return {
        title: `${STAT_TITLE[stat]} (${stage})`,
        series: ecdfSeries(rows),
        xLabel: "statistic value",
        yLabel: "empirical cdf",
        yDomain: [0, 1] as [number, number],
      };
    }),
  );
  const legend: LegendEntry[] = [
    { label: "tested model", ...ARM_STYLE.tested },
    { label: "reference process", ...ARM_STYLE.target },
  ];
  return renderFigure(panels, 1180, 660, legend);
}
