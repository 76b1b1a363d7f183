import { mkdtempSync, writeFileSync, readFileSync, existsSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";

import { describe, expect, it } from "vitest";

import { ecdfGridSvg, ecdfSeries, expectedFiles } from "../src/ecdfGrid";
import { fitOverlaySvg } from "../src/fitOverlay";
import { runEcdfGrid, runPlotFit } from "../src/cli";
import { parseEcdfCsv } from "../src/csv";
import { seriesPath } from "../src/svg";
import { svgToPng } from "../src/render";

function ecdfCsv(testedShift: number): string {
  // deterministic synthetic samples: tested arm optionally shifted
  const lines = ["value,ecdf,arm"];
  const n = 60;
  for (let i = 0; i < n; i++) {
    const v = 0.02 * i + testedShift;
    lines.push(`${v.toFixed(4)},${((i + 1) / n).toFixed(4)},tested`);
  }
  for (let i = 0; i < n; i++) {
    const v = 0.02 * i;
    lines.push(`${v.toFixed(4)},${((i + 1) / n).toFixed(4)},target`);
  }
  return lines.join("\n") + "\n";
}

function writeStudyDir(shift: number): string {
  const dir = mkdtempSync(join(tmpdir(), "ppgof-plots-"));
  for (const file of expectedFiles()) {
    writeFileSync(join(dir, file), ecdfCsv(shift));
  }
  return dir;
}

describe("ecdf grid", () => {
  it("renders a 2x3 grid deterministically", () => {
    const dir = writeStudyDir(0.1);
    const svg1 = ecdfGridSvg(dir);
    const svg2 = ecdfGridSvg(dir);
    expect(svg1).toBe(svg2);
    expect(svg1.match(/<rect[^>]*stroke="#444"/g)!.length).toBe(6); // six panels
    const out = join(dir, "grid.png");
    expect(runEcdfGrid([dir, out])).toBe(0);
    const png = readFileSync(out);
    expect(png.subarray(1, 4).toString()).toBe("PNG");
    expect(png.length).toBeGreaterThan(5000);
  });

  it("names every missing input file", () => {
    const dir = mkdtempSync(join(tmpdir(), "ppgof-plots-"));
    writeFileSync(join(dir, "ecdf_ks_transformed.csv"), ecdfCsv(0));
    try {
      ecdfGridSvg(dir);
      throw new Error("should have thrown");
    } catch (err) {
      const msg = String(err instanceof Error ? err.message : err);
      expect(msg).toContain("ecdf_ks_untransformed.csv");
      expect(msg).toContain("ecdf_ad_transformed.csv");
      expect(msg).not.toContain("ecdf_ks_transformed.csv,");
    }
    expect(runEcdfGrid([dir, join(dir, "x.png")])).toBe(1);
  });

  it("draws coincident layers for identical arms", () => {
    const rows = parseEcdfCsv(ecdfCsv(0), "identical.csv");
    const series = ecdfSeries(rows);
    const xs = (v: number) => 40 + v * 300;
    const ys = (v: number) => 400 - v * 360;
    const paths = series.map((s) => seriesPath(s, xs, ys));
    expect(paths[0]).toBe(paths[1]); // identical geometry
    // rasterized with one style, the two layers are pixel-identical
    const layer = (d: string) =>
      `<svg xmlns="http://www.w3.org/2000/svg" width="400" height="420">` +
      `<path d="${d}" fill="none" stroke="black" stroke-width="1.6"/></svg>`;
    const a = svgToPng(layer(paths[0]));
    const b = svgToPng(layer(paths[1]));
    expect(Buffer.compare(a, b)).toBe(0);
  });
});

describe("fit overlay", () => {
  function observedCsv(constant = false): string {
    const lines = ["t,value"];
    for (let i = 0; i <= 40; i++) {
      const v = constant ? 0.4 : Math.min(1, i / 40);
      lines.push(`${(i * 1.875).toFixed(3)},${v.toFixed(4)}`);
    }
    return lines.join("\n") + "\n";
  }

  function fittedCsv(): string {
    const lines = ["t,value,model"];
    for (const model of ["alpha", "beta"]) {
      for (let i = 0; i <= 40; i++) {
        const v = Math.min(1, Math.pow(i / 40, model === "alpha" ? 1.2 : 0.8));
        lines.push(`${(i * 1.875).toFixed(3)},${v.toFixed(4)},${model}`);
      }
    }
    return lines.join("\n") + "\n";
  }

  it("renders observed vs fitted", () => {
    const dir = mkdtempSync(join(tmpdir(), "ppgof-fit-"));
    writeFileSync(join(dir, "observed.csv"), observedCsv());
    writeFileSync(join(dir, "fitted.csv"), fittedCsv());
    const out = join(dir, "fit.png");
    expect(runPlotFit([join(dir, "observed.csv"), join(dir, "fitted.csv"), out])).toBe(0);
    expect(existsSync(out)).toBe(true);
    const svg = fitOverlaySvg(join(dir, "observed.csv"), join(dir, "fitted.csv"));
    expect(svg).toContain("alpha");
    expect(svg).toContain("beta");
  });

  it("rejects an empty fitted file", () => {
    const dir = mkdtempSync(join(tmpdir(), "ppgof-fit-"));
    writeFileSync(join(dir, "observed.csv"), observedCsv());
    writeFileSync(join(dir, "fitted.csv"), "t,value,model\n");
    expect(runPlotFit([join(dir, "observed.csv"), join(dir, "fitted.csv"), join(dir, "x.png")]),
    ).toBe(1);
  });

  it("keeps a sane axis for a constant observed curve", () => {
    const dir = mkdtempSync(join(tmpdir(), "ppgof-fit-"));
    writeFileSync(join(dir, "observed.csv"), observedCsv(true));
    writeFileSync(join(dir, "fitted.csv"), "t,value,model\n0,0.4,flat\n75,0.4,flat\n");
    const svg = fitOverlaySvg(join(dir, "observed.csv"), join(dir, "fitted.csv"));
    expect(svg).not.toContain("NaN");
    expect(svgToPng(svg).length).toBeGreaterThan(1000);
  });
});
