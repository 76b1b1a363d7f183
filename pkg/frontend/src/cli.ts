import { ecdfGridSvg } from "./ecdfGrid";
import { fitOverlaySvg } from "./fitOverlay";
import { writePng } from "./render";

export function runEcdfGrid(argv: string[]): number {
  if (argv.length !== 2) {
    console.error("usage: ecdf_grid <csv-dir> <out.png>");
    return 1;
  }
  try {
    writePng(ecdfGridSvg(argv[0]), argv[1]);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
  console.log(`wrote ${argv[1]}`);
  return 0;
}

export function runPlotFit(argv: string[]): number {
  if (argv.length !== 3) {
    console.error("usage: plot_fit <observed.csv> <fitted.csv> <out.png>");
    return 1;
  }
  try {
    writePng(fitOverlaySvg(argv[0], argv[1]), argv[2]);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
  console.log(`wrote ${argv[2]}`);
  return 0;
}
