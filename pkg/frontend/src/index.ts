export { parseEcdfCsv, parseObservedCsv, parseFittedCsv, armsOf } from "./csv";
export { ecdfGridSvg, ecdfSeries, expectedFiles } from "./ecdfGrid";
export { fitOverlaySvg } from "./fitOverlay";
export { svgToPng, writePng } from "./render";
export { renderFigure, renderPanel, seriesPath } from "./svg";
export { runEcdfGrid, runPlotFit } from "./cli";
