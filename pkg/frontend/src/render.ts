import { writeFileSync } from "fs";

import { Resvg } from "@resvg/resvg-js";

export function svgToPng(svg: string): Buffer {
  const resvg = new Resvg(svg, {
    background: "white",
    font: { loadSystemFonts: true },
  });
  return resvg.render().asPng();
}

export function writePng(svg: string, out: string): void {
  writeFileSync(out, svgToPng(svg));
}
