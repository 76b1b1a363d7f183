import { describe, expect, it } from "vitest";

import { armsOf, parseEcdfCsv, parseFittedCsv, parseObservedCsv } from "../src/csv";

describe("ecdf csv parsing", () => {
  it("parses both arms", () => {
    const rows = parseEcdfCsv(
      "value,ecdf,arm\n0.1,0.5,tested\n0.4,1,tested\n0.2,0.5,target\n0.5,1,target\n",
      "x.csv",
    );
    const arms = armsOf(rows);
    expect([...arms.keys()].sort()).toEqual(["target", "tested"]);
    expect(arms.get("tested")!.length).toBe(2);
  });

  it("rejects a wrong header", () => {
    expect(() => parseEcdfCsv("x,y,arm\n1,1,a\n", "bad.csv")).toThrow(/header/);
  });

  it("rejects a decreasing ecdf within an arm", () => {
    expect(() =>
      parseEcdfCsv("value,ecdf,arm\n0.1,0.9,tested\n0.2,0.5,tested\n", "bad.csv"),
    ).toThrow(/nondecreasing/);
  });

  it("rejects malformed numbers", () => {
    expect(() => parseEcdfCsv("value,ecdf,arm\nx,0.5,tested\n", "bad.csv")).toThrow(/malformed/);
  });
});

describe("curve csv parsing", () => {
  it("parses observed curves", () => {
    const rows = parseObservedCsv("t,value\n0,0\n1,0.25\n2,0.5\n", "obs.csv");
    expect(rows.length).toBe(3);
    expect(rows[2]).toEqual({ t: 2, value: 0.5 });
  });

  it("parses fitted curves per model", () => {
    const by = parseFittedCsv(
      "t,value,model\n0,0,a\n1,0.5,a\n0,0,b\n1,0.4,b\n",
      "fit.csv",
    );
    expect([...by.keys()].sort()).toEqual(["a", "b"]);
  });

  it("rejects an empty fitted file", () => {
    expect(() => parseFittedCsv("t,value,model\n", "fit.csv")).toThrow(/no fitted curves/);
  });
});
