import { readFileSync } from "fs";

export interface EcdfRow {
  value: number;
  ecdf: number;
  arm: string;
}

export interface XY {
  t: number;
  value: number;
}

function rows(text: string): string[] {
  return text
    .split(/\r?\n/)
    .map((ln) => ln.trim())
    .filter((ln) => ln.length > 0);
}

export function parseEcdfCsv(text: string, name: string): EcdfRow[] {
  const lines = rows(text);
  if (lines.length === 0 || lines[0] !== "value,ecdf,arm") {
    throw new Error(`${name}: expected header 'value,ecdf,arm', got '${lines[0] ?? ""}'`);
  }
  const out: EcdfRow[] = [];
  const lastEcdf = new Map<string, number>();
  for (const ln of lines.slice(1)) {
    const [v, e, arm] = ln.split(",");
    const row = { value: Number(v), ecdf: Number(e), arm };
    if (!Number.isFinite(row.value) || !Number.isFinite(row.ecdf) || !arm) {
      throw new Error(`${name}: malformed row '${ln}'`);
    }
    const prev = lastEcdf.get(arm);
    if (prev !== undefined && row.ecdf < prev) {
      throw new Error(`${name}: ecdf not nondecreasing within arm '${arm}'`);
    }
    lastEcdf.set(arm, row.ecdf);
    out.push(row);
  }
  return out;
}

export function armsOf(rowsIn: EcdfRow[]): Map<string, EcdfRow[]> {
  const by = new Map<string, EcdfRow[]>();
  for (const r of rowsIn) {
    const bucket = by.get(r.arm);
    if (bucket) bucket.push(r);
    else by.set(r.arm, [r]);
  }
  return by;
}

export function parseObservedCsv(text: string, name: string): XY[] {
  const lines = rows(text);
  if (lines.length === 0 || lines[0] !== "t,value") {
    throw new Error(`${name}: expected header 't,value', got '${lines[0] ?? ""}'`);
  }
  return lines.slice(1).map((ln) => {
    const [t, v] = ln.split(",");
    const row = { t: Number(t), value: Number(v) };
    if (!Number.isFinite(row.t) || !Number.isFinite(row.value)) {
      throw new Error(`${name}: malformed row '${ln}'`);
    }
    return row;
  });
}

export function parseFittedCsv(text: string, name: string): Map<string, XY[]> {
  const lines = rows(text);
  if (lines.length === 0 || lines[0] !== "t,value,model") {
    throw new Error(`${name}: expected header 't,value,model', got '${lines[0] ?? ""}'`);
  }
  const by = new Map<string, XY[]>();
  for (const ln of lines.slice(1)) {
    const [t, v, model] = ln.split(",");
    if (!model || !Number.isFinite(Number(t)) || !Number.isFinite(Number(v))) {
      throw new Error(`${name}: malformed row '${ln}'`);
    }
    const bucket = by.get(model) ?? [];
    bucket.push({ t: Number(t), value: Number(v) });
    by.set(model, bucket);
  }
  if (by.size === 0) {
    throw new Error(`${name}: no fitted curves found`);
  }
  return by;
}

export function readText(path: string): string {
  return readFileSync(path, "utf8");
}
