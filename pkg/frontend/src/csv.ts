/**
 * Readers for the radperc CSV schemas.
 *
 * Each reader validates the header against the expected column list and
 * throws with a column-precise message on mismatch.
 */

import { readFileSync, readdirSync, existsSync } from "fs";
import path from "path";

export interface CurveRow {
  t: number;
  rho: number;
  rho_sem: number;
  P: number;
  P_sem: number;
  R2: number;
  R2_sem: number;
  front: number;
  front_sem: number;
}

export interface OtocRow {
  t: number;
  x: number;
  C_mean: number;
  C_sem: number;
}

export interface InfoRow {
  p: number;
  t: number;
  Ic_E_mean: number;
  Ic_E_sem: number;
  Ic_S_mean: number;
  Ic_S_sem: number;
  F_mean: number;
  F_sem: number;
}

export interface CollapseRow {
  observable: string;
  branch: string;
  p: number;
  t: number;
  x_scaled: number;
  y_scaled: number;
  y_sem_scaled: number;
}

export interface FitRow {
  observable: string;
  window_lo: number;
  window_hi: number;
  exponent: number;
  amplitude: number;
  goodness: number;
  p_c: number;
}

const HEADERS = {
  curves: "t,rho,rho_sem,P,P_sem,R2,R2_sem,front,front_sem",
  otoc: "t,x,C_mean,C_sem",
  info: "p,t,Ic_E_mean,Ic_E_sem,Ic_S_mean,Ic_S_sem,F_mean,F_sem",
  collapse: "observable,branch,p,t,x_scaled,y_scaled,y_sem_scaled",
  fit: "observable,window_lo,window_hi,exponent,amplitude,goodness,p_c",
} as const;

type SchemaName = keyof typeof HEADERS;

function parseTable(file: string, schema: SchemaName): string[][] {
  const text = readFileSync(file, "utf-8").trim();
  const lines = text.split("\n");
  const header = lines[0].trim();
  const expected = HEADERS[schema];
  if (header !== expected) {
    const got = header.split(",");
    const want = expected.split(",");
    for (let i = 0; i < Math.max(got.length, want.length); i++) {
      if (got[i] !== want[i]) {
        throw new Error(
          `${file}: schema mismatch in column ${i + 1}: expected "${want[i] ?? "(none)"}", got "${got[i] ?? "(none)"}"`,
        );
      }
    }
    throw new Error(`${file}: header does not match the ${schema} schema`);
  }
  return lines.slice(1).map((l) => l.split(","));
}

const num = (s: string) => (s === "" ? NaN : Number(s));

export function readCurves(file: string): CurveRow[] {
  return parseTable(file, "curves").map((c) => ({
    t: num(c[0]), rho: num(c[1]), rho_sem: num(c[2]), P: num(c[3]),
    P_sem: num(c[4]), R2: num(c[5]), R2_sem: num(c[6]), front: num(c[7]),
    front_sem: num(c[8]),
  }));
}

export function readOtoc(file: string): OtocRow[] {
  return parseTable(file, "otoc").map((c) => ({
    t: num(c[0]), x: num(c[1]), C_mean: num(c[2]), C_sem: num(c[3]),
  }));
}

export function readInfo(file: string): InfoRow[] {
  return parseTable(file, "info").map((c) => ({
    p: num(c[0]), t: num(c[1]), Ic_E_mean: num(c[2]), Ic_E_sem: num(c[3]),
    Ic_S_mean: num(c[4]), Ic_S_sem: num(c[5]), F_mean: num(c[6]),
    F_sem: num(c[7]),
  }));
}

export function readCollapse(file: string): CollapseRow[] {
  return parseTable(file, "collapse").map((c) => ({
    observable: c[0], branch: c[1], p: num(c[2]), t: num(c[3]),
    x_scaled: num(c[4]), y_scaled: num(c[5]), y_sem_scaled: num(c[6]),
  }));
}

export function readFit(file: string): FitRow[] {
  return parseTable(file, "fit").map((c) => ({
    observable: c[0], window_lo: num(c[1]), window_hi: num(c[2]),
    exponent: num(c[3]), amplitude: num(c[4]), goodness: num(c[5]),
    p_c: num(c[6]),
  }));
}

/** A run directory is either a single run or a p-grid of `p=*` subruns. */
export function curveFamily(inputDir: string): Map<number, CurveRow[]> {
  const family = new Map<number, CurveRow[]>();
  if (existsSync(path.join(inputDir, "curves.csv"))) {
    family.set(NaN, readCurves(path.join(inputDir, "curves.csv")));
    return family;
  }
  const subs = readdirSync(inputDir)
    .filter((d) => d.startsWith("p="))
    .sort();
  for (const sub of subs) {
    const f = path.join(inputDir, sub, "curves.csv");
    if (existsSync(f)) family.set(Number(sub.slice(2)), readCurves(f));
  }
  if (family.size === 0) {
    throw new Error(`no curves.csv found under ${inputDir}`);
  }
  return family;
}
