#!/usr/bin/env node
/**
 * radperc-plot <kind> --input DIR --output FILE [--style key=value,...]
 *
 * Kinds: density_loglog | survival_loglog | spread_loglog | collapse |
 *        otoc_heatmap | otoc_profile_collapse | fidelity_vs_p | info_vs_t
 */

import { writeFileSync, mkdirSync } from "fs";
import path from "path";

import { FIGURE_KINDS, FigureKind, StyleOpts, renderFigure } from "./figures.js";

function parseStyle(raw: string | undefined): StyleOpts {
  const style: StyleOpts = {};
  if (!raw) return style;
  for (const part of raw.split(",")) {
    const [key, value] = part.split("=", 2);
    if (key === "width") style.width = Number(value);
    else if (key === "height") style.height = Number(value);
    else if (key === "title") style.title = value;
    else throw new Error(`unknown style option "${key}"`);
  }
  return style;
}

export function main(argv: string[]): number {
  const args = [...argv];
  const kind = args.shift();
  if (!kind || !(FIGURE_KINDS as readonly string[]).includes(kind)) {
    console.error(`usage: radperc-plot <${FIGURE_KINDS.join("|")}> --input DIR --output FILE [--style ...]`);
    return 2;
  }
  let input = "";
  let output = "";
  let styleRaw: string | undefined;
  while (args.length) {
    const flag = args.shift()!;
    if (flag === "--input") input = args.shift() ?? "";
    else if (flag === "--output") output = args.shift() ?? "";
    else if (flag === "--style") styleRaw = args.shift();
    else {
      console.error(`radperc-plot: unknown flag ${flag}`);
      return 2;
    }
  }
  if (!input || !output) {
    console.error("radperc-plot: --input and --output are required");
    return 2;
  }
  try {
    const svg = renderFigure(kind as FigureKind, input, parseStyle(styleRaw));
    mkdirSync(path.dirname(path.resolve(output)), { recursive: true });
    writeFileSync(output, svg);
    console.log(`radperc-plot: wrote ${output}`);
    return 0;
  } catch (err) {
    console.error(`radperc-plot: ${(err as Error).message}`);
    return 1;
  }
}

const invokedDirectly = process.argv[1] &&
  import.meta.url === new URL(`file://${path.resolve(process.argv[1])}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
