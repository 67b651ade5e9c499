/**
 * CLI: render one figure from a run CSV to SVG and PNG.
 *
 *   node dist/render.js --spec figure.json
 *   node dist/render.js --kind decay --input diagnostics.csv --output out/decay
 *
 * A spec file holds a JSON FigureSpec (or an array of them).  The output
 * path is a basename: both <output>.svg and <output>.png are written.
 * Exit codes: 0 success, 1 schema mismatch / missing input, 2 usage.
 */

import { mkdirSync, readFileSync, writeFileSync } from "fs";
import { dirname } from "path";

import { SchemaError, loadCsv } from "./csv.js";
import { FigureSpec, buildFigure } from "./figures.js";
import { renderPng } from "./png.js";
import { renderSvg } from "./svg.js";

function parseArgs(argv: string[]): FigureSpec[] {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (!a.startsWith("--")) throw new UsageError(`unexpected argument ${a}`);
    const eq = a.indexOf("=");
    if (eq >= 0) {
      flags.set(a.slice(2, eq), a.slice(eq + 1));
    } else {
      flags.set(a.slice(2), argv[++i] ?? "");
    }
  }
  if (flags.has("spec")) {
    const raw = JSON.parse(readFileSync(flags.get("spec")!, "utf-8"));
    return Array.isArray(raw) ? raw : [raw];
  }
  const kind = flags.get("kind");
  const input = flags.get("input");
  const output = flags.get("output");
  if (!kind || !input || !output) {
    throw new UsageError("need --spec PATH or --kind/--input/--output");
  }
  const spec: FigureSpec = {
    kind: kind as FigureSpec["kind"],
    input,
    output,
    logX: flags.has("log-x") ? flags.get("log-x") !== "false" : undefined,
    logY: flags.has("log-y") ? flags.get("log-y") !== "false" : undefined,
    piece: flags.get("piece"),
    norm: flags.get("norm"),
  };
  if (flags.has("axes")) {
    const parts = flags.get("axes")!.split(",").map(Number);
    if (parts.length !== 2 || parts.some((v) => !Number.isInteger(v))) {
      throw new UsageError("--axes wants two integer column indices");
    }
    spec.axes = [parts[0], parts[1]];
  }
  return [spec];
}

class UsageError extends Error {}

export function renderOne(spec: FigureSpec): { svg: string; png: Buffer } {
  const table = loadCsv(spec.input);
  const model = buildFigure(table, spec);
  return { svg: renderSvg(model), png: renderPng(model) };
}

export function main(argv: string[]): number {
  let specs: FigureSpec[];
  try {
    specs = parseArgs(argv);
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`usage error: ${err.message}`);
      return 2;
    }
    throw err;
  }
  for (const spec of specs) {
    try {
      const { svg, png } = renderOne(spec);
      mkdirSync(dirname(spec.output), { recursive: true });
      writeFileSync(`${spec.output}.svg`, svg);
      writeFileSync(`${spec.output}.png`, png);
      console.log(`wrote ${spec.output}.svg and .png`);
    } catch (err) {
      if (err instanceof SchemaError) {
        console.error(`schema error for ${spec.input}: ${err.message}`);
        return 1;
      }
      if ((err as NodeJS.ErrnoException).code === "ENOENT") {
        console.error(`missing input: ${spec.input}`);
        return 1;
      }
      throw err;
    }
  }
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("render.js")) {
  process.exit(main(process.argv.slice(2)));
}
