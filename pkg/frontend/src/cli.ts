#!/usr/bin/env node
/** dualbath-figs --spec <path>: render one figure from dualbath CSV output. */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

import { SchemaError, readTable } from "./csv.js";
import { render } from "./figures.js";
import { SpecError, loadSpec } from "./spec.js";

export function main(argv: string[]): number {
  const idx = argv.indexOf("--spec");
  if (idx < 0 || idx + 1 >= argv.length) {
    process.stderr.write("usage: dualbath-figs --spec <path>\n");
    return 1;
  }
  try {
    const spec = loadSpec(argv[idx + 1]);
    const tables = spec.inputs.map(readTable);
    const svg = render(spec, tables);
    mkdirSync(dirname(spec.output), { recursive: true });
    writeFileSync(spec.output, svg);
    process.stdout.write(spec.output + "\n");
    return 0;
  } catch (err) {
    if (err instanceof SchemaError || err instanceof SpecError) {
      process.stderr.write(`error: ${err.message}\n`);
      return 1;
    }
    if ((err as NodeJS.ErrnoException).code === "ENOENT") {
      process.stderr.write(`error: ${(err as Error).message}\n`);
      return 1;
    }
    throw err;
  }
}

process.exit(main(process.argv.slice(2)));
