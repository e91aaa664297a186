#!/usr/bin/env node
/**
 * Command line entry point:
 *
 *   render --results <dir> --out <dir>
 *
 * Reads report.json plus the three CSVs from the results directory and
 * writes panel_a.svg, panel_b.svg, panel_c.svg and one panel_d<i>.svg per
 * asset. Exits non-zero with a message naming the file (and column, where
 * applicable) when the results directory does not match the expected schema.
 */

import { parseArgs } from "node:util";

import { render } from "./render.js";
import { SchemaError } from "./schema.js";

const USAGE =
  "usage: chaoshedge-figures render --results <dir> --out <dir>\n" +
  "  --results  directory holding report.json and the result CSVs\n" +
  "  --out      directory the panel SVGs are written into";

function fail(message: string): never {
  console.error(message);
  console.error(USAGE);
  process.exit(2);
}

function main(argv: string[]): void {
  const [command, ...rest] = argv;
  if (command === undefined || command === "--help" || command === "-h") {
    console.log(USAGE);
    return;
  }
  if (command !== "render") {
    fail(`unknown command "${command}"`);
  }

  let values: { results?: string; out?: string };
  try {
    ({ values } = parseArgs({
      args: rest,
      options: {
        results: { type: "string" },
        out: { type: "string" },
      },
    }));
  } catch (error) {
    fail(error instanceof Error ? error.message : String(error));
  }
  if (values.results === undefined) {
    fail("missing required option --results");
  }
  if (values.out === undefined) {
    fail("missing required option --out");
  }

  try {
    for (const file of render(values.results, values.out)) {
      console.log(file);
    }
  } catch (error) {
    if (error instanceof SchemaError) {
      console.error(`schema error: ${error.message}`);
      process.exit(1);
    }
    throw error;
  }
}

main(process.argv.slice(2));
