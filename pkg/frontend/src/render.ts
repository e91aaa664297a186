/**
 * Orchestrates one rendering run: parse the four result files from a
 * `chaoshedge` output directory and write one SVG per panel.
 *
 * The renderer is a read-only presentation layer: it consumes report.json
 * and the CSVs exactly as emitted and never touches the simulated path
 * binary. Output is deterministic, so re-running over the same results
 * directory reproduces the files byte for byte.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import {
  renderHedgePanel,
  renderLearningCurves,
  renderPayoffHistogram,
  renderRuntimePanel,
} from "./panels.js";
import {
  readHedgePaths,
  readLearningCurve,
  readPayoffScatter,
  readReport,
} from "./schema.js";

/** Render all panels for `resultsDir` into `outDir`; returns written paths. */
export function render(resultsDir: string, outDir: string): string[] {
  const report = readReport(join(resultsDir, "report.json"));
  const curve = readLearningCurve(join(resultsDir, "learning_curve.csv"));
  const payoff = readPayoffScatter(join(resultsDir, "payoff_scatter.csv"));
  const hedge = readHedgePaths(join(resultsDir, "hedge_paths.csv"));

  mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  const write = (name: string, svg: string): void => {
    const path = join(outDir, name);
    writeFileSync(path, svg, "utf8");
    written.push(path);
  };

  write("panel_a.svg", renderLearningCurves(curve, report));
  write("panel_b.svg", renderPayoffHistogram(payoff, report));
  write("panel_c.svg", renderRuntimePanel(curve, report));

  const assets = [...new Set(hedge.map((point) => point.asset))].sort(
    (a, b) => a - b,
  );
  for (const asset of assets) {
    write(
      `panel_d${asset + 1}.svg`,
      renderHedgePanel(
        hedge.filter((point) => point.asset === asset),
        asset,
        report,
      ),
    );
  }
  return written;
}
