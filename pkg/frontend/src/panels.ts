/**
 * The four figure panels rendered from a results directory:
 *
 *   a — learning curves: train/test MSE and hedge IMSE against chaos order,
 *       log-scale y axis;
 *   b — distribution of the payoff on the test paths, overlaid with the
 *       distribution of each order's prediction;
 *   c — cost of each order: runtime and parameter count on twin axes;
 *   d — estimated vs reference hedge ratio along sampled paths, one panel
 *       per asset.
 *
 * All panels are pure functions of the parsed file contents.
 */

import { bin, extent, max, ticks } from "d3-array";
import { scaleLinear, scaleLog } from "d3-scale";

import type {
  HedgePoint,
  LearningCurveRow,
  PayoffSample,
  ReportInfo,
} from "./schema.js";
import {
  HEIGHT,
  MARGIN,
  PALETTE,
  WIDTH,
  axisBottom,
  axisVertical,
  document_,
  el,
  legend,
  polyline,
  px,
  textEl,
  type LegendItem,
  type Margin,
  type Scale,
} from "./svg.js";

function plainTick(value: number): string {
  return String(value);
}

function subtitle(report: ReportInfo): string {
  return `${report.modelKind} / ${report.payoffKind}, ${report.nPaths} paths`;
}

function plotArea(margin: Margin = MARGIN): {
  x0: number;
  x1: number;
  y0: number;
  y1: number;
} {
  return {
    x0: margin.left,
    x1: WIDTH - margin.right,
    y0: HEIGHT - margin.bottom,
    y1: margin.top,
  };
}

/** Decade tick values for a log axis; empty when the span is too narrow. */
function decadeTicks(lo: number, hi: number): number[] {
  const first = Math.ceil(Math.log10(lo) - 1e-9);
  const last = Math.floor(Math.log10(hi) + 1e-9);
  const values: number[] = [];
  for (let k = first; k <= last; k += 1) {
    values.push(10 ** k);
  }
  return values.length >= 2 ? values : [];
}

function markers(
  points: [number, number][],
  color: string,
  shape: "circle" | "square",
): string {
  const parts = points.map(([x, y]) =>
    shape === "circle"
      ? el("circle", { cx: px(x), cy: px(y), r: 3, fill: color })
      : el("rect", { x: px(x - 3), y: px(y - 3), width: 6, height: 6, fill: color }),
  );
  return el("g", {}, parts);
}

function emptyNote(area: { x0: number; x1: number; y0: number; y1: number }): string {
  return textEl("no data rows", {
    x: px((area.x0 + area.x1) / 2),
    y: px((area.y0 + area.y1) / 2),
    "text-anchor": "middle",
    "font-size": 12,
    fill: "#888",
  });
}

// ---------------------------------------------------------------------------
// panel a: learning curves

interface CurveSeries {
  label: string;
  color: string;
  points: [number, number][];
}

export function renderLearningCurves(
  rows: LearningCurveRow[],
  report: ReportInfo,
): string {
  const area = plotArea();
  const orders = rows.map((row) => row.order);
  const xDomain: [number, number] =
    orders.length > 0 ? [Math.min(...orders), Math.max(...orders)] : [0, 1];
  const x = scaleLinear().domain(xDomain).range([area.x0, area.x1]);

  const series: { label: string; color: string; value: (r: LearningCurveRow) => number | null }[] = [
    { label: "train MSE", color: PALETTE[0], value: (r) => r.trainMse },
    { label: "test MSE", color: PALETTE[1], value: (r) => r.testMse },
    { label: "hedge IMSE", color: PALETTE[2], value: (r) => r.imseTest },
  ];

  // Log axis: only strictly positive values can be placed.
  const positives = series.flatMap((s) =>
    rows.map(s.value).filter((v): v is number => v !== null && v > 0),
  );
  const yDomain: [number, number] =
    positives.length > 0
      ? [Math.min(...positives) * 0.8, Math.max(...positives) * 1.25]
      : [1e-3, 1];
  const y = scaleLog().domain(yDomain).range([area.y0, area.y1]);

  const drawn: CurveSeries[] = series
    .map((s) => ({
      label: s.label,
      color: s.color,
      points: rows
        .filter((r) => {
          const v = s.value(r);
          return v !== null && v > 0;
        })
        .map((r): [number, number] => [x(r.order), y(s.value(r) as number)]),
    }))
    .filter((s) => s.points.length > 0);

  const decades = decadeTicks(yDomain[0], yDomain[1]);
  const yOptions =
    decades.length > 0
      ? { tickValues: decades, format: plainTick, gridLength: area.x1 - area.x0, label: "error" }
      : { tickCount: 5, format: plainTick, gridLength: area.x1 - area.x0, label: "error" };

  const content: string[] = [
    textEl(subtitle(report), {
      x: px(WIDTH / 2),
      y: 38,
      "text-anchor": "middle",
      "font-size": 11,
      fill: "#555",
    }),
    axisVertical(y, area.x0, "left", yOptions),
    axisBottom(x, area.y0, {
      tickValues: orders.length > 0 ? [...new Set(orders)] : [0, 1],
      format: plainTick,
      label: "chaos order N",
    }),
  ];
  for (const s of drawn) {
    content.push(polyline(s.points, s.color));
    content.push(markers(s.points, s.color, "circle"));
  }
  if (drawn.length === 0) {
    content.push(emptyNote(area));
  } else {
    content.push(
      legend(
        drawn.map((s): LegendItem => ({ label: s.label, color: s.color })),
        area.x1 - 120,
        area.y1 + 12,
      ),
    );
  }
  return document_("Learning curves", content);
}

// ---------------------------------------------------------------------------
// panel b: payoff distribution, true vs predicted per order

export function renderPayoffHistogram(
  sample: PayoffSample,
  report: ReportInfo,
): string {
  const area = plotArea();
  const seriesList = [
    { label: "payoff", color: "#333", width: 2, values: sample.payoffTrue },
    ...sample.predictions.map((pred, i) => ({
      label: `N=${pred.order}`,
      color: PALETTE[i % PALETTE.length],
      width: 1.2,
      values: pred.values,
    })),
  ];

  const allValues = seriesList.flatMap((s) => s.values);
  const content: string[] = [
    textEl(`${subtitle(report)}, ${sample.pathIds.length} test paths`, {
      x: px(WIDTH / 2),
      y: 38,
      "text-anchor": "middle",
      "font-size": 11,
      fill: "#555",
    }),
  ];

  if (allValues.length === 0) {
    const x = scaleLinear().domain([0, 1]).range([area.x0, area.x1]);
    const y = scaleLinear().domain([0, 1]).range([area.y0, area.y1]);
    content.push(
      axisVertical(y, area.x0, "left", { format: plainTick, label: "paths per bin" }),
      axisBottom(x, area.y0, { format: plainTick, label: "payoff" }),
      emptyNote(area),
    );
    return document_("Payoff distribution", content);
  }

  let [lo, hi] = extent(allValues) as [number, number];
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const thresholds = ticks(lo, hi, 40);
  const binner = bin().domain([lo, hi]).thresholds(thresholds);
  const binned = seriesList.map((s) => ({ ...s, bins: binner(s.values) }));

  const x = scaleLinear().domain([lo, hi]).range([area.x0, area.x1]);
  const peak = max(binned.flatMap((s) => s.bins.map((b) => b.length))) ?? 1;
  const y = scaleLinear().domain([0, peak]).nice().range([area.y0, area.y1]);

  content.push(
    axisVertical(y, area.x0, "left", {
      format: plainTick,
      gridLength: area.x1 - area.x0,
      label: "paths per bin",
    }),
    axisBottom(x, area.y0, { label: "payoff", format: plainTick }),
  );

  for (const s of binned) {
    // Step outline over the bin tops, dropped to the baseline at both ends.
    const points: [number, number][] = [];
    for (const b of s.bins) {
      if (b.x0 === undefined || b.x1 === undefined) {
        continue;
      }
      if (points.length === 0) {
        points.push([x(b.x0), y(0)]);
      }
      points.push([x(b.x0), y(b.length)]);
      points.push([x(b.x1), y(b.length)]);
    }
    if (points.length > 0) {
      points.push([points[points.length - 1][0], y(0)]);
      content.push(
        polyline(points, s.color, { "stroke-width": s.width, "stroke-opacity": 0.9 }),
      );
    }
  }

  content.push(
    legend(
      seriesList.map((s): LegendItem => ({ label: s.label, color: s.color })),
      area.x1 - 90,
      area.y1 + 12,
    ),
  );
  return document_("Payoff distribution", content);
}

// ---------------------------------------------------------------------------
// panel c: runtime and parameter count, twin axes

export function renderRuntimePanel(
  rows: LearningCurveRow[],
  report: ReportInfo,
): string {
  const margin: Margin = { ...MARGIN, right: 64 };
  const area = plotArea(margin);
  const orders = rows.map((row) => row.order);
  const xDomain: [number, number] =
    orders.length > 0 ? [Math.min(...orders), Math.max(...orders)] : [0, 1];
  const x = scaleLinear().domain(xDomain).range([area.x0, area.x1]);

  const runtimes = rows
    .filter((r) => r.runtimeSeconds !== null)
    .map((r): [number, number] => [r.order, r.runtimeSeconds as number]);
  const params = rows.map((r): [number, number] => [r.order, r.nParams]);

  const yLeft = scaleLinear()
    .domain([0, (max(runtimes.map((p) => p[1])) ?? 1) * 1.05])
    .nice()
    .range([area.y0, area.y1]);
  const yRight = scaleLinear()
    .domain([0, (max(params.map((p) => p[1])) ?? 1) * 1.05])
    .nice()
    .range([area.y0, area.y1]);

  const content: string[] = [
    textEl(subtitle(report), {
      x: px(WIDTH / 2),
      y: 38,
      "text-anchor": "middle",
      "font-size": 11,
      fill: "#555",
    }),
    axisVertical(yLeft, area.x0, "left", { format: plainTick, label: "runtime [s]" }),
    axisVertical(yRight, area.x1, "right", { format: plainTick, label: "parameters" }),
    axisBottom(x, area.y0, {
      tickValues: orders.length > 0 ? [...new Set(orders)] : [0, 1],
      format: plainTick,
      label: "chaos order N",
    }),
  ];

  if (rows.length === 0) {
    content.push(emptyNote(area));
    return document_("Runtime and model size", content);
  }

  const runtimePts = runtimes.map((p): [number, number] => [x(p[0]), yLeft(p[1])]);
  const paramPts = params.map((p): [number, number] => [x(p[0]), yRight(p[1])]);
  if (runtimePts.length > 0) {
    content.push(polyline(runtimePts, PALETTE[0]));
    content.push(markers(runtimePts, PALETTE[0], "circle"));
  }
  content.push(polyline(paramPts, PALETTE[1], { "stroke-dasharray": "5 3" }));
  content.push(markers(paramPts, PALETTE[1], "square"));
  content.push(
    legend(
      [
        { label: "runtime [s] (left)", color: PALETTE[0] },
        { label: "parameters (right)", color: PALETTE[1], dash: "5 3" },
      ],
      area.x0 + 12,
      area.y1 + 12,
    ),
  );
  return document_("Runtime and model size", content);
}

// ---------------------------------------------------------------------------
// panel d: hedge ratio trajectories, one panel per asset

export function renderHedgePanel(
  points: HedgePoint[],
  asset: number,
  report: ReportInfo,
): string {
  const area = plotArea();
  const byPath = new Map<number, HedgePoint[]>();
  for (const point of points) {
    const list = byPath.get(point.pathId);
    if (list) {
      list.push(point);
    } else {
      byPath.set(point.pathId, [point]);
    }
  }
  const pathIds = [...byPath.keys()].sort((a, b) => a - b);

  const values = points.flatMap((p) =>
    p.thetaRef !== null ? [p.thetaHat, p.thetaRef] : [p.thetaHat],
  );
  const tMax = max(points.map((p) => p.t)) ?? 1;
  const x = scaleLinear().domain([0, tMax]).range([area.x0, area.x1]);
  let [lo, hi] = values.length > 0 ? (extent(values) as [number, number]) : [0, 1];
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = (hi - lo) * 0.05;
  const y = scaleLinear()
    .domain([lo - pad, hi + pad])
    .nice()
    .range([area.y0, area.y1]);

  const content: string[] = [
    textEl(subtitle(report), {
      x: px(WIDTH / 2),
      y: 38,
      "text-anchor": "middle",
      "font-size": 11,
      fill: "#555",
    }),
    axisVertical(y, area.x0, "left", {
      format: plainTick,
      gridLength: area.x1 - area.x0,
      label: "hedge ratio θ",
    }),
    axisBottom(x, area.y0, { format: plainTick, label: "time t" }),
  ];

  const hasReference = points.some((p) => p.thetaRef !== null);
  pathIds.forEach((pathId, i) => {
    const color = PALETTE[i % PALETTE.length];
    const trajectory = [...(byPath.get(pathId) as HedgePoint[])].sort(
      (a, b) => a.t - b.t,
    );
    content.push(
      polyline(
        trajectory.map((p): [number, number] => [x(p.t), y(p.thetaHat)]),
        color,
      ),
    );
    const reference = trajectory.filter((p) => p.thetaRef !== null);
    if (reference.length > 0) {
      content.push(
        polyline(
          reference.map((p): [number, number] => [x(p.t), y(p.thetaRef as number)]),
          color,
          { "stroke-dasharray": "5 3", "stroke-width": 1.2 },
        ),
      );
    }
  });

  if (pathIds.length === 0) {
    content.push(emptyNote(area));
  } else {
    const items: LegendItem[] = [
      { label: "estimated", color: "#333" },
      ...(hasReference
        ? [{ label: "reference", color: "#333", dash: "5 3" } as LegendItem]
        : []),
      ...pathIds.map(
        (pathId, i): LegendItem => ({
          label: `path ${pathId}`,
          color: PALETTE[i % PALETTE.length],
        }),
      ),
    ];
    content.push(legend(items, area.x1 - 110, area.y1 + 12));
  }
  return document_(`Hedge ratio, asset ${asset + 1}`, content);
}
