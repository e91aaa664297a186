/**
 * Minimal deterministic SVG assembly.
 *
 * Figures are built as strings rather than through a DOM so that re-running
 * the renderer on the same inputs produces byte-identical files: no random
 * class names, no generated element ids, no timestamps.
 */

import type { ScaleContinuousNumeric } from "d3-scale";

export type Scale = ScaleContinuousNumeric<number, number>;

export interface Margin {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export const WIDTH = 640;
export const HEIGHT = 420;
export const MARGIN: Margin = { top: 44, right: 36, bottom: 52, left: 64 };

export const PALETTE = [
  "#4e79a7",
  "#f28e2b",
  "#e15759",
  "#76b7b2",
  "#59a14f",
  "#edc948",
  "#b07aa1",
  "#9c755f",
] as const;

export const FONT = "font-family=\"Helvetica, Arial, sans-serif\"";

/** Fixed-precision pixel coordinate; trailing zeros trimmed for stability. */
export function px(value: number): string {
  const rounded = value.toFixed(2);
  return rounded.includes(".")
    ? rounded.replace(/0+$/, "").replace(/\.$/, "")
    : rounded;
}

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function el(
  tag: string,
  attrs: Record<string, string | number>,
  children: string[] = [],
): string {
  const attrText = Object.entries(attrs)
    .map(([key, value]) => ` ${key}="${value}"`)
    .join("");
  if (children.length === 0) {
    return `<${tag}${attrText}/>`;
  }
  return `<${tag}${attrText}>${children.join("")}</${tag}>`;
}

export function textEl(
  content: string,
  attrs: Record<string, string | number>,
): string {
  const attrText = Object.entries(attrs)
    .map(([key, value]) => ` ${key}="${value}"`)
    .join("");
  return `<text${attrText}>${escapeXml(content)}</text>`;
}

export function polyline(
  points: [number, number][],
  stroke: string,
  extra: Record<string, string | number> = {},
): string {
  const pts = points.map(([x, y]) => `${px(x)},${px(y)}`).join(" ");
  return el("polyline", {
    points: pts,
    fill: "none",
    stroke,
    "stroke-width": 1.5,
    ...extra,
  });
}

export interface AxisOptions {
  /** Tick label formatter; defaults to the scale's own tick format. */
  format?: (value: number) => string;
  tickCount?: number;
  /** Explicit tick values override tickCount. */
  tickValues?: number[];
  label?: string;
  /** Extend tick lines across the plot area as a light grid. */
  gridLength?: number;
}

function tickSet(scale: Scale, options: AxisOptions): number[] {
  if (options.tickValues) {
    return options.tickValues;
  }
  return scale.ticks(options.tickCount ?? 6);
}

function tickFormatter(scale: Scale, options: AxisOptions): (v: number) => string {
  if (options.format) {
    return options.format;
  }
  return scale.tickFormat(options.tickCount ?? 6);
}

/** Horizontal axis along y = atY. */
export function axisBottom(scale: Scale, atY: number, options: AxisOptions = {}): string {
  const [x0, x1] = scale.range();
  const format = tickFormatter(scale, options);
  const parts: string[] = [
    el("line", { x1: px(x0), y1: px(atY), x2: px(x1), y2: px(atY), stroke: "#333" }),
  ];
  for (const value of tickSet(scale, options)) {
    const x = scale(value);
    if (options.gridLength) {
      parts.push(
        el("line", {
          x1: px(x),
          y1: px(atY),
          x2: px(x),
          y2: px(atY - options.gridLength),
          stroke: "#ddd",
        }),
      );
    }
    parts.push(
      el("line", { x1: px(x), y1: px(atY), x2: px(x), y2: px(atY + 5), stroke: "#333" }),
    );
    parts.push(
      textEl(format(value), {
        x: px(x),
        y: px(atY + 18),
        "text-anchor": "middle",
        "font-size": 11,
        fill: "#333",
      }),
    );
  }
  if (options.label) {
    parts.push(
      textEl(options.label, {
        x: px((x0 + x1) / 2),
        y: px(atY + 38),
        "text-anchor": "middle",
        "font-size": 12,
        fill: "#333",
      }),
    );
  }
  return el("g", {}, parts);
}

/** Vertical axis along x = atX; set `side: "right"` for a right-hand axis. */
export function axisVertical(
  scale: Scale,
  atX: number,
  side: "left" | "right",
  options: AxisOptions = {},
): string {
  const [y1, y0] = scale.range();
  const sign = side === "left" ? -1 : 1;
  const format = tickFormatter(scale, options);
  const parts: string[] = [
    el("line", { x1: px(atX), y1: px(y0), x2: px(atX), y2: px(y1), stroke: "#333" }),
  ];
  for (const value of tickSet(scale, options)) {
    const y = scale(value);
    if (options.gridLength) {
      parts.push(
        el("line", {
          x1: px(atX),
          y1: px(y),
          x2: px(atX + options.gridLength),
          y2: px(y),
          stroke: "#ddd",
        }),
      );
    }
    parts.push(
      el("line", { x1: px(atX), y1: px(y), x2: px(atX + sign * 5), y2: px(y), stroke: "#333" }),
    );
    parts.push(
      textEl(format(value), {
        x: px(atX + sign * 8),
        y: px(y + 3.5),
        "text-anchor": side === "left" ? "end" : "start",
        "font-size": 11,
        fill: "#333",
      }),
    );
  }
  if (options.label) {
    const yMid = (y0 + y1) / 2;
    const xLab = atX + sign * 44;
    parts.push(
      textEl(options.label, {
        x: px(xLab),
        y: px(yMid),
        "text-anchor": "middle",
        "font-size": 12,
        fill: "#333",
        transform: `rotate(${side === "left" ? -90 : 90} ${px(xLab)} ${px(yMid)})`,
      }),
    );
  }
  return el("g", {}, parts);
}

export interface LegendItem {
  label: string;
  color: string;
  dash?: string;
}

/** Compact line legend anchored at (x, y), one row per item. */
export function legend(items: LegendItem[], x: number, y: number): string {
  const rows = items.map((item, i) => {
    const rowY = y + i * 16;
    const line = el("line", {
      x1: px(x),
      y1: px(rowY),
      x2: px(x + 22),
      y2: px(rowY),
      stroke: item.color,
      "stroke-width": 2,
      ...(item.dash ? { "stroke-dasharray": item.dash } : {}),
    });
    const label = textEl(item.label, {
      x: px(x + 28),
      y: px(rowY + 3.5),
      "font-size": 11,
      fill: "#333",
    });
    return line + label;
  });
  return el("g", {}, rows);
}

/** Wrap plot content in a complete standalone SVG document with a title. */
export function document_(title: string, content: string[]): string {
  const body = [
    el("rect", { width: WIDTH, height: HEIGHT, fill: "white" }),
    textEl(title, {
      x: px(WIDTH / 2),
      y: 22,
      "text-anchor": "middle",
      "font-size": 14,
      "font-weight": "bold",
      fill: "#111",
    }),
    ...content,
  ];
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
    `viewBox="0 0 ${WIDTH} ${HEIGHT}" ${FONT}>` +
    body.join("") +
    "</svg>\n"
  );
}
