// Region heatmap: colored cells per preferred action plus the elicited point
// marker.  Geometry is separated from drawing so tests can run without a DOM.

import type { SweepCell, SweepResponse } from "./types";
import { cellOf } from "./state";

export interface CellRect {
  x: number;
  y: number;
  w: number;
  h: number;
  label: string;
}

const PALETTE = ["#4e79a7", "#f2f2f2", "#e15759", "#76b7b2", "#f28e2b"];

export function labelColor(labels: string[], label: string): string {
  if (label === "indifferent") return "#b8b42d";
  const idx = labels.indexOf(label);
  return PALETTE[idx >= 0 ? idx % PALETTE.length : PALETTE.length - 1];
}

/** Lay a two-axis sweep out on a width-by-height pixel canvas; the first
 * axis runs left to right, the second bottom to top. */
export function layoutCells(
  sweep: SweepResponse,
  width: number,
  height: number,
): CellRect[] {
  if (sweep.axes.length !== 2) {
    throw new Error("heatmap needs exactly two axes");
  }
  const [ax, ay] = sweep.axes;
  const cw = width / ax.steps;
  const ch = height / ay.steps;
  return sweep.cells.map((cell: SweepCell) => ({
    x: cell.idx[0] * cw,
    y: height - (cell.idx[1] + 1) * ch,
    w: cw,
    h: ch,
    label: cell.label,
  }));
}

export function pointPixel(
  sweep: SweepResponse,
  point: [number, number],
  width: number,
  height: number,
): { x: number; y: number } {
  const [ax, ay] = sweep.axes;
  const sx = (v: number) =>
    ((v - Number(ax.lo)) / (Number(ax.hi) - Number(ax.lo))) * width;
  const sy = (v: number) =>
    height - ((v - Number(ay.lo)) / (Number(ay.hi) - Number(ay.lo))) * height;
  return { x: sx(point[0]), y: sy(point[1]) };
}

/** Label of the cell containing a point, for the marker's legend line. */
export function labelAt(sweep: SweepResponse, point: [number, number]): string {
  const [ax, ay] = sweep.axes;
  const ix = cellOf(
    { lo: Number(ax.lo), hi: Number(ax.hi), steps: ax.steps },
    point[0],
  );
  const iy = cellOf(
    { lo: Number(ay.lo), hi: Number(ay.hi), steps: ay.steps },
    point[1],
  );
  const hit = sweep.cells.find((c) => c.idx[0] === ix && c.idx[1] === iy);
  return hit ? hit.label : "outside";
}

interface MinimalContext {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fill(): void;
  stroke(): void;
}

export function drawHeatmap(
  ctx: MinimalContext,
  sweep: SweepResponse,
  width: number,
  height: number,
  marked?: [number, number],
): void {
  for (const rect of layoutCells(sweep, width, height)) {
    ctx.fillStyle = labelColor(sweep.labels, rect.label);
    ctx.fillRect(rect.x, rect.y, rect.w + 0.5, rect.h + 0.5);
  }
  if (marked) {
    const { x, y } = pointPixel(sweep, marked, width, height);
    ctx.beginPath();
    ctx.arc(x, y, 5, 0, 2 * Math.PI);
    ctx.fillStyle = "#111111";
    ctx.fill();
    ctx.strokeStyle = "#ffffff";
    ctx.lineWidth = 2;
    ctx.stroke();
  }
}
