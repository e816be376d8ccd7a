import type { FrameDoc, ProvenanceDoc } from "./types.js";

// Stroke colors by frame provenance: retrieved frames play back verbatim,
// blended and resampled frames are synthesized and get distinct tints.
export const STROKE_COLORS: Record<string, string> = {
  retrieved: "#4cc2ff",
  blended: "#ff9f43",
  resampled: "#c792ea",
};
export const JOINT_COLOR = "#e8f1f8";

/** The subset of CanvasRenderingContext2D the renderer touches; tests drive
 * it with a recording implementation. Style properties take the DOM union
 * type so a real 2D context is assignable, but the renderer only ever
 * assigns strings. */
export interface Draw2D {
  lineWidth: number;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
}

export interface Viewport {
  width: number;
  height: number;
  /** world units mapped to the shorter viewport side */
  worldExtent?: number;
}

/**
 * Screen-space joint positions for a frame: the 2D projection when present,
 * otherwise an orthographic projection of the global joints (X right,
 * Y up, Z dropped) scaled into the viewport.
 */
export function projectJoints(frame: FrameDoc, vp: Viewport): [number, number][] {
  if (frame.joints2d && frame.joints2d.length) {
    return frame.joints2d.map(([x, y]) => [x ?? 0, y ?? 0]);
  }
  const extent = vp.worldExtent ?? 4.0;
  const scale = Math.min(vp.width, vp.height) / extent;
  const cx = vp.width / 2;
  const cy = vp.height / 2;
  return frame.global.map(([x, y]) => [cx + (x ?? 0) * scale, cy - (y ?? 0) * scale]);
}

function strokeFor(provenance?: ProvenanceDoc): string {
  return STROKE_COLORS[provenance?.kind ?? "retrieved"] ?? STROKE_COLORS["retrieved"]!;
}

/**
 * Draw one frame as a stick figure: bones follow the skeleton parent array,
 * joints are dots. Provenance picks the stroke tint.
 */
export function renderSkeleton(
  draw: Draw2D,
  frame: FrameDoc,
  parents: number[],
  vp: Viewport,
  provenance?: ProvenanceDoc,
): void {
  const pts = projectJoints(frame, vp);
  draw.lineWidth = 2;
  draw.strokeStyle = strokeFor(provenance ?? frame.provenance);
  draw.fillStyle = JOINT_COLOR;
  for (let j = 1; j < parents.length; j++) {
    const p = parents[j];
    if (p === undefined || p < 0) continue;
    const a = pts[j];
    const b = pts[p];
    if (!a || !b) continue;
    draw.beginPath();
    draw.moveTo(b[0], b[1]);
    draw.lineTo(a[0], a[1]);
    draw.stroke();
  }
  for (const pt of pts) {
    draw.beginPath();
    draw.arc(pt[0], pt[1], 3, 0, 2 * Math.PI);
    draw.fill();
  }
}

/** Recording Draw2D used by tests (golden snapshots) and the debug panel. */
export class DrawLog implements Draw2D {
  lineWidth = 1;
  strokeStyle: string | CanvasGradient | CanvasPattern = "";
  fillStyle: string | CanvasGradient | CanvasPattern = "";
  ops: (string | number)[][] = [];

  beginPath() {
    this.ops.push(["beginPath"]);
  }
  moveTo(x: number, y: number) {
    this.ops.push(["moveTo", round3(x), round3(y)]);
  }
  lineTo(x: number, y: number) {
    this.ops.push(["lineTo", round3(x), round3(y)]);
  }
  arc(x: number, y: number, r: number, a0: number, a1: number) {
    this.ops.push(["arc", round3(x), round3(y), r, a0, round3(a1)]);
  }
  stroke() {
    this.ops.push(["stroke", String(this.strokeStyle)]);
  }
  fill() {
    this.ops.push(["fill", String(this.fillStyle)]);
  }
}

function round3(x: number): number {
  return Math.round(x * 1000) / 1000;
}
