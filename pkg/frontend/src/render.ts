/**
 * Canvas renderers for the two environments plus the episode chart. The
 * geometry helpers are pure so they can be unit-tested without a canvas.
 */

import { Case, StateUpdate } from "./protocol.js";

export interface MapRect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface MapInfo {
  width_m: number;
  height_m: number;
  obstacles: MapRect[];
}

export interface Pose {
  x: number;
  y: number;
  heading: number;
}

/** Car-frame offset (+x right, +y forward) to world coordinates. */
export function carFramePoint(
  pose: Pose,
  dx: number,
  dy: number,
): { x: number; y: number } {
  const rad = (pose.heading * Math.PI) / 180;
  const sin = Math.sin(rad);
  const cos = Math.cos(rad);
  return {
    x: pose.x + dx * sin + dy * cos,
    y: pose.y - dx * cos + dy * sin,
  };
}

/** Mountain-car terrain height used purely for drawing the valley. */
export function valleyHeight(x: number): number {
  return Math.sin(3 * x);
}

const CLEAR_COLOR = "#2e7d32";
const BLOCKED_COLOR = "#c62828";

export function renderDriving(
  ctx: CanvasRenderingContext2D,
  widthPx: number,
  heightPx: number,
  map: MapInfo,
  pose: Pose,
  kase: Case,
  offsets: Record<string, [number, number]>,
  crashFlash: boolean,
): void {
  const sx = widthPx / map.width_m;
  const sy = heightPx / map.height_m;
  const toPx = (x: number, y: number): [number, number] => [x * sx, heightPx - y * sy];

  ctx.fillStyle = crashFlash ? "#4a1614" : "#111418";
  ctx.fillRect(0, 0, widthPx, heightPx);
  ctx.strokeStyle = "#9e9e9e";
  ctx.strokeRect(0.5, 0.5, widthPx - 1, heightPx - 1);

  ctx.fillStyle = "#e0e0e0";
  for (const r of map.obstacles) {
    const [px, py] = toPx(r.x, r.y + r.h);
    ctx.fillRect(px, py, r.w * sx, r.h * sy);
  }

  const [cx, cy] = toPx(pose.x, pose.y);
  ctx.fillStyle = "#1565c0";
  ctx.beginPath();
  ctx.arc(cx, cy, Math.max(3, sx), 0, 2 * Math.PI);
  ctx.fill();

  // heading direction line
  const tip = carFramePoint(pose, 0, 3);
  const [tx, ty] = toPx(tip.x, tip.y);
  ctx.strokeStyle = "#fdd835";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(cx, cy);
  ctx.lineTo(tx, ty);
  ctx.stroke();
  ctx.lineWidth = 1;

  for (const [name, [dx, dy]] of Object.entries(offsets)) {
    const p = carFramePoint(pose, dx, dy);
    const [px, py] = toPx(p.x, p.y);
    ctx.fillStyle = kase[name] ? BLOCKED_COLOR : CLEAR_COLOR;
    ctx.fillRect(px - 2, py - 2, 4, 4);
  }

  ctx.fillStyle = "#fdd835";
  ctx.font = "12px monospace";
  ctx.fillText(`${Number(kase["velocity"]).toFixed(1)} m/s`, cx + 6, cy + 14);
}

export function renderMountainCar(
  ctx: CanvasRenderingContext2D,
  widthPx: number,
  heightPx: number,
  kase: Case,
  crashFlash: boolean,
): void {
  const xMin = -1.2;
  const xMax = 0.6;
  const toPx = (x: number, h: number): [number, number] => [
    ((x - xMin) / (xMax - xMin)) * widthPx,
    heightPx - ((h + 1.1) / 2.3) * heightPx,
  ];

  ctx.fillStyle = crashFlash ? "#4a1614" : "#111418";
  ctx.fillRect(0, 0, widthPx, heightPx);

  ctx.strokeStyle = "#9e9e9e";
  ctx.beginPath();
  for (let i = 0; i <= 100; i += 1) {
    const x = xMin + ((xMax - xMin) * i) / 100;
    const [px, py] = toPx(x, valleyHeight(x));
    if (i === 0) {
      ctx.moveTo(px, py);
    } else {
      ctx.lineTo(px, py);
    }
  }
  ctx.stroke();

  const flag = toPx(0.6, valleyHeight(0.6));
  ctx.strokeStyle = "#2e7d32";
  ctx.beginPath();
  ctx.moveTo(flag[0], flag[1]);
  ctx.lineTo(flag[0], flag[1] - 18);
  ctx.stroke();

  const pos = Number(kase["position"]);
  const vel = Number(kase["velocity"]);
  const [cx, cy] = toPx(pos, valleyHeight(pos));
  ctx.fillStyle = "#1565c0";
  ctx.beginPath();
  ctx.arc(cx, cy - 5, 6, 0, 2 * Math.PI);
  ctx.fill();

  ctx.strokeStyle = "#fdd835";
  ctx.beginPath();
  ctx.moveTo(cx, cy - 5);
  ctx.lineTo(cx + Math.sign(vel) * Math.min(40, Math.abs(vel) * 600), cy - 5);
  ctx.stroke();

  ctx.fillStyle = "#e0e0e0";
  ctx.font = "12px monospace";
  ctx.fillText(`x=${pos.toFixed(3)} v=${vel.toFixed(4)}`, 8, 14);
}

export function renderEpisodeChart(
  ctx: CanvasRenderingContext2D,
  widthPx: number,
  heightPx: number,
  values: number[],
  color = "#64b5f6",
): void {
  ctx.fillStyle = "#111418";
  ctx.fillRect(0, 0, widthPx, heightPx);
  if (!values.length) {
    return;
  }
  const max = Math.max(...values, 1);
  ctx.strokeStyle = color;
  ctx.beginPath();
  values.forEach((v, i) => {
    const px = (i / Math.max(values.length - 1, 1)) * widthPx;
    const py = heightPx - (v / max) * (heightPx - 4) - 2;
    if (i === 0) {
      ctx.moveTo(px, py);
    } else {
      ctx.lineTo(px, py);
    }
  });
  ctx.stroke();
}

export function describeUpdate(update: StateUpdate): string {
  return (
    `step ${update.step} ep ${update.episode} ` +
    `${update.action} (${update.source}) r=${update.reward.toFixed(1)}`
  );
}
