import { zColor } from "./colormap.js";
import {
  collisionMarkers,
  fitTransform,
  jointPositions,
  worldToScreen,
  type Transform,
} from "./geometry.js";
import type { ArmDoc, SceneDoc, SolutionRecord } from "./types.js";

const ARM_FRAMES = 6; // arm poses drawn per record, spread across time

export function sceneTransform(scene: SceneDoc, canvas: HTMLCanvasElement): Transform {
  return fitTransform(scene.bounds, canvas.width, canvas.height);
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  tf: Transform,
  scene: SceneDoc,
  arm: ArmDoc | null,
  record: SolutionRecord | null,
  zRange: [number, number],
): void {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);

  for (const o of scene.obstacles) {
    const [cx, cy] = worldToScreen(tf, o.c);
    ctx.beginPath();
    ctx.arc(cx, cy, o.r * tf.scale, 0, 2 * Math.PI);
    ctx.fillStyle = "rgba(120, 124, 140, 0.55)";
    ctx.fill();
    ctx.strokeStyle = "#4a4e5c";
    ctx.stroke();
  }
  if (!record || !arm) return;

  const traj = record.trajectory_refined ?? record.trajectory_raw;
  const color = zColor(record.z[0], zRange[0], zRange[1]);
  if (traj) {
    const stride = Math.max(1, Math.floor((traj.length - 1) / (ARM_FRAMES - 1)));
    for (let t = 0; t < traj.length; t += stride) {
      drawArmPose(ctx, tf, arm, traj[t], t === 0 || t + stride >= traj.length ? 0.9 : 0.25);
    }
  }
  if (record.tip_path) {
    ctx.beginPath();
    record.tip_path.forEach((p, i) => {
      const [x, y] = worldToScreen(tf, [p[0], p[1]]);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.strokeStyle = color;
    ctx.lineWidth = 2.5;
    ctx.stroke();
    ctx.lineWidth = 1;
  }
  if (traj) {
    for (const p of collisionMarkers(arm, traj, scene, 2)) {
      const [x, y] = worldToScreen(tf, p);
      ctx.beginPath();
      ctx.arc(x, y, 4, 0, 2 * Math.PI);
      ctx.fillStyle = "rgba(222, 49, 62, 0.9)";
      ctx.fill();
    }
  }
}

function drawArmPose(
  ctx: CanvasRenderingContext2D,
  tf: Transform,
  arm: ArmDoc,
  q: number[],
  alpha: number,
): void {
  const joints = jointPositions(arm, q);
  ctx.beginPath();
  joints.forEach((p, i) => {
    const [x, y] = worldToScreen(tf, p);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.strokeStyle = `rgba(40, 44, 58, ${alpha})`;
  ctx.lineWidth = 3;
  ctx.stroke();
  ctx.lineWidth = 1;
  const [bx, by] = worldToScreen(tf, joints[0]);
  ctx.beginPath();
  ctx.arc(bx, by, 4, 0, 2 * Math.PI);
  ctx.fillStyle = "#282c3a";
  ctx.fill();
}

/** Tiny tip-path-only view for the sweep strip. */
export function drawThumbnail(
  canvas: HTMLCanvasElement,
  scene: SceneDoc,
  record: SolutionRecord,
  zRange: [number, number],
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const tf = fitTransform(scene.bounds, canvas.width, canvas.height, 3);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  for (const o of scene.obstacles) {
    const [cx, cy] = worldToScreen(tf, o.c);
    ctx.beginPath();
    ctx.arc(cx, cy, o.r * tf.scale, 0, 2 * Math.PI);
    ctx.fillStyle = "rgba(120, 124, 140, 0.5)";
    ctx.fill();
  }
  if (record.tip_path) {
    ctx.beginPath();
    record.tip_path.forEach((p, i) => {
      const [x, y] = worldToScreen(tf, [p[0], p[1]]);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.strokeStyle = zColor(record.z[0], zRange[0], zRange[1]);
    ctx.lineWidth = 1.5;
    ctx.stroke();
  }
  const free = record.collision_free_refined ?? record.collision_free_raw;
  if (free === false) {
    ctx.fillStyle = "rgba(222, 49, 62, 0.85)";
    ctx.fillRect(0, 0, canvas.width, 3);
  }
}
