import type { ArmDoc, SceneDoc } from "./types.js";

export interface Transform {
  scale: number;
  ox: number;
  oy: number;
}

/** Fit world bounds into a canvas, preserving aspect, y pointing up. */
export function fitTransform(
  bounds: [[number, number], [number, number]],
  width: number,
  height: number,
  margin = 12,
): Transform {
  const [[x0, y0], [x1, y1]] = bounds;
  const sx = (width - 2 * margin) / (x1 - x0);
  const sy = (height - 2 * margin) / (y1 - y0);
  const scale = Math.min(sx, sy);
  // center the world rectangle
  const ox = (width - scale * (x1 - x0)) / 2 - scale * x0;
  const oy = (height + scale * (y1 - y0)) / 2 + scale * y0;
  return { scale, ox, oy };
}

export function worldToScreen(tf: Transform, p: [number, number]): [number, number] {
  return [tf.ox + tf.scale * p[0], tf.oy - tf.scale * p[1]];
}

export function screenToWorld(tf: Transform, p: [number, number]): [number, number] {
  return [(p[0] - tf.ox) / tf.scale, (tf.oy - p[1]) / tf.scale];
}

/** Joint positions (base first, tip last) for one configuration. */
export function jointPositions(arm: ArmDoc, q: number[]): [number, number][] {
  let angle = 0;
  let [x, y] = arm.base;
  const joints: [number, number][] = [[x, y]];
  for (let i = 0; i < arm.links.length; i++) {
    angle += q[i];
    x += arm.links[i] * Math.cos(angle);
    y += arm.links[i] * Math.sin(angle);
    joints.push([x, y]);
  }
  return joints;
}

/** Points along every link at the configured spacing, base to tip. */
export function bodyPoints(arm: ArmDoc, q: number[]): [number, number][] {
  const joints = jointPositions(arm, q);
  const points: [number, number][] = [joints[0]];
  for (let i = 0; i < arm.links.length; i++) {
    const [ax, ay] = joints[i];
    const [bx, by] = joints[i + 1];
    const length = arm.links[i];
    const n = Math.max(1, Math.floor(length / arm.body_point_spacing + 1e-9));
    for (let k = 1; k <= n; k++) {
      const t = (k * arm.body_point_spacing) / length;
      points.push([ax + (bx - ax) * t, ay + (by - ay) * t]);
    }
    const last = points[points.length - 1];
    if (Math.hypot(last[0] - bx, last[1] - by) > 1e-9) points.push([bx, by]);
  }
  return points;
}

export function signedDistance(p: [number, number], scene: SceneDoc): number {
  if (scene.obstacles.length === 0) return 1e6;
  let best = Infinity;
  for (const o of scene.obstacles) {
    best = Math.min(best, Math.hypot(p[0] - o.c[0], p[1] - o.c[1]) - o.r);
  }
  return best;
}

/** Body points in contact or penetration (d <= 0) across selected frames. */
export function collisionMarkers(
  arm: ArmDoc,
  trajectory: number[][],
  scene: SceneDoc,
  stride = 1,
): [number, number][] {
  const markers: [number, number][] = [];
  for (let t = 0; t < trajectory.length; t += stride) {
    for (const p of bodyPoints(arm, trajectory[t])) {
      if (signedDistance(p, scene) <= 0) markers.push(p);
    }
  }
  return markers;
}

/** Index of the obstacle containing the point, or -1. */
export function obstacleAt(scene: SceneDoc, p: [number, number]): number {
  for (let i = scene.obstacles.length - 1; i >= 0; i--) {
    const o = scene.obstacles[i];
    if (Math.hypot(p[0] - o.c[0], p[1] - o.c[1]) <= o.r) return i;
  }
  return -1;
}
