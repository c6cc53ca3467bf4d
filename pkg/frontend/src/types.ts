// Shapes mirrored from the server's JSON API (schemas/api.schema.json).

export interface ArmDoc {
  links: number[];
  body_point_spacing: number;
  base: [number, number];
}

export interface ObstacleDoc {
  c: [number, number];
  r: number;
}

export interface SceneDoc {
  obstacles: ObstacleDoc[];
  bounds: [[number, number], [number, number]];
}

export interface Meta {
  problem_tag: string;
  latent_dim: 1 | 2;
  input_dim: number;
  z_range: [number, number];
  T: number | null;
  D: number | null;
  dt: number | null;
  arm: ArmDoc | null;
  q_start: number[] | null;
  q_goal: number[] | null;
  scene: SceneDoc;
  scene_version: number;
}

export interface CostBreakdown {
  obstacle: number;
  smoothness: number;
  total: number;
}

export interface SolutionRecord {
  z: number[];
  x_raw: number[];
  x_refined: number[] | null;
  score_raw: number;
  score_refined: number | null;
  collision_free_raw: boolean | null;
  collision_free_refined: boolean | null;
  homotopy_raw: string | null;
  homotopy_refined: string | null;
  finetune_iterations: number;
  trajectory_raw: number[][] | null;
  trajectory_refined: number[][] | null;
  breakdown_raw: CostBreakdown | null;
  breakdown_refined: CostBreakdown | null;
  tip_path: number[][] | null;
  scene_version: number;
}

export interface Revalidation {
  cached: number;
  surviving: number;
  per_class: Record<string, number>;
}

export interface SceneEditResponse {
  scene: SceneDoc;
  scene_version: number;
  revalidation: Revalidation;
}

export type SceneOp =
  | { op: "add"; c: [number, number]; r: number }
  | { op: "remove"; index: number }
  | { op: "move"; index: number; c: [number, number] };
