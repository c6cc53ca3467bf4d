import type { Meta, SceneDoc, SolutionRecord } from "./types.js";

/**
 * Single source of truth for the page.  Every mutation happens through the
 * pure functions below, so the view is reproducible from (settled z, scene
 * version, pinned list).
 */
export interface ViewState {
  meta: Meta | null;
  z: number[];
  current: SolutionRecord | null;
  sweepStrip: SolutionRecord[];
  scene: SceneDoc | null;
  sceneVersion: number;
  pinned: SolutionRecord[];
  busy: boolean;
  lastError: string | null;
}

export function initialState(): ViewState {
  return {
    meta: null,
    z: [],
    current: null,
    sweepStrip: [],
    scene: null,
    sceneVersion: 0,
    pinned: [],
    busy: false,
    lastError: null,
  };
}

export function clampZ(z: number[], range: [number, number]): number[] {
  return z.map((v) => Math.min(range[1], Math.max(range[0], v)));
}

export function withMeta(state: ViewState, meta: Meta): ViewState {
  const mid = (meta.z_range[0] + meta.z_range[1]) / 2;
  return {
    ...state,
    meta,
    scene: meta.scene,
    sceneVersion: meta.scene_version,
    z: state.z.length === meta.latent_dim ? state.z : new Array(meta.latent_dim).fill(mid),
  };
}

export function withZ(state: ViewState, z: number[]): ViewState {
  if (!state.meta) return state;
  return { ...state, z: clampZ(z, state.meta.z_range) };
}

/** Adopt a record only if it answers the currently settled z. */
export function withRecord(state: ViewState, record: SolutionRecord): ViewState {
  const matches =
    record.z.length === state.z.length &&
    record.z.every((v, i) => Math.abs(v - state.z[i]) < 5e-4);
  if (!matches) return state;
  return { ...state, current: record, lastError: null };
}

export function withSweep(state: ViewState, records: SolutionRecord[]): ViewState {
  return { ...state, sweepStrip: records };
}

export function withScene(state: ViewState, scene: SceneDoc, version: number): ViewState {
  return { ...state, scene, sceneVersion: version, current: null, sweepStrip: [] };
}

export function withError(state: ViewState, message: string): ViewState {
  return { ...state, lastError: message };
}

export function pinCurrent(state: ViewState): ViewState {
  if (!state.current) return state;
  return { ...state, pinned: [...state.pinned, state.current] };
}

/** Score/collision summary for the badge row. */
export function badge(record: SolutionRecord): { score: number; collisionFree: boolean | null } {
  const score = record.score_refined ?? record.score_raw;
  const free = record.collision_free_refined ?? record.collision_free_raw;
  return { score, collisionFree: free };
}

/** The accepted-solution download payload: the record exactly as served. */
export function exportPayload(record: SolutionRecord): string {
  return JSON.stringify(record, null, 1);
}
