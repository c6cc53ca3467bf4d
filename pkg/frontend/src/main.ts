/**
 * Explorer page wiring.
 *
 * Layout: a main canvas with the scene and arm, latent sliders (plus a 2-D
 * pad for two-channel models), a sweep strip of thumbnails, score and
 * collision badges, fine-tune / accept buttons, and obstacle editing
 * directly on the canvas (click adds, drag moves, double-click removes).
 */

import { ApiClient, isAbort } from "./api.js";
import { debounce } from "./debounce.js";
import { normalized, zColor } from "./colormap.js";
import { obstacleAt, screenToWorld } from "./geometry.js";
import { drawScene, drawThumbnail, sceneTransform } from "./render.js";
import * as st from "./state.js";

const SLIDER_STEPS = 400;
const SWEEP_COUNT = 24;
const DEBOUNCE_MS = 80;
const NEW_OBSTACLE_RADIUS = 0.08;

const api = new ApiClient("");
let state = st.initialState();

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

const canvas = $("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const sliderBox = $("sliders");
const pad = $("pad") as HTMLCanvasElement;
const strip = $("strip");
const scoreBadge = $("score-badge");
const collisionBadge = $("collision-badge");
const classBadge = $("class-badge");
const survivorsBox = $("survivors");
const toast = $("toast");

function showError(message: string): void {
  state = st.withError(state, message);
  toast.textContent = message;
  toast.classList.add("visible");
  setTimeout(() => toast.classList.remove("visible"), 2500);
}

function render(): void {
  if (!state.meta || !state.scene) return;
  const tf = sceneTransform(state.scene, canvas);
  drawScene(ctx, tf, state.scene, state.meta.arm, state.current, state.meta.z_range);
  renderBadges();
  renderPad();
}

function renderBadges(): void {
  const rec = state.current;
  if (!rec) {
    scoreBadge.textContent = "score: -";
    collisionBadge.textContent = "";
    classBadge.textContent = "";
    return;
  }
  const { score, collisionFree } = st.badge(rec);
  scoreBadge.textContent = `score: ${score.toFixed(3)}`;
  if (collisionFree === null) {
    collisionBadge.textContent = "";
  } else {
    collisionBadge.textContent = collisionFree ? "collision-free" : "collision";
    collisionBadge.className = `badge ${collisionFree ? "ok" : "bad"}`;
  }
  const label = rec.homotopy_refined ?? rec.homotopy_raw;
  classBadge.textContent = label ? `class ${label}` : "";
  if (rec.finetune_iterations > 0) {
    classBadge.textContent += ` (refined in ${rec.finetune_iterations} steps)`;
  }
}

// ---------------------------------------------------------------------------
// Latent controls

const requestGenerate = debounce((z: number[]) => {
  void fetchRecord(z, false);
}, DEBOUNCE_MS);

async function fetchRecord(z: number[], finetune: boolean): Promise<void> {
  try {
    const record = await api.generate(z, finetune);
    state = st.withRecord(state, record);
    render();
  } catch (err) {
    if (!isAbort(err)) showError(String(err));
  }
}

function setZ(z: number[], immediate = false): void {
  state = st.withZ(state, z);
  syncSliders();
  if (immediate) {
    requestGenerate.cancel();
    void fetchRecord(state.z, false);
  } else {
    requestGenerate(state.z);
  }
}

function buildSliders(): void {
  if (!state.meta) return;
  sliderBox.innerHTML = "";
  const [lo, hi] = state.meta.z_range;
  for (let dim = 0; dim < state.meta.latent_dim; dim++) {
    const row = document.createElement("div");
    row.className = "slider-row";
    const label = document.createElement("span");
    label.textContent = `z${dim}`;
    const input = document.createElement("input");
    input.type = "range";
    input.min = "0";
    input.max = String(SLIDER_STEPS);
    input.step = "1";
    input.dataset.dim = String(dim);
    input.addEventListener("input", () => {
      const t = Number(input.value) / SLIDER_STEPS;
      const z = [...state.z];
      z[dim] = lo + t * (hi - lo);
      setZ(z);
    });
    const value = document.createElement("span");
    value.className = "slider-value";
    value.dataset.dim = String(dim);
    row.append(label, input, value);
    sliderBox.appendChild(row);
  }
  pad.style.display = state.meta.latent_dim === 2 ? "block" : "none";
  syncSliders();
}

function syncSliders(): void {
  if (!state.meta) return;
  const [lo, hi] = state.meta.z_range;
  sliderBox.querySelectorAll<HTMLInputElement>("input[type=range]").forEach((input) => {
    const dim = Number(input.dataset.dim);
    input.value = String(Math.round(((state.z[dim] - lo) / (hi - lo)) * SLIDER_STEPS));
  });
  sliderBox.querySelectorAll<HTMLElement>(".slider-value").forEach((span) => {
    const dim = Number(span.dataset.dim);
    span.textContent = state.z[dim].toFixed(3);
  });
}

function renderPad(): void {
  if (!state.meta || state.meta.latent_dim !== 2) return;
  const pctx = pad.getContext("2d")!;
  pctx.clearRect(0, 0, pad.width, pad.height);
  pctx.strokeStyle = "#9aa0b4";
  pctx.strokeRect(0.5, 0.5, pad.width - 1, pad.height - 1);
  const [lo, hi] = state.meta.z_range;
  const px = ((state.z[0] - lo) / (hi - lo)) * pad.width;
  const py = (1 - (state.z[1] - lo) / (hi - lo)) * pad.height;
  pctx.beginPath();
  pctx.arc(px, py, 5, 0, 2 * Math.PI);
  pctx.fillStyle = zColor(state.z[0], lo, hi);
  pctx.fill();
}

pad.addEventListener("pointerdown", (ev) => movePad(ev));
pad.addEventListener("pointermove", (ev) => {
  if (ev.buttons & 1) movePad(ev);
});

function movePad(ev: PointerEvent): void {
  if (!state.meta || state.meta.latent_dim !== 2) return;
  const [lo, hi] = state.meta.z_range;
  const rect = pad.getBoundingClientRect();
  const tx = (ev.clientX - rect.left) / rect.width;
  const ty = 1 - (ev.clientY - rect.top) / rect.height;
  setZ([lo + tx * (hi - lo), lo + ty * (hi - lo)]);
}

// ---------------------------------------------------------------------------
// Sweep strip

async function refreshStrip(): Promise<void> {
  if (!state.meta || !state.scene) return;
  try {
    const records = await api.sweep(SWEEP_COUNT);
    state = st.withSweep(state, records);
  } catch (err) {
    if (isAbort(err)) return;
    showError(String(err));
    return;
  }
  const { scene, meta } = state;
  if (!scene || !meta) return;
  const zRange = meta.z_range;
  strip.innerHTML = "";
  for (const record of state.sweepStrip) {
    const thumb = document.createElement("canvas");
    thumb.width = 72;
    thumb.height = 54;
    thumb.className = "thumb";
    thumb.title = `z = ${record.z.map((v) => v.toFixed(2)).join(", ")}`;
    drawThumbnail(thumb, scene, record, zRange);
    thumb.addEventListener("click", () => setZ(record.z, true));
    strip.appendChild(thumb);
  }
}

// ---------------------------------------------------------------------------
// Actions

$("finetune").addEventListener("click", () => {
  if (state.z.length) void fetchRecord(state.z, true);
});

$("accept").addEventListener("click", () => {
  const record = state.current;
  if (!record) return;
  state = st.pinCurrent(state);
  const blob = new Blob([st.exportPayload(record)], { type: "application/json" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = `solution_z${record.z.map((v) => v.toFixed(3)).join("_")}.json`;
  a.click();
  URL.revokeObjectURL(a.href);
  $("pinned-count").textContent = `${state.pinned.length} accepted`;
});

// ---------------------------------------------------------------------------
// Obstacle editing on the canvas

let dragIndex = -1;
let dragMoved = false;

canvas.addEventListener("pointerdown", (ev) => {
  if (!state.scene) return;
  const p = canvasWorldPoint(ev);
  dragIndex = obstacleAt(state.scene, p);
  dragMoved = false;
});

canvas.addEventListener("pointermove", (ev) => {
  if (dragIndex < 0 || !(ev.buttons & 1) || !state.scene) return;
  dragMoved = true;
  // live preview only; the move op is sent on release
  state.scene.obstacles[dragIndex].c = canvasWorldPoint(ev);
  render();
});

canvas.addEventListener("pointerup", (ev) => {
  if (!state.scene) return;
  const p = canvasWorldPoint(ev);
  if (dragIndex >= 0 && dragMoved) {
    void applySceneOp({ op: "move", index: dragIndex, c: p });
  } else if (dragIndex < 0) {
    void applySceneOp({ op: "add", c: p, r: NEW_OBSTACLE_RADIUS });
  }
  dragIndex = -1;
});

canvas.addEventListener("dblclick", (ev) => {
  if (!state.scene) return;
  const idx = obstacleAt(state.scene, canvasWorldPoint(ev));
  if (idx >= 0) void applySceneOp({ op: "remove", index: idx });
});

function canvasWorldPoint(ev: MouseEvent): [number, number] {
  const rect = canvas.getBoundingClientRect();
  const tf = sceneTransform(state.scene!, canvas);
  return screenToWorld(tf, [
    ((ev.clientX - rect.left) / rect.width) * canvas.width,
    ((ev.clientY - rect.top) / rect.height) * canvas.height,
  ]);
}

async function applySceneOp(op: Parameters<typeof api.editScene>[0]): Promise<void> {
  try {
    const result = await api.editScene(op);
    state = st.withScene(state, result.scene, result.scene_version);
    const classes = Object.entries(result.revalidation.per_class)
      .map(([label, n]) => `${label || "?"}: ${n}`)
      .join(", ");
    survivorsBox.textContent =
      `${result.revalidation.surviving}/${result.revalidation.cached} cached solutions ` +
      `still collision-free${classes ? ` (${classes})` : ""}`;
    await Promise.all([fetchRecord(state.z, false), refreshStrip()]);
    render();
  } catch (err) {
    if (!isAbort(err)) showError(String(err));
  }
}

// ---------------------------------------------------------------------------
// Boot

async function boot(): Promise<void> {
  try {
    const meta = await api.meta();
    state = st.withMeta(state, meta);
    buildSliders();
    render();
    await Promise.all([fetchRecord(state.z, false), refreshStrip()]);
    render();
  } catch (err) {
    showError(`cannot reach the solution service: ${String(err)}`);
    setTimeout(boot, 1500);
  }
}

void boot();

export { state, normalized };
