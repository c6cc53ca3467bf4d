/**
 * Live end-to-end checks against a running solution service.  Skipped
 * unless MANIFOLD_SERVER points at one, e.g.
 *
 *   python tools/make_fixture.py --out /tmp/fixture
 *   manifoldplan serve --model /tmp/fixture/model.json --scene two_pillars \
 *       --arm arm3 --port 8765 --static frontend/dist &
 *   MANIFOLD_SERVER=http://127.0.0.1:8765 npm test
 */

import { describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import type { Meta, SolutionRecord } from "../src/types.js";

const base = process.env.MANIFOLD_SERVER ?? "";

describe.skipIf(!base)("live explorer end-to-end", () => {
  const api = new ApiClient(base);

  it("slider traversal of the full range covers several homotopy classes", async () => {
    const meta: Meta = await api.meta();
    expect(meta.latent_dim).toBe(1);
    const [lo, hi] = meta.z_range;
    const labels = new Set<string>();
    for (let i = 0; i < 30; i++) {
      const z = lo + (i / 29) * (hi - lo);
      const rec = await api.generate([z], false);
      const label = rec.homotopy_refined ?? rec.homotopy_raw;
      if (label) labels.add(label);
    }
    expect(labels.size).toBeGreaterThanOrEqual(2);
  }, 60000);

  it("generate round trip stays under the latency budget", async () => {
    await api.generate([0.111], false); // warm up
    const samples: number[] = [];
    for (let i = 0; i < 5; i++) {
      const t0 = performance.now();
      await api.generate([0.3 + i * 0.017], false);
      samples.push(performance.now() - t0);
    }
    expect(Math.min(...samples)).toBeLessThan(100);
  }, 30000);

  it("an obstacle dropped on the current path flips the collision badge", async () => {
    const before: SolutionRecord = await api.generate([0.5], false);
    expect(before.tip_path).not.toBeNull();
    const mid = before.tip_path![Math.floor(before.tip_path!.length / 2)];
    const edit = await api.editScene({ op: "add", c: [mid[0], mid[1]], r: 0.05 });
    try {
      const after = await api.generate([0.5], false);
      expect(before.collision_free_raw).toBe(true);
      expect(after.collision_free_raw).toBe(false);
    } finally {
      await api.editScene({ op: "remove", index: edit.scene.obstacles.length - 1 });
    }
  }, 30000);

  it("accepted exports carry every schema-required field", async () => {
    const rec = await api.generate([-0.4], false);
    for (const key of ["z", "x_raw", "score_raw", "tip_path", "scene_version"]) {
      expect(rec).toHaveProperty(key);
    }
  }, 30000);
});
