"""HTTP service for exploring a trained model's latent space.

A session holds one immutable trained model plus a mutable scene.  Readers
(generate, sweep, meta) work from an atomically-replaced scene snapshot;
scene edits take an exclusive lock, bump the scene version, and revalidate
the solution cache in place.  The service also serves the static explorer
bundle when a directory is provided.
"""

from __future__ import annotations

import json
import mimetypes
import threading
import time
from dataclasses import dataclass, field, replace
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

import numpy as np

from . import generative as gen
from . import pipeline as pl
from . import refine as rf
from . import world as wd

Z_CLAMP = 4.0
Z_QUANTUM = 1e-3
SWEEP_RANGE = {"rtp": (-1.28, 1.28), "testfunc": (-1.64, 1.64), "generic": (-1.64, 1.64)}

__all__ = ["SessionState", "make_server", "api_schema_path"]


def api_schema_path() -> Path:
    return Path(__file__).parent / "schemas" / "api.schema.json"


@dataclass
class SessionState:
    model: gen.VaeModel | None = None
    arm: wd.ArmModel | None = None
    scene: wd.Scene = field(default_factory=wd.Scene)
    cost: wd.CostConfig = field(default_factory=lambda: wd.CostConfig(margin=0.1, alpha_smooth=1e-4))
    chomp: rf.ChompConfig = field(default_factory=rf.ChompConfig)
    finetune_budget_s: float = 2.0
    scene_version: int = 0
    edit_lock: threading.Lock = field(default_factory=threading.Lock)
    cache_lock: threading.Lock = field(default_factory=threading.Lock)
    cache: dict = field(default_factory=dict)
    sweep_cache: dict = field(default_factory=dict)

    @property
    def ready(self) -> bool:
        return self.model is not None

    def z_range(self) -> tuple[float, float]:
        tag = self.model.problem_tag if self.model else "generic"
        return SWEEP_RANGE.get(tag, SWEEP_RANGE["generic"])

    # -- record construction ------------------------------------------------

    def quantize(self, z: np.ndarray) -> tuple:
        return tuple(round(float(v) / Z_QUANTUM) for v in z)

    def build_record(self, z: np.ndarray, finetune: bool) -> dict:
        key = (self.quantize(z), finetune)
        with self.cache_lock:
            hit = self.cache.get(key)
        if hit is not None:
            return hit
        record = self._compute_record(z, finetune)
        with self.cache_lock:
            self.cache[key] = record
        return record

    def _compute_record(self, z: np.ndarray, finetune: bool) -> dict:
        model = self.model
        scene = self.scene
        if model.problem_tag == "rtp":
            rec = pl._planar_record(
                z, model, self.arm, scene, self.cost,
                self.chomp if finetune else None,
                finetune=finetune,
                time_budget=self.finetune_budget_s if finetune else None,
            )
            doc = rec.to_dict()
            traj = np.asarray(rec.best_trajectory())
            doc["tip_path"] = wd.fk_body_points(self.arm, traj)[:, -1, :].tolist()
        else:
            x = gen.generate(model, z)
            doc = pl.SolutionRecord(z=np.asarray(z, float).tolist(), x_raw=x.tolist(),
                                    score_raw=0.0).to_dict()
            doc["tip_path"] = None
        doc["scene_version"] = self.scene_version
        return doc

    def _revalidate_record(self, doc: dict) -> dict:
        """Recompute scene-dependent fields of a cached record in place."""
        if self.model.problem_tag != "rtp" or doc.get("trajectory_raw") is None:
            return {**doc, "scene_version": self.scene_version}
        doc = dict(doc)
        scene = self.scene
        for stage in ("raw", "refined"):
            traj_list = doc.get(f"trajectory_{stage}")
            if traj_list is None:
                continue
            traj = wd.Trajectory(configurations=np.asarray(traj_list), dt=self.model.rtp_meta.dt)
            score, brk = wd.trajectory_score(traj, self.arm, scene, self.cost)
            tips = wd.fk_body_points(self.arm, traj.configurations)[:, -1, :]
            doc[f"score_{stage}"] = score
            doc[f"collision_free_{stage}"] = wd.is_collision_free(traj, self.arm, scene)
            doc[f"homotopy_{stage}"] = pl.homotopy_class(tips, scene)
            doc[f"breakdown_{stage}"] = {"obstacle": brk.obstacle, "smoothness": brk.smoothness,
                                         "total": brk.total}
        if doc.get("trajectory_refined") is None:
            doc["score_refined"] = doc["score_raw"]
            doc["collision_free_refined"] = doc["collision_free_raw"]
            doc["homotopy_refined"] = doc["homotopy_raw"]
        doc["scene_version"] = self.scene_version
        return doc

    # -- scene edits ---------------------------------------------------------

    def edit_scene(self, op: dict) -> dict:
        with self.edit_lock:
            obstacles = list(self.scene.obstacles)
            kind = op.get("op")
            if kind == "add":
                obstacles.append((tuple(op["c"]), float(op["r"])))
            elif kind == "remove":
                obstacles.pop(int(op["index"]))
            elif kind == "move":
                idx = int(op["index"])
                obstacles[idx] = (tuple(op["c"]), obstacles[idx][1])
            else:
                raise ValueError(f"unknown scene op {kind!r}")
            new_scene = wd.Scene(obstacles=tuple(obstacles),
                                 workspace_bounds=self.scene.workspace_bounds)
            self.scene = new_scene
            self.scene_version += 1
            summary = self._revalidate_cache()
        return {
            "scene": wd.scene_to_dict(new_scene),
            "scene_version": self.scene_version,
            "revalidation": summary,
        }

    def _revalidate_cache(self) -> dict:
        per_class: dict[str, int] = {}
        surviving = 0
        with self.cache_lock:
            # Fine-tuned entries were projected against the old obstacles;
            # they are stale rather than revalidatable.
            self.cache = {k: v for k, v in self.cache.items() if not k[1]}
            for key, doc in list(self.cache.items()):
                new_doc = self._revalidate_record(doc)
                self.cache[key] = new_doc
                flag = new_doc.get("collision_free_refined")
                if flag:
                    surviving += 1
                    label = new_doc.get("homotopy_refined") or ""
                    per_class[label] = per_class.get(label, 0) + 1
            self.sweep_cache.clear()
        return {"cached": len(self.cache), "surviving": surviving, "per_class": per_class}

    def sweep(self, count: int) -> list[dict]:
        key = (count, self.scene_version)
        with self.cache_lock:
            hit = self.sweep_cache.get(key)
        if hit is not None:
            return hit
        lo, hi = self.z_range()
        zs = pl.sweep_values(pl.SweepConfig(z_min=lo, z_max=hi, count=count),
                             self.model.latent_dim)
        records = [self.build_record(z, finetune=False) for z in zs]
        with self.cache_lock:
            self.sweep_cache[key] = records
        return records


class _Handler(BaseHTTPRequestHandler):
    state: SessionState = None
    static_dir: Path | None = None
    protocol_version = "HTTP/1.1"

    # -- plumbing -------------------------------------------------------------

    def log_message(self, fmt, *args):  # keep test output quiet
        pass

    def _cors(self):
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")

    def _send_json(self, code: int, obj) -> None:
        body = json.dumps(obj).encode()
        self.send_response(code)
        self._cors()
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _error(self, code: int, message: str) -> None:
        self._send_json(code, {"error": message})

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length) if length else b"{}"
        return json.loads(raw.decode() or "{}")

    # -- verbs ----------------------------------------------------------------

    def do_OPTIONS(self):
        self.send_response(204)
        self._cors()
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        url = urlparse(self.path)
        if url.path == "/api/meta":
            return self._meta()
        if url.path == "/api/sweep":
            return self._sweep(url)
        if url.path.startswith("/api/"):
            return self._error(404, f"no such endpoint {url.path}")
        return self._static(url.path)

    def do_POST(self):
        url = urlparse(self.path)
        try:
            body = self._read_body()
        except (ValueError, json.JSONDecodeError):
            return self._error(400, "request body is not valid JSON")
        if url.path == "/api/generate":
            return self._generate(body)
        if url.path == "/api/scene/obstacles":
            return self._scene_edit(body)
        return self._error(404, f"no such endpoint {url.path}")

    # -- endpoints --------------------------------------------------------------

    def _meta(self):
        st = self.state
        if not st.ready:
            return self._error(503, "model not loaded yet")
        lo, hi = st.z_range()
        meta = st.model.rtp_meta
        doc = {
            "problem_tag": st.model.problem_tag,
            "latent_dim": st.model.latent_dim,
            "input_dim": st.model.input_dim,
            "z_range": [lo, hi],
            "T": meta.T if meta else None,
            "D": meta.D if meta else None,
            "dt": meta.dt if meta else None,
            "arm": wd.arm_to_dict(st.arm) if st.arm else None,
            "q_start": meta.q_start.tolist() if meta else None,
            "q_goal": meta.q_goal.tolist() if meta else None,
            "scene": wd.scene_to_dict(st.scene),
            "scene_version": st.scene_version,
        }
        return self._send_json(200, doc)

    def _generate(self, body: dict):
        st = self.state
        if not st.ready:
            return self._error(503, "model not loaded yet")
        if st.edit_lock.locked():
            return self._error(409, "scene edit in progress")
        z = body.get("z")
        if not isinstance(z, (list, tuple)) or len(z) != st.model.latent_dim:
            return self._error(400, f"z must be a list of {st.model.latent_dim} numbers")
        try:
            z = np.asarray(z, dtype=float)
        except (TypeError, ValueError):
            return self._error(400, "z must be numeric")
        if not np.all(np.isfinite(z)):
            return self._error(400, "z must be finite")
        z = np.clip(z, -Z_CLAMP, Z_CLAMP)
        record = st.build_record(z, finetune=bool(body.get("finetune", False)))
        return self._send_json(200, record)

    def _scene_edit(self, body: dict):
        st = self.state
        if not st.ready:
            return self._error(503, "model not loaded yet")
        try:
            result = st.edit_scene(body)
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            return self._error(400, f"invalid scene edit: {exc}")
        return self._send_json(200, result)

    def _sweep(self, url):
        st = self.state
        if not st.ready:
            return self._error(503, "model not loaded yet")
        query = parse_qs(url.query)
        try:
            count = int(query.get("count", ["16"])[0])
        except ValueError:
            return self._error(400, "count must be an integer")
        if not 2 <= count <= 64:
            return self._error(400, "count must be between 2 and 64")
        return self._send_json(200, st.sweep(count))

    def _static(self, path: str):
        if self.static_dir is None:
            return self._error(404, "no static bundle configured")
        root = self.static_dir.resolve()
        rel = path.lstrip("/") or "index.html"
        target = (root / rel).resolve()
        if not target.is_relative_to(root) or not target.is_file():
            return self._error(404, f"not found: {path}")
        body = target.read_bytes()
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self.send_response(200)
        self._cors()
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def make_server(state: SessionState, port: int = 8080, static_dir=None) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {
        "state": state,
        "static_dir": Path(static_dir) if static_dir else None,
    })
    return ThreadingHTTPServer(("127.0.0.1", port), handler)
