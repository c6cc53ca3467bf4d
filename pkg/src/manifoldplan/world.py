"""Planar n-link arm, circular obstacles, and trajectory cost terms.

The arm is a revolute chain in the plane; its body is approximated by
points sampled densely along every link.  Obstacle proximity is scored with
the standard hinge-quadratic local cost driven by the signed distance to
the nearest circle, weighted by task-space speed, plus a squared-
acceleration smoothness penalty.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

# Signed distance reported when the scene has no obstacles; large but finite
# so downstream arithmetic stays well-behaved.
EMPTY_SCENE_DISTANCE = 1e6

__all__ = [
    "ArmModel",
    "Scene",
    "Trajectory",
    "CostConfig",
    "CostBreakdown",
    "EMPTY_SCENE_DISTANCE",
    "forward_kinematics",
    "fk_body_points",
    "signed_distance",
    "signed_distance_points",
    "local_collision_cost",
    "obstacle_cost",
    "smoothness_cost",
    "trajectory_score",
    "is_collision_free",
    "batch_obstacle_cost",
    "batch_smoothness_cost",
    "batch_total_cost",
    "load_arm",
    "load_scene",
    "scene_to_dict",
    "arm_to_dict",
]


@dataclass(frozen=True)
class ArmModel:
    """Planar revolute chain with body points every ``body_point_spacing``."""

    link_lengths: tuple[float, ...]
    body_point_spacing: float
    base_position: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if len(self.link_lengths) < 2:
            raise ValueError("arm needs at least 2 links")
        if any(l <= 0 for l in self.link_lengths):
            raise ValueError("link lengths must be positive")
        if not 0 < self.body_point_spacing <= min(self.link_lengths):
            raise ValueError("body_point_spacing must be in (0, min link length]")
        object.__setattr__(self, "link_lengths", tuple(float(l) for l in self.link_lengths))
        object.__setattr__(self, "base_position", tuple(float(c) for c in self.base_position))

    @property
    def dof(self) -> int:
        return len(self.link_lengths)


@dataclass(frozen=True)
class Scene:
    """Circular obstacles plus an axis-aligned workspace rectangle."""

    obstacles: tuple[tuple[tuple[float, float], float], ...] = ()
    workspace_bounds: tuple[tuple[float, float], tuple[float, float]] = ((-1.5, -1.5), (1.5, 1.5))

    def __post_init__(self):
        obs = tuple(((float(c[0]), float(c[1])), float(r)) for c, r in self.obstacles)
        if any(r <= 0 for _, r in obs):
            raise ValueError("obstacle radii must be positive")
        object.__setattr__(self, "obstacles", obs)
        (x0, y0), (x1, y1) = self.workspace_bounds
        object.__setattr__(self, "workspace_bounds", ((float(x0), float(y0)), (float(x1), float(y1))))

    def centers_radii(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.obstacles:
            return np.zeros((0, 2)), np.zeros(0)
        centers = np.array([c for c, _ in self.obstacles], dtype=float)
        radii = np.array([r for _, r in self.obstacles], dtype=float)
        return centers, radii


@dataclass(frozen=True)
class Trajectory:
    """T x D matrix of joint angles sampled at a uniform time step."""

    configurations: np.ndarray
    dt: float

    def __post_init__(self):
        q = np.asarray(self.configurations, dtype=float)
        if q.ndim != 2 or q.shape[0] < 3:
            raise ValueError("trajectory needs a (T, D) array with T >= 3")
        if not np.all(np.isfinite(q)):
            raise ValueError("trajectory entries must be finite")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        object.__setattr__(self, "configurations", q)

    @property
    def T(self) -> int:
        return self.configurations.shape[0]

    @property
    def D(self) -> int:
        return self.configurations.shape[1]


@dataclass(frozen=True)
class CostConfig:
    margin: float = 0.1
    alpha_smooth: float = 0.05


@dataclass(frozen=True)
class CostBreakdown:
    obstacle: float
    smoothness: float
    alpha_smooth: float
    total: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total", self.obstacle + self.alpha_smooth * self.smoothness)


def _point_layout(arm: ArmModel) -> tuple[np.ndarray, np.ndarray]:
    """Per body point (excluding the base): owning link index and arc fraction."""
    link_idx: list[int] = []
    fracs: list[float] = []
    s = arm.body_point_spacing
    for i, length in enumerate(arm.link_lengths):
        n = int(math.floor(length / s + 1e-9))
        offsets = [k * s for k in range(1, n + 1)]
        if not offsets or offsets[-1] < length - 1e-12:
            offsets.append(length)
        offsets[-1] = min(offsets[-1], length)
        link_idx.extend([i] * len(offsets))
        fracs.extend(o / length for o in offsets)
    return np.asarray(link_idx), np.asarray(fracs)


def fk_body_points(arm: ArmModel, configs: np.ndarray) -> np.ndarray:
    """Body-point positions for a batch of configurations.

    Parameters
    ----------
    configs : array of shape (..., D)
        Joint angles (radians), relative to the previous link.

    Returns
    -------
    array of shape (..., U, 2) with points ordered base -> tip; the base
    point is always first.
    """
    q = np.asarray(configs, dtype=float)
    if q.shape[-1] != arm.dof:
        raise ValueError(f"configuration has {q.shape[-1]} entries, arm has {arm.dof} links")
    lengths = np.asarray(arm.link_lengths)
    phi = np.cumsum(q, axis=-1)
    e = np.stack([np.cos(phi), np.sin(phi)], axis=-1)  # (..., D, 2)
    seg = lengths[..., :, None] * e
    joints = np.concatenate(
        [np.zeros(q.shape[:-1] + (1, 2)), np.cumsum(seg, axis=-2)], axis=-2
    )  # (..., D+1, 2), relative to base
    link_idx, fracs = _point_layout(arm)
    pts = joints[..., link_idx, :] + (fracs * lengths[link_idx])[:, None] * e[..., link_idx, :]
    base = np.zeros(q.shape[:-1] + (1, 2))
    pts = np.concatenate([base, pts], axis=-2)
    return pts + np.asarray(arm.base_position)


def forward_kinematics(arm: ArmModel, q) -> np.ndarray:
    """Body-point positions (U, 2) for one configuration, base -> tip."""
    q = np.asarray(q, dtype=float)
    if q.ndim != 1:
        raise ValueError("expected a 1-D configuration")
    return fk_body_points(arm, q)


def tip_path(arm: ArmModel, configs: np.ndarray) -> np.ndarray:
    """End-effector positions (..., 2) for a batch of configurations."""
    return fk_body_points(arm, configs)[..., -1, :]


def signed_distance(p, scene: Scene) -> float:
    """Distance from a point to the nearest obstacle boundary (negative inside)."""
    return float(signed_distance_points(np.asarray(p, dtype=float), scene))


def signed_distance_points(points: np.ndarray, scene: Scene) -> np.ndarray:
    """Vectorized signed distance for an (..., 2) array of points."""
    pts = np.asarray(points, dtype=float)
    centers, radii = scene.centers_radii()
    if centers.shape[0] == 0:
        return np.full(pts.shape[:-1], EMPTY_SCENE_DISTANCE)
    diff = pts[..., None, :] - centers  # (..., O, 2)
    dist = np.sqrt(np.sum(diff * diff, axis=-1)) - radii
    return np.min(dist, axis=-1)


def local_collision_cost(d, margin: float):
    """Hinge-quadratic penalty of the signed distance ``d``.

    Zero beyond the margin, quadratic inside it, linear past contact; the
    three pieces join continuously.  Works elementwise on arrays.
    """
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    d = np.asarray(d, dtype=float)
    quad = np.zeros_like(d)
    if margin > 0:
        quad = (d - margin) ** 2 / (2.0 * margin)
    out = np.where(d > margin, 0.0, np.where(d > 0, quad, -d + margin / 2.0))
    if out.ndim == 0:
        return float(out)
    return out


def _batch_obstacle_cost(configs: np.ndarray, arm: ArmModel, scene: Scene, margin: float, dt: float) -> np.ndarray:
    pts = fk_body_points(arm, configs)  # (..., T, U, 2)
    c = local_collision_cost(signed_distance_points(pts, scene), margin)  # (..., T, U)
    delta = pts[..., 1:, :, :] - pts[..., :-1, :, :]
    speed = np.sqrt(np.sum(delta * delta, axis=-1)) / dt  # (..., T-1, U)
    per_segment = 0.5 * (c[..., 1:, :] + c[..., :-1, :]) * speed
    return np.sum(per_segment, axis=(-2, -1))


def obstacle_cost(traj: Trajectory, arm: ArmModel, scene: Scene, margin: float = 0.1) -> float:
    """Collision proximity cost: local cost times task-space speed, summed
    per segment with endpoint costs averaged (so the sum is symmetric under
    time reversal)."""
    return float(_batch_obstacle_cost(traj.configurations, arm, scene, margin, traj.dt))


def _batch_smoothness_cost(configs: np.ndarray, dt: float) -> np.ndarray:
    acc = (configs[..., 2:, :] - 2.0 * configs[..., 1:-1, :] + configs[..., :-2, :]) / dt**2
    return np.sum(acc * acc, axis=(-2, -1))


def smoothness_cost(traj: Trajectory) -> float:
    """Sum of squared joint accelerations over interior time steps."""
    if traj.T < 3:
        raise ValueError("smoothness cost needs T >= 3")
    return float(_batch_smoothness_cost(traj.configurations, traj.dt))


def batch_obstacle_cost(configs: np.ndarray, arm: ArmModel, scene: Scene, margin: float, dt: float) -> np.ndarray:
    """Obstacle cost for a (K, T, D) batch of configuration matrices."""
    return _batch_obstacle_cost(configs, arm, scene, margin, dt)


def batch_smoothness_cost(configs: np.ndarray, dt: float) -> np.ndarray:
    """Smoothness cost for a (K, T, D) batch."""
    return _batch_smoothness_cost(configs, dt)


def batch_total_cost(configs: np.ndarray, arm: ArmModel, scene: Scene, cost_cfg: CostConfig, dt: float) -> np.ndarray:
    """Total cost (obstacle + weighted smoothness) for a (K, T, D) batch."""
    return _batch_obstacle_cost(configs, arm, scene, cost_cfg.margin, dt) + \
        cost_cfg.alpha_smooth * _batch_smoothness_cost(configs, dt)


def trajectory_score(traj: Trajectory, arm: ArmModel, scene: Scene, cost_cfg: CostConfig) -> tuple[float, CostBreakdown]:
    """Score a trajectory as the negated total cost; higher is better."""
    obs = obstacle_cost(traj, arm, scene, cost_cfg.margin)
    smooth = smoothness_cost(traj)
    breakdown = CostBreakdown(obstacle=obs, smoothness=smooth, alpha_smooth=cost_cfg.alpha_smooth)
    return -breakdown.total, breakdown


def is_collision_free(traj: Trajectory, arm: ArmModel, scene: Scene) -> bool:
    """True iff every body point keeps strictly positive clearance at every step."""
    pts = fk_body_points(arm, traj.configurations)
    return bool(np.min(signed_distance_points(pts, scene)) > 0.0)


def min_clearance(traj: Trajectory, arm: ArmModel, scene: Scene) -> float:
    """Smallest signed distance over all body points and time steps."""
    pts = fk_body_points(arm, traj.configurations)
    return float(np.min(signed_distance_points(pts, scene)))


# ---------------------------------------------------------------------------
# JSON documents.  An arm file holds {links, body_point_spacing, base}; a
# scene file holds {obstacles: [{c, r}], bounds}.  A combined document with
# all keys is accepted by both loaders.

def load_arm(source) -> ArmModel:
    doc = _load_doc(source)
    try:
        return ArmModel(
            link_lengths=tuple(doc["links"]),
            body_point_spacing=doc["body_point_spacing"],
            base_position=tuple(doc.get("base", (0.0, 0.0))),
        )
    except KeyError as exc:
        raise ValueError(f"arm document missing key {exc}") from exc


def load_scene(source) -> Scene:
    doc = _load_doc(source)
    try:
        obstacles = tuple((tuple(o["c"]), o["r"]) for o in doc.get("obstacles", ()))
        bounds = doc.get("bounds", ((-1.5, -1.5), (1.5, 1.5)))
        return Scene(obstacles=obstacles, workspace_bounds=(tuple(bounds[0]), tuple(bounds[1])))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed scene document: {exc}") from exc


def _load_doc(source) -> dict:
    if isinstance(source, dict):
        return source
    with open(source, "r", encoding="utf-8") as fh:
        return json.load(fh)


def arm_to_dict(arm: ArmModel) -> dict:
    return {
        "links": list(arm.link_lengths),
        "body_point_spacing": arm.body_point_spacing,
        "base": list(arm.base_position),
    }


def scene_to_dict(scene: Scene) -> dict:
    return {
        "obstacles": [{"c": list(c), "r": r} for c, r in scene.obstacles],
        "bounds": [list(scene.workspace_bounds[0]), list(scene.workspace_bounds[1])],
    }
