"""End-to-end runs: sample, score, train, sweep, refine, and persist.

Two drivers live here.  The synthetic-function driver draws uniform points,
trains the weighted autoencoder on them, sweeps the latent range, and
polishes each sweep point with the trust-region cross-entropy method.  The
planar-arm driver samples smooth trajectory proposals, converts them to
residual-basis weights, trains on those, and projects colliding sweep
outputs onto the free space with the trust-region trajectory update.

Everything a run writes is reproducible from (config, seed): outputs carry
no timestamps, and wall-clock measurements go to a separate timings file.
"""

from __future__ import annotations

import csv
import json
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import generative as gen
from . import refine as rf
from . import testfuncs as tf
from . import trajectory as tr
from . import world as wd

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "SolutionRecord",
    "RunResult",
    "load_config",
    "builtin_path",
    "run_lsmo_testfunc",
    "run_mpsm",
    "sweep_values",
    "homotopy_class",
    "adaptation_check",
    "emit_tables",
    "condition_number_table",
]

_SCENE_DIR = Path(__file__).parent / "scenes"


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


def subseed(seed: int, tag: str) -> int:
    """Stable derivation of named sub-stream seeds from the master seed."""
    return int(np.random.SeedSequence([seed, zlib.crc32(tag.encode())]).generate_state(1)[0])


def builtin_path(name: str) -> Path:
    """Resolve a packaged scene/arm name like ``two_pillars`` to its file."""
    p = _SCENE_DIR / f"{name}.json"
    if not p.exists():
        raise ConfigError(f"no builtin document named {name!r}")
    return p


def _resolve_doc(ref: str) -> Path:
    path = Path(ref)
    if path.exists():
        return path
    candidate = _SCENE_DIR / f"{ref}.json"
    if candidate.exists():
        return candidate
    raise ConfigError(f"referenced file {ref!r} does not exist")


@dataclass(frozen=True)
class TestfuncProblem:
    function: tf.TestFunctionId
    bounds: tuple[tuple[float, float], tuple[float, float]] = ((0.0, 0.0), (2.0, 2.0))


@dataclass(frozen=True)
class PlanarProblem:
    scene_path: Path
    arm_path: Path
    q_start: tuple[float, ...]
    q_goal: tuple[float, ...]
    T: int = 50


@dataclass(frozen=True)
class SweepConfig:
    z_min: float
    z_max: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ConfigError("sweep count must be >= 2")


@dataclass(frozen=True)
class ExperimentConfig:
    problem: TestfuncProblem | PlanarProblem
    seed: int
    samples: int
    shaping: gen.ShapingConfig
    train: gen.TrainConfig
    arch: gen.Architecture
    sweep: SweepConfig
    cem: rf.CemConfig | None = None
    gmm: rf.CemConfig | None = None
    chomp: rf.ChompConfig | None = None
    cost: wd.CostConfig = field(default_factory=wd.CostConfig)
    proposal_scale_a: float = 0.3
    rtp_basis: tr.BasisConfig = field(default_factory=tr.BasisConfig)
    finetune: bool = True


def load_config(path, seed_override: int | None = None) -> ExperimentConfig:
    """Parse and validate an experiment configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    try:
        return config_from_dict(doc, seed_override=seed_override)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc


def config_from_dict(doc: dict, seed_override: int | None = None) -> ExperimentConfig:
    prob = doc["problem"]
    kind = prob.get("kind")
    if kind == "testfunc":
        fid = tf.TestFunctionId(prob["function"])
        bounds = prob.get("bounds", ((0.0, 0.0), (2.0, 2.0)))
        problem = TestfuncProblem(function=fid, bounds=(tuple(bounds[0]), tuple(bounds[1])))
    elif kind == "planar":
        problem = PlanarProblem(
            scene_path=_resolve_doc(prob["scene"]),
            arm_path=_resolve_doc(prob["arm"]),
            q_start=tuple(prob["q_start"]),
            q_goal=tuple(prob["q_goal"]),
            T=int(prob.get("T", 50)),
        )
    else:
        raise ConfigError(f"unknown problem kind {kind!r}")

    seed = int(doc.get("seed", 0)) if seed_override is None else seed_override
    train_doc = dict(doc.get("train", {}))
    train = gen.TrainConfig(seed=subseed(seed, "train"), **train_doc)
    arch_doc = doc.get("arch", {})
    arch = gen.Architecture(
        encoder_hidden=tuple(arch_doc.get("encoder_hidden", (64, 64))),
        decoder_hidden=tuple(arch_doc.get("decoder_hidden", (64, 64))),
        latent_dim=int(arch_doc.get("latent_dim", 1)),
    )
    sweep_doc = doc["sweep"]
    sweep = SweepConfig(z_min=float(sweep_doc["z_min"]), z_max=float(sweep_doc["z_max"]),
                        count=int(sweep_doc["count"]))
    refine_doc = doc.get("refine", {})
    cem = rf.CemConfig(**refine_doc["cem"]) if "cem" in refine_doc else None
    chomp = rf.ChompConfig(**refine_doc["chomp"]) if "chomp" in refine_doc else None
    gmm = rf.CemConfig(**doc["gmm"]) if "gmm" in doc else None
    cost_doc = doc.get("cost", {})
    basis_doc = doc.get("rtp_basis", {})
    return ExperimentConfig(
        problem=problem,
        seed=seed,
        samples=int(doc.get("samples", 20000)),
        shaping=gen.ShapingConfig(alpha=float(doc.get("shaping", {}).get("alpha", 10.0))),
        train=train,
        arch=arch,
        sweep=sweep,
        cem=cem,
        gmm=gmm,
        chomp=chomp,
        cost=wd.CostConfig(**cost_doc),
        proposal_scale_a=float(doc.get("proposal", {}).get("scale_a", 0.3)),
        rtp_basis=tr.BasisConfig(**basis_doc) if basis_doc else tr.BasisConfig(),
        finetune=bool(doc.get("finetune", True)),
    )


# ---------------------------------------------------------------------------
# Records


@dataclass
class SolutionRecord:
    z: list[float]
    x_raw: list[float]
    score_raw: float
    x_refined: list[float] | None = None
    score_refined: float | None = None
    collision_free_raw: bool | None = None
    collision_free_refined: bool | None = None
    homotopy_raw: str | None = None
    homotopy_refined: str | None = None
    finetune_iterations: int = 0
    trajectory_raw: list[list[float]] | None = None
    trajectory_refined: list[list[float]] | None = None
    breakdown_raw: dict | None = None
    breakdown_refined: dict | None = None

    def to_dict(self) -> dict:
        return {
            "z": self.z,
            "x_raw": self.x_raw,
            "score_raw": self.score_raw,
            "x_refined": self.x_refined,
            "score_refined": self.score_refined,
            "collision_free_raw": self.collision_free_raw,
            "collision_free_refined": self.collision_free_refined,
            "homotopy_raw": self.homotopy_raw,
            "homotopy_refined": self.homotopy_refined,
            "finetune_iterations": self.finetune_iterations,
            "trajectory_raw": self.trajectory_raw,
            "trajectory_refined": self.trajectory_refined,
            "breakdown_raw": self.breakdown_raw,
            "breakdown_refined": self.breakdown_refined,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SolutionRecord":
        return cls(
            z=doc["z"],
            x_raw=doc["x_raw"],
            score_raw=doc["score_raw"],
            x_refined=doc.get("x_refined"),
            score_refined=doc.get("score_refined"),
            collision_free_raw=doc.get("collision_free_raw"),
            collision_free_refined=doc.get("collision_free_refined"),
            homotopy_raw=doc.get("homotopy_raw"),
            homotopy_refined=doc.get("homotopy_refined"),
            finetune_iterations=doc.get("finetune_iterations", 0),
            trajectory_raw=doc.get("trajectory_raw"),
            trajectory_refined=doc.get("trajectory_refined"),
            breakdown_raw=doc.get("breakdown_raw"),
            breakdown_refined=doc.get("breakdown_refined"),
        )

    def best_trajectory(self) -> list[list[float]] | None:
        return self.trajectory_refined if self.trajectory_refined is not None else self.trajectory_raw


@dataclass
class RunResult:
    model: gen.VaeModel
    records: list[SolutionRecord]
    extras: dict
    timings: dict


def sweep_values(sweep: SweepConfig, latent_dim: int) -> np.ndarray:
    """Latent grid: linspace per dimension, cartesian-product ordered."""
    axis = np.linspace(sweep.z_min, sweep.z_max, sweep.count)
    if latent_dim == 1:
        return axis[:, None]
    grids = np.meshgrid(*([axis] * latent_dim), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def homotopy_class(tip_path: np.ndarray, scene: wd.Scene) -> str:
    """One character per obstacle: sign of the angle the path sweeps around it.

    Paths passing on opposite sides of an obstacle get opposite labels; the
    label is invariant to how densely the path is sampled.  A path point
    within 1e-9 of a center yields the degenerate label '0'.
    """
    pts = np.asarray(tip_path, dtype=float)
    labels = []
    for center, _ in scene.obstacles:
        v = pts - np.asarray(center)
        norms = np.linalg.norm(v, axis=1)
        if np.any(norms < 1e-9):
            labels.append("0")
            continue
        cross = v[:-1, 0] * v[1:, 1] - v[:-1, 1] * v[1:, 0]
        dot = np.sum(v[:-1] * v[1:], axis=1)
        total = float(np.sum(np.arctan2(cross, dot)))
        labels.append("+" if total > 1e-9 else ("-" if total < -1e-9 else "0"))
    return "".join(labels)


# ---------------------------------------------------------------------------
# Synthetic-function driver


def run_lsmo_testfunc(cfg: ExperimentConfig, out_dir=None, threads: int = 1) -> RunResult:
    if not isinstance(cfg.problem, TestfuncProblem):
        raise ConfigError("run_lsmo_testfunc needs a testfunc problem")
    fid = cfg.problem.function
    lo, hi = (np.asarray(b, dtype=float) for b in cfg.problem.bounds)
    objective = tf.make_objective(fid)

    timings: dict = {}
    t0 = time.perf_counter()
    prop_rng = np.random.default_rng(subseed(cfg.seed, "proposal"))
    X = prop_rng.uniform(lo, hi, size=(cfg.samples, 2))
    R = objective(X)
    weights = gen.shape_weights(R, cfg.shaping)
    batch = gen.SampleBatch(inputs=X, raw_scores=R, weights=weights)
    timings["sampling_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    model = gen.train(batch, cfg.train, cfg.arch, problem_tag="testfunc")
    timings["train_s"] = time.perf_counter() - t0

    zs = sweep_values(cfg.sweep, cfg.arch.latent_dim)
    raw = np.stack([gen.generate(model, z) for z in zs])
    raw_scores = objective(raw)

    cem_seed = subseed(cfg.seed, "cem")

    def refine_one(i: int) -> tuple[np.ndarray, float, float]:
        t = time.perf_counter()
        if cfg.cem is None or not cfg.finetune:
            return raw[i], float(raw_scores[i]), time.perf_counter() - t
        x_ref = rf.cem_trust_region(objective, raw[i], replace(cfg.cem, seed=cem_seed + i))
        s_ref = float(objective(x_ref[None])[0])
        if s_ref < raw_scores[i]:
            x_ref, s_ref = raw[i], float(raw_scores[i])
        return x_ref, s_ref, time.perf_counter() - t

    t0 = time.perf_counter()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            refined = list(pool.map(refine_one, range(len(zs))))
    else:
        refined = [refine_one(i) for i in range(len(zs))]
    timings["finetune_s"] = time.perf_counter() - t0
    timings["finetune_per_solution_s"] = [r[2] for r in refined]

    records = [
        SolutionRecord(
            z=zs[i].tolist(),
            x_raw=raw[i].tolist(),
            score_raw=float(raw_scores[i]),
            x_refined=refined[i][0].tolist(),
            score_refined=refined[i][1],
            finetune_iterations=cfg.cem.iterations if (cfg.cem and cfg.finetune) else 0,
        )
        for i in range(len(zs))
    ]

    extras: dict = {"problem": {"kind": "testfunc", "function": fid.value}}
    if cfg.gmm is not None:
        t0 = time.perf_counter()
        sols = rf.cem_gmm(objective, replace(cfg.gmm, seed=subseed(cfg.seed, "gmm")),
                          bounds=cfg.problem.bounds)
        timings["gmm_s"] = time.perf_counter() - t0
        extras["gmm_solutions"] = [{"x": x.tolist(), "score": s} for x, s in sols]

    result = RunResult(model=model, records=records, extras=extras, timings=timings)
    if out_dir is not None:
        _write_run(result, out_dir)
    return result


# ---------------------------------------------------------------------------
# Planar-arm driver


def _planar_record(
    z: np.ndarray,
    model: gen.VaeModel,
    arm: wd.ArmModel,
    scene: wd.Scene,
    cost_cfg: wd.CostConfig,
    chomp_cfg: rf.ChompConfig | None,
    finetune: bool,
    time_budget: float | None = None,
) -> SolutionRecord:
    """Build one solution record for a latent value; shared with the service."""
    w, traj = gen.decode_trajectory(model, z)
    score, brk = wd.trajectory_score(traj, arm, scene, cost_cfg)
    tips = wd.fk_body_points(arm, traj.configurations)[:, -1, :]
    rec = SolutionRecord(
        z=np.asarray(z, dtype=float).tolist(),
        x_raw=w.reshape(-1).tolist(),
        score_raw=score,
        collision_free_raw=wd.is_collision_free(traj, arm, scene),
        homotopy_raw=homotopy_class(tips, scene),
        trajectory_raw=traj.configurations.tolist(),
        breakdown_raw={"obstacle": brk.obstacle, "smoothness": brk.smoothness, "total": brk.total},
    )
    if finetune and chomp_cfg is not None and not rec.collision_free_raw:
        refined, iters, ok = rf.chomp_finetune(traj, arm, scene, cost_cfg, chomp_cfg,
                                               time_budget=time_budget)
        s_ref, brk_ref = wd.trajectory_score(refined, arm, scene, cost_cfg)
        tips_ref = wd.fk_body_points(arm, refined.configurations)[:, -1, :]
        rec.finetune_iterations = iters
        rec.collision_free_refined = ok
        rec.score_refined = s_ref
        rec.homotopy_refined = homotopy_class(tips_ref, scene)
        rec.trajectory_refined = refined.configurations.tolist()
        rec.breakdown_refined = {"obstacle": brk_ref.obstacle, "smoothness": brk_ref.smoothness,
                                 "total": brk_ref.total}
    else:
        rec.collision_free_refined = rec.collision_free_raw
        rec.score_refined = rec.score_raw
        rec.homotopy_refined = rec.homotopy_raw
    return rec


def run_mpsm(cfg: ExperimentConfig, out_dir=None, threads: int = 1) -> RunResult:
    if not isinstance(cfg.problem, PlanarProblem):
        raise ConfigError("run_mpsm needs a planar problem")
    arm = wd.load_arm(cfg.problem.arm_path)
    scene = wd.load_scene(cfg.problem.scene_path)
    q_start = np.asarray(cfg.problem.q_start, dtype=float)
    q_goal = np.asarray(cfg.problem.q_goal, dtype=float)
    if q_start.shape[0] != arm.dof or q_goal.shape[0] != arm.dof:
        raise ConfigError("start/goal dimension does not match the arm")
    T = cfg.problem.T
    dt = 1.0 / T

    timings: dict = {}
    t0 = time.perf_counter()
    prop = tr.ProposalConfig(scale_a=cfg.proposal_scale_a, num_samples=cfg.samples,
                             seed=subseed(cfg.seed, "proposal"))
    trajs = tr.sample_proposals(q_start, q_goal, T, prop, dt=dt)
    configs = np.stack([t.configurations for t in trajs])
    scores = _chunked_scores(configs, arm, scene, cfg.cost, dt, threads)
    timings["sampling_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    W = tr.fit_batch(configs, q_start, q_goal, cfg.rtp_basis)
    X = W.reshape(cfg.samples, -1)
    weights = gen.shape_weights(scores, cfg.shaping)
    batch = gen.SampleBatch(inputs=X, raw_scores=scores, weights=weights)
    timings["fit_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    meta = gen.RtpMeta(basis=cfg.rtp_basis, scaling=tr.ScalingConfig(),
                       q_start=q_start, q_goal=q_goal, T=T, dt=dt)
    model = gen.train(batch, cfg.train, cfg.arch, problem_tag="rtp", rtp_meta=meta)
    timings["train_s"] = time.perf_counter() - t0
    timings["train_min"] = timings["train_s"] / 60.0

    zs = sweep_values(cfg.sweep, cfg.arch.latent_dim)

    def build(i: int) -> tuple[SolutionRecord, float]:
        t = time.perf_counter()
        rec = _planar_record(zs[i], model, arm, scene, cfg.cost, cfg.chomp, cfg.finetune)
        return rec, time.perf_counter() - t

    t0 = time.perf_counter()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            built = list(pool.map(build, range(len(zs))))
    else:
        built = [build(i) for i in range(len(zs))]
    timings["generation_s"] = time.perf_counter() - t0
    timings["generation_per_solution_s"] = [b[1] for b in built]

    records = [b[0] for b in built]
    extras = {
        "problem": {
            "kind": "planar",
            "scene": str(cfg.problem.scene_path),
            "arm": str(cfg.problem.arm_path),
            "q_start": q_start.tolist(),
            "q_goal": q_goal.tolist(),
            "T": T,
        },
        "best_proposal_score": float(np.max(scores)),
        "median_proposal_score": float(np.median(scores)),
    }
    result = RunResult(model=model, records=records, extras=extras, timings=timings)
    if out_dir is not None:
        _write_run(result, out_dir)
    return result


def _chunked_scores(configs, arm, scene, cost_cfg, dt, threads: int, chunk: int = 256) -> np.ndarray:
    """Score a (K, T, D) batch in chunks, optionally across worker threads."""
    pieces = [configs[i : i + chunk] for i in range(0, configs.shape[0], chunk)]

    def score(piece):
        return -wd.batch_total_cost(piece, arm, scene, cost_cfg, dt)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(score, pieces))
    else:
        out = [score(p) for p in pieces]
    return np.concatenate(out)


# ---------------------------------------------------------------------------
# Scene-change adaptation


def adaptation_check(
    records: list[SolutionRecord],
    new_scene: wd.Scene,
    arm: wd.ArmModel,
    dt: float,
    rescue: rf.ChompConfig | None = None,
    cost_cfg: wd.CostConfig | None = None,
) -> tuple[list[SolutionRecord], dict]:
    """Re-validate stored solutions against a modified scene.

    Returns the surviving records (still collision-free) and a report with
    per-check wall times and per-class survivor counts.  With ``rescue``
    set, failing records are re-fine-tuned from their stored trajectories
    and counted separately when that succeeds.
    """
    survivors: list[SolutionRecord] = []
    rescued: list[SolutionRecord] = []
    check_times: list[float] = []
    per_class: dict[str, int] = {}
    for rec in records:
        traj_list = rec.best_trajectory()
        if traj_list is None:
            continue
        traj = wd.Trajectory(configurations=np.asarray(traj_list), dt=dt)
        t0 = time.perf_counter()
        ok = wd.is_collision_free(traj, arm, new_scene)
        check_times.append(time.perf_counter() - t0)
        if ok:
            survivors.append(rec)
            tips = wd.fk_body_points(arm, traj.configurations)[:, -1, :]
            label = homotopy_class(tips, new_scene)
            per_class[label] = per_class.get(label, 0) + 1
        elif rescue is not None:
            cc = cost_cfg or wd.CostConfig()
            refined, _, ok2 = rf.chomp_finetune(traj, arm, new_scene, cc, rescue)
            if ok2:
                new_rec = SolutionRecord(**{**rec.__dict__})
                new_rec.trajectory_refined = refined.configurations.tolist()
                new_rec.collision_free_refined = True
                rescued.append(new_rec)
    report = {
        "checked": len(check_times),
        "survivors": len(survivors),
        "rescued": len(rescued),
        "per_class": per_class,
        "check_times_s": check_times,
        "max_check_time_s": max(check_times) if check_times else 0.0,
    }
    return survivors + rescued, report


# ---------------------------------------------------------------------------
# Output files


def _json_dump(obj, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _write_run(result: RunResult, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    gen.save_model(result.model, out / "model.json")
    doc = {
        "records": [r.to_dict() for r in result.records],
        **result.extras,
    }
    _json_dump(doc, out / "solutions.json")
    _json_dump(result.timings, out / "timings.json")


def load_solutions(path) -> tuple[list[SolutionRecord], dict]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    records = [SolutionRecord.from_dict(d) for d in doc["records"]]
    extras = {k: v for k, v in doc.items() if k != "records"}
    return records, extras


def replace_sweep_count(cfg: ExperimentConfig, count: int) -> ExperimentConfig:
    return replace(cfg, sweep=replace(cfg.sweep, count=count))


def resweep(
    cfg: ExperimentConfig,
    model: gen.VaeModel,
    threads: int = 1,
    finetune: bool | None = None,
) -> list[SolutionRecord]:
    """Sweep the latent range of an already-trained model."""
    do_finetune = cfg.finetune if finetune is None else finetune
    zs = sweep_values(cfg.sweep, model.latent_dim)
    if isinstance(cfg.problem, TestfuncProblem):
        objective = tf.make_objective(cfg.problem.function)
        cem_seed = subseed(cfg.seed, "cem")

        def build(i: int) -> SolutionRecord:
            x_raw = gen.generate(model, zs[i])
            s_raw = float(objective(x_raw[None])[0])
            rec = SolutionRecord(z=zs[i].tolist(), x_raw=x_raw.tolist(), score_raw=s_raw)
            if do_finetune and cfg.cem is not None:
                x_ref = rf.cem_trust_region(objective, x_raw, replace(cfg.cem, seed=cem_seed + i))
                s_ref = float(objective(x_ref[None])[0])
                if s_ref < s_raw:
                    x_ref, s_ref = x_raw, s_raw
                rec.x_refined = x_ref.tolist()
                rec.score_refined = s_ref
                rec.finetune_iterations = cfg.cem.iterations
            return rec

    else:
        arm = wd.load_arm(cfg.problem.arm_path)
        scene = wd.load_scene(cfg.problem.scene_path)

        def build(i: int) -> SolutionRecord:
            return _planar_record(zs[i], model, arm, scene, cfg.cost, cfg.chomp, do_finetune)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(build, range(len(zs))))
    return [build(i) for i in range(len(zs))]


def write_records(records: list[SolutionRecord], path, cfg: ExperimentConfig) -> None:
    if isinstance(cfg.problem, TestfuncProblem):
        problem = {"kind": "testfunc", "function": cfg.problem.function.value}
    else:
        problem = {
            "kind": "planar",
            "scene": str(cfg.problem.scene_path),
            "arm": str(cfg.problem.arm_path),
            "q_start": list(cfg.problem.q_start),
            "q_goal": list(cfg.problem.q_goal),
            "T": cfg.problem.T,
        }
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    _json_dump({"records": [r.to_dict() for r in records], "problem": problem}, Path(path))


def condition_number_table() -> list[tuple[str, float, float]]:
    """Feature-matrix conditioning across the standard parameter grid."""
    rows: list[tuple[str, float, float]] = []
    for h in (0.005, 0.01, 0.1, 0.25):
        cfg = tr.BasisConfig(kind="exponential", count=30, bandwidth=h)
        rows.append(("exponential", h, tr.condition_number(tr.build_feature_matrix(cfg, 50).phi)))
    for slope in (5.0, 10.0, 50.0, 100.0):
        cfg = tr.BasisConfig(kind="logistic", count=30, slope=slope)
        rows.append(("logistic", slope, tr.condition_number(tr.build_feature_matrix(cfg, 50).phi)))
    return rows


def emit_tables(run_dirs: list, out_dir) -> None:
    """Write the summary CSVs: per-function scores and basis conditioning.

    ``run_dirs`` holds one completed synthetic-function run per function;
    the score table has one column per function and one row per method.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    per_func: dict[str, dict] = {}
    for d in run_dirs:
        records, extras = load_solutions(Path(d) / "solutions.json")
        fname = extras["problem"]["function"]
        raw = np.array([r.score_raw for r in records])
        refined = np.array([r.score_refined if r.score_refined is not None else r.score_raw
                            for r in records])
        gmm_scores = np.array([g["score"] for g in extras.get("gmm_solutions", [])])
        per_func[fname] = {"raw": raw, "refined": refined, "gmm": gmm_scores}

    functions = [f.value for f in tf.TestFunctionId if f.value in per_func]
    with open(out / "table1.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method"] + functions)
        for method, key in (("lsmo_raw", "raw"), ("lsmo_refined", "refined"), ("cem", "gmm")):
            row = [method]
            for fn in functions:
                vals = per_func[fn][key]
                row.append(f"{np.mean(vals):.4f}+-{np.std(vals):.1e}" if vals.size else "")
            writer.writerow(row)

    with open(out / "table5.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["basis", "param", "kappa"])
        for basis, param, kappa in condition_number_table():
            writer.writerow([basis, f"{param:g}", f"{kappa:.6e}"])
