"""Acceptance suite: one test per release criterion, each printing PASS/FAIL.

Run with ``pytest tests/test_acceptance.py -v -s``.  The two training
fixtures dominate the runtime (several minutes each); everything else is
seconds.
"""

import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from manifoldplan import cli
from manifoldplan import generative as gen
from manifoldplan import pipeline as pl
from manifoldplan import refine as rf
from manifoldplan import testfuncs as tfuncs
from manifoldplan import trajectory as tr
from manifoldplan import world as wd

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def _report(name: str, ok: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------------------
# Heavy fixtures


@pytest.fixture(scope="module")
def table1_results(tmp_path_factory):
    out = tmp_path_factory.mktemp("table1")
    results = {}
    for i in range(1, 5):
        cfg = pl.load_config(CONFIG_DIR / f"testfunc_func{i}.json")
        results[f"func{i}"] = pl.run_lsmo_testfunc(cfg, out_dir=out / f"func{i}")
    return results, out


@pytest.fixture(scope="module")
def mpsm_result(tmp_path_factory):
    out = tmp_path_factory.mktemp("mpsm")
    cfg = pl.load_config(CONFIG_DIR / "two_pillars.json")
    result = pl.run_mpsm(cfg, out_dir=out / "two_pillars", threads=1)
    return cfg, result


# ---------------------------------------------------------------------------
# Criterion 1 + 2: synthetic-function score reproduction


def test_table1_refined_scores(table1_results):
    results, _ = table1_results
    floors = {"func1": 0.995, "func2": 0.995, "func3": 0.99, "func4": 0.995}
    details = []
    ok = True
    for name, floor in floors.items():
        refined = np.array([r.score_refined for r in results[name].records])
        mean = float(refined.mean())
        details.append(f"{name}: refined mean {mean:.5f} (floor {floor})")
        ok = ok and mean >= floor
    for name in floors:
        gmm = max(g["score"] for g in results[name].extras["gmm_solutions"])
        details.append(f"{name}: gmm best {gmm:.5f}")
        ok = ok and gmm >= 0.999
    _report("table1-scores", ok, "; ".join(details))


def test_table1_raw_band(table1_results):
    results, _ = table1_results
    details = []
    ok = True
    for name, res in results.items():
        raw = np.array([r.score_raw for r in res.records])
        mean = float(raw.mean())
        details.append(f"{name}: raw mean {mean:.4f}")
        ok = ok and 0.75 <= mean <= 1.0
    _report("table1-raw-band", ok, "; ".join(details))


# ---------------------------------------------------------------------------
# Criterion 3: feature-matrix conditioning


def test_table5_condition_numbers():
    rows = {(b, p): k for b, p, k in pl.condition_number_table()}
    log50, log100 = rows[("logistic", 50.0)], rows[("logistic", 100.0)]
    exp005, exp01 = rows[("exponential", 0.005)], rows[("exponential", 0.01)]
    ok = (
        1100 / 2 <= log50 <= 1100 * 2
        and 140 / 2 <= log100 <= 140 * 2
        and 1.40e3 <= exp005 <= 1.40e5
        and 6.86e6 <= exp01 <= 6.86e8
        and log50 < exp01
    )
    _report(
        "table5-conditioning", ok,
        f"log50={log50:.3g} log100={log100:.3g} exp005={exp005:.3g} exp01={exp01:.3g}",
    )


# ---------------------------------------------------------------------------
# Criterion 4: trajectory-coordinate constraints


def test_rtp_endpoint_and_roundtrip_suite():
    rng = np.random.default_rng(2024)
    basis = tr.BasisConfig(kind="logistic", count=20, slope=50.0)
    worst_endpoint = 0.0
    for _ in range(1000):
        params = tr.RtpParams(
            w=rng.standard_normal((20, 3)),
            q_start=rng.standard_normal(3),
            q_goal=rng.standard_normal(3),
            basis=basis,
        )
        traj = tr.reconstruct(params, 50)
        worst_endpoint = max(
            worst_endpoint,
            float(np.max(np.abs(traj.configurations[0] - params.q_start))),
            float(np.max(np.abs(traj.configurations[-1] - params.q_goal))),
        )
    worst_roundtrip = 0.0
    for _ in range(50):
        params = tr.RtpParams(
            w=rng.standard_normal((20, 3)),
            q_start=rng.standard_normal(3),
            q_goal=rng.standard_normal(3),
            basis=basis,
        )
        traj = tr.reconstruct(params, 50)
        back = tr.reconstruct(tr.fit(traj, params.q_start, params.q_goal, basis), 50)
        worst_roundtrip = max(
            worst_roundtrip, float(np.max(np.abs(back.configurations - traj.configurations)))
        )
    ok = worst_endpoint < 1e-12 and worst_roundtrip < 1e-8
    _report("rtp-constraints", ok,
            f"endpoint max {worst_endpoint:.2e} (<1e-12), roundtrip max {worst_roundtrip:.2e} (<1e-8)")


# ---------------------------------------------------------------------------
# Criterion 5: gradient oracle


def test_gradient_oracle():
    worst = 0.0
    for seed in range(5):
        rng = np.random.default_rng(seed)
        enc = gen.init_mlp([3, 16, 4], rng)
        dec = gen.init_mlp([2, 16, 3], rng)
        model = gen.VaeModel(encoder=enc, decoder=dec, latent_dim=2, input_dim=3,
                             norm_shift=np.zeros(3), norm_scale=np.ones(3))
        x = rng.normal(size=(6, 3))
        w = rng.uniform(0.0, 1.0, size=6)
        w[0] = 1.0
        batch = gen.SampleBatch(inputs=x, raw_scores=np.zeros(6), weights=w)
        worst = max(worst, gen.gradient_check(model, batch, gamma=0.8, capacity=0.3, seed=seed))
    ok = worst < 1e-4
    _report("gradient-oracle", ok, f"max relative error {worst:.2e} over 5 seeds (<1e-4)")


# ---------------------------------------------------------------------------
# Criterion 6: planar-arm property suite


def test_mpsm_properties(mpsm_result):
    _, result = mpsm_result
    records = result.records
    free = [r.collision_free_refined for r in records]
    frac_free = float(np.mean(free))
    labels = {r.homotopy_refined for r in records if r.collision_free_refined}
    mean_raw = float(np.mean([r.score_raw for r in records]))
    best_prop = result.extras["best_proposal_score"]
    ratio = abs(mean_raw) / abs(best_prop)
    ok = frac_free >= 0.95 and len(labels) >= 2 and ratio <= 3.0
    _report(
        "mpsm-properties", ok,
        f"collision-free {frac_free:.0%} (>=95%), classes {sorted(labels)} (>=2), "
        f"mean raw {mean_raw:.2f} vs best proposal {best_prop:.2f}, ratio {ratio:.2f} (<=3)",
    )


# ---------------------------------------------------------------------------
# Criterion 7: scene-change adaptation


def test_adaptation(mpsm_result):
    cfg, result = mpsm_result
    arm = wd.load_arm(cfg.problem.arm_path)
    scene = wd.load_scene(cfg.problem.scene_path)
    dt = 1.0 / cfg.problem.T
    free = [r for r in result.records if r.collision_free_refined]
    by_label: dict = {}
    for r in free:
        by_label.setdefault(r.homotopy_refined, []).append(r)
    assert len(by_label) >= 2, "needs the diversity established by the planning criterion"
    ordered = sorted(by_label.items(), key=lambda kv: len(kv[1]))
    minority_label, minority = ordered[0]
    majority_label = ordered[-1][0]

    # Block the minority corridor: smallest clearance point of a minority
    # tip path relative to the left pillar.
    pillar = np.asarray(scene.obstacles[0][0])
    tips = wd.fk_body_points(arm, np.asarray(minority[0].best_trajectory()))[:, -1, :]
    blocker_center = tips[np.argmin(np.linalg.norm(tips - pillar, axis=1))]
    new_scene = wd.Scene(
        obstacles=scene.obstacles + ((tuple(blocker_center), 0.05),),
        workspace_bounds=scene.workspace_bounds,
    )
    survivors, report = pl.adaptation_check(free, new_scene, arm, dt)
    surviving_labels = {r.homotopy_refined for r in survivors}
    ok = (
        len(survivors) > 0
        and minority_label not in surviving_labels
        and majority_label in surviving_labels
        and report["max_check_time_s"] < 0.05
    )
    _report(
        "adaptation", ok,
        f"blocked {minority_label!r}: survivors {len(survivors)}/{len(free)} with labels "
        f"{sorted(surviving_labels)}, max check {1000 * report['max_check_time_s']:.1f} ms (<50)",
    )


# ---------------------------------------------------------------------------
# Criterion 8: refinement contracts


def test_refinement_contracts(arm, gate_scene, planar_cost):
    rng = np.random.default_rng(5)
    worst_residual = 0.0
    for _ in range(20):
        T, D = 30, 3
        configs = tr.baseline_trajectory(rng.normal(size=D), rng.normal(size=D), T)
        configs[1:-1] += 0.3 * rng.standard_normal((T - 2, D))
        traj = wd.Trajectory(configurations=configs, dt=1.0 / T)
        g = rng.standard_normal((T - 2, D))
        cfg = rf.ChompConfig(eta=700.0)
        out = rf.chomp_step(traj, g, cfg)
        A = tr.build_A(T - 2)
        M = A.T @ A
        delta = out.configurations[1:-1] - traj.configurations[1:-1]
        worst_residual = max(worst_residual, float(np.max(np.abs(g + cfg.eta * (M @ delta)))))

    from conftest import PLANAR_T, Q_GOAL, Q_START
    base = wd.Trajectory(configurations=tr.baseline_trajectory(Q_START, Q_GOAL, PLANAR_T),
                         dt=1.0 / PLANAR_T)
    history: list = []
    _, _, freed = rf.chomp_finetune(base, arm, gate_scene, planar_cost,
                                    rf.ChompConfig(max_iters=300), cost_history=history)
    monotone = bool(np.all(np.diff(history) <= 1e-12))

    obj = tfuncs.make_objective(tfuncs.TestFunctionId.FUNC4)
    cem_cfg = rf.CemConfig(population=150, elite_fraction=0.1, iterations=25,
                           init_sigma=0.3, trust_eta1=0.0, components=1, seed=31)
    sols, gmm_hist = rf.cem_gmm(obj, cem_cfg, bounds=((0.0, 0.0), (2.0, 2.0)), track_history=True)
    _, cem_hist = rf.cem_trust_region(obj, gmm_hist["mean"][0][0], cem_cfg, track_history=True)
    identical = all(
        np.array_equal(a[0], b) for a, b in zip(gmm_hist["mean"], cem_hist["mean"])
    )

    ok = worst_residual < 1e-8 and monotone and freed and identical
    _report(
        "refinement-contracts", ok,
        f"stationarity {worst_residual:.2e} (<1e-8), monotone accepted costs {monotone}, "
        f"gate freed {freed}, eta1=0 step-identity {identical}",
    )


# ---------------------------------------------------------------------------
# Criterion 9: command-line determinism


def _tiny_testfunc_config(path: Path) -> Path:
    doc = {
        "problem": {"kind": "testfunc", "function": "func2"},
        "seed": 9,
        "samples": 1200,
        "shaping": {"alpha": 10},
        "train": {"gamma": 0.1, "epochs": 6, "batch_size": 200, "learning_rate": 0.001},
        "arch": {"encoder_hidden": [16], "decoder_hidden": [16], "latent_dim": 1},
        "sweep": {"z_min": -1.64, "z_max": 1.64, "count": 5},
        "refine": {"cem": {"population": 60, "elite_fraction": 0.1, "iterations": 10,
                            "init_sigma": 0.2, "trust_eta1": 0.05}},
        "gmm": {"population": 120, "elite_fraction": 0.1, "iterations": 10,
                "init_sigma": 0.3, "trust_eta1": 0.0, "components": 3},
    }
    cfg = path / "testfunc.json"
    cfg.write_text(json.dumps(doc))
    return cfg


def _tiny_planar_config(path: Path) -> Path:
    doc = {
        "problem": {"kind": "planar", "scene": "two_pillars", "arm": "arm3",
                    "q_start": [2.2415926535897933, 0.6, 0.4],
                    "q_goal": [0.9, -0.6, -0.4], "T": 30},
        "seed": 4,
        "samples": 250,
        "proposal": {"scale_a": 0.3},
        "shaping": {"alpha": 20},
        "train": {"gamma": 10.0, "capacity_start": 0.0, "capacity_end": 5.0,
                  "epochs": 25, "batch_size": 125, "learning_rate": 0.001},
        "arch": {"encoder_hidden": [32], "decoder_hidden": [32], "latent_dim": 1},
        "sweep": {"z_min": -1.28, "z_max": 1.28, "count": 4},
        "refine": {"chomp": {"eta": 1500.0, "max_iters": 60, "step_tolerance": 1e-6}},
        "cost": {"margin": 0.1, "alpha_smooth": 1e-4},
        "rtp_basis": {"kind": "logistic", "count": 10, "slope": 50.0},
    }
    cfg = path / "planar.json"
    cfg.write_text(json.dumps(doc))
    return cfg


def _artifact_bytes(run_dir: Path) -> dict:
    return {
        p.name: p.read_bytes()
        for p in sorted(run_dir.iterdir())
        if p.name != "timings.json"  # wall-clock only, excluded by design
    }


def test_cli_determinism(tmp_path):
    checks = []
    for label, make_cfg, command in (
        ("testfunc", _tiny_testfunc_config, "train-testfunc"),
        ("planar", _tiny_planar_config, "train-planar"),
    ):
        cfg = make_cfg(tmp_path)
        outs = []
        for run in ("a", "b"):
            out = tmp_path / f"{label}_{run}"
            code = cli.main([command, "--config", str(cfg), "--out", str(out)])
            assert code == 0
            outs.append(_artifact_bytes(out))
        same = outs[0].keys() == outs[1].keys() and all(
            outs[0][k] == outs[1][k] for k in outs[0]
        )
        checks.append((label, same, sorted(outs[0].keys())))
    ok = all(same for _, same, _ in checks)
    detail = "; ".join(f"{label}: byte-identical={same} over {files}" for label, same, files in checks)
    _report("cli-determinism", ok, detail)


def test_cli_config_error_exit_code(tmp_path):
    code = cli.main(["train-testfunc", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "out")])
    assert code == 2
