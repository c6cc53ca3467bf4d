"""Command-line entry points.

Exit codes: 0 on success, 2 for configuration problems, 3 when training
diverges numerically.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import generative as gen
from . import pipeline as pl
from . import refine as rf
from . import world as wd


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="experiment config file (JSON)")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", type=Path, default=None, help="output directory")
    p.add_argument("--threads", type=int, default=1, help="worker threads for scoring/refinement")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="manifoldplan",
                                     description="Learn and explore manifolds of optima.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-testfunc", help="run the synthetic-function pipeline")
    _add_common(p)

    p = sub.add_parser("train-planar", help="run the planar-arm planning pipeline")
    _add_common(p)

    p = sub.add_parser("sweep", help="re-sweep the latent range of a finished run")
    _add_common(p)
    p.add_argument("--run", type=Path, required=True, help="directory of a finished run")
    p.add_argument("--count", type=int, default=None, help="override sweep count")

    p = sub.add_parser("finetune", help="re-run refinement on a finished run's records")
    _add_common(p)
    p.add_argument("--run", type=Path, required=True)

    p = sub.add_parser("tables", help="emit summary CSV tables from finished runs")
    _add_common(p)
    p.add_argument("runs", nargs="*", type=Path, help="synthetic-function run directories")

    p = sub.add_parser("adapt", help="re-validate a run's solutions against a new scene")
    _add_common(p)
    p.add_argument("--run", type=Path, required=True)
    p.add_argument("--scene", type=str, required=True, help="new scene file or builtin name")
    p.add_argument("--rescue", action="store_true", help="re-fine-tune failing solutions")

    p = sub.add_parser("serve", help="serve a trained model over HTTP")
    _add_common(p)
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--scene", type=str, required=True)
    p.add_argument("--arm", type=str, required=True)
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--static", type=Path, default=None, help="directory with the UI bundle")
    return parser


def _require(args, attr: str):
    value = getattr(args, attr, None)
    if value is None:
        raise pl.ConfigError(f"--{attr} is required for this command")
    return value


def _cmd_train(args, runner) -> int:
    cfg = pl.load_config(_require(args, "config"), seed_override=args.seed)
    out = _require(args, "out")
    runner(cfg, out_dir=out, threads=args.threads)
    print(f"run written to {out}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = pl.load_config(_require(args, "config"), seed_override=args.seed)
    if args.count is not None:
        cfg = pl.replace_sweep_count(cfg, args.count)
    model = gen.load_model(args.run / "model.json")
    out = args.out or args.run
    records = pl.resweep(cfg, model, threads=args.threads)
    pl.write_records(records, Path(out) / "solutions.json", cfg)
    print(f"swept {len(records)} latent points into {out}")
    return 0


def _cmd_finetune(args) -> int:
    cfg = pl.load_config(_require(args, "config"), seed_override=args.seed)
    model = gen.load_model(args.run / "model.json")
    records = pl.resweep(cfg, model, threads=args.threads, finetune=True)
    out = args.out or args.run
    pl.write_records(records, Path(out) / "solutions.json", cfg)
    print(f"fine-tuned {len(records)} solutions into {out}")
    return 0


def _cmd_tables(args) -> int:
    out = _require(args, "out")
    pl.emit_tables(list(args.runs), out)
    print(f"tables written to {out}")
    return 0


def _cmd_adapt(args) -> int:
    records, extras = pl.load_solutions(args.run / "solutions.json")
    problem = extras.get("problem", {})
    if problem.get("kind") != "planar":
        raise pl.ConfigError("adapt needs a planar run")
    arm = wd.load_arm(problem["arm"])
    scene_path = Path(args.scene) if Path(args.scene).exists() else pl.builtin_path(args.scene)
    new_scene = wd.load_scene(scene_path)
    dt = 1.0 / int(problem.get("T", 50))
    rescue = rf.ChompConfig() if args.rescue else None
    survivors, report = pl.adaptation_check(records, new_scene, arm, dt, rescue=rescue)
    out = args.out or args.run
    Path(out).mkdir(parents=True, exist_ok=True)
    with open(Path(out) / "adaptation.json", "w", encoding="utf-8") as fh:
        json.dump({"records": [r.to_dict() for r in survivors],
                   "report": {k: v for k, v in report.items() if k != "check_times_s"}},
                  fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(f"{report['survivors']} of {report['checked']} solutions survive "
          f"(max check {1000 * report['max_check_time_s']:.1f} ms)")
    return 0


def _cmd_serve(args) -> int:
    from . import serve as srv

    model = gen.load_model(args.model)
    scene_path = Path(args.scene) if Path(args.scene).exists() else pl.builtin_path(args.scene)
    arm_path = Path(args.arm) if Path(args.arm).exists() else pl.builtin_path(args.arm)
    state = srv.SessionState(
        model=model,
        arm=wd.load_arm(arm_path),
        scene=wd.load_scene(scene_path),
    )
    server = srv.make_server(state, port=args.port, static_dir=args.static)
    print(f"serving on http://127.0.0.1:{server.server_address[1]}/")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    np.seterr(all="ignore")
    try:
        if args.command == "train-testfunc":
            return _cmd_train(args, pl.run_lsmo_testfunc)
        if args.command == "train-planar":
            return _cmd_train(args, pl.run_mpsm)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "finetune":
            return _cmd_finetune(args)
        if args.command == "tables":
            return _cmd_tables(args)
        if args.command == "adapt":
            return _cmd_adapt(args)
        if args.command == "serve":
            return _cmd_serve(args)
        raise pl.ConfigError(f"unknown command {args.command!r}")
    except pl.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except gen.TrainingDiverged as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
