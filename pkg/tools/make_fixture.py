#!/usr/bin/env python3
"""Train a small two-pillar planning model for demos and end-to-end tests.

Writes fixture/model.json (plus copies of the scene and arm documents) in a
few tens of seconds.  Serve it with:

    manifoldplan serve --model fixture/model.json --scene two_pillars \\
        --arm arm3 --port 8765 --static frontend/dist
"""

import argparse
import math
import shutil
from pathlib import Path

import numpy as np

from manifoldplan import generative as gen
from manifoldplan import pipeline as pl
from manifoldplan import trajectory as tr
from manifoldplan import world as wd

Q_GOAL = np.array([0.9, -0.6, -0.4])
Q_START = np.array([math.pi - 0.9, 0.6, 0.4])
T = 50


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("fixture"))
    parser.add_argument("--samples", type=int, default=1500)
    parser.add_argument("--epochs", type=int, default=200)
    parser.add_argument("--seed", type=int, default=5)
    args = parser.parse_args()

    arm = wd.load_arm(pl.builtin_path("arm3"))
    scene = wd.load_scene(pl.builtin_path("two_pillars"))
    cost = wd.CostConfig(margin=0.1, alpha_smooth=1e-4)

    prop = tr.ProposalConfig(scale_a=0.3, num_samples=args.samples, seed=11)
    trajs = tr.sample_proposals(Q_START, Q_GOAL, T, prop, dt=1.0 / T)
    configs = np.stack([t.configurations for t in trajs])
    scores = -wd.batch_total_cost(configs, arm, scene, cost, 1.0 / T)

    basis = tr.BasisConfig(kind="logistic", count=20, slope=50.0)
    weights = gen.shape_weights(scores, gen.ShapingConfig(alpha=20))
    batch = gen.SampleBatch(inputs=tr.fit_batch(configs, Q_START, Q_GOAL, basis).reshape(args.samples, -1),
                            raw_scores=scores, weights=weights)
    meta = gen.RtpMeta(basis=basis, scaling=tr.ScalingConfig(), q_start=Q_START,
                       q_goal=Q_GOAL, T=T, dt=1.0 / T)
    model = gen.train(
        batch,
        gen.TrainConfig(gamma=10.0, capacity_start=0.0, capacity_end=5.0,
                        epochs=args.epochs, batch_size=250, learning_rate=1e-3, seed=args.seed),
        gen.Architecture(encoder_hidden=(300, 200), decoder_hidden=(200, 300), latent_dim=1),
        problem_tag="rtp",
        rtp_meta=meta,
    )

    args.out.mkdir(parents=True, exist_ok=True)
    gen.save_model(model, args.out / "model.json")
    shutil.copy(pl.builtin_path("two_pillars"), args.out / "scene.json")
    shutil.copy(pl.builtin_path("arm3"), args.out / "arm.json")
    print(f"fixture written to {args.out}/")


if __name__ == "__main__":
    main()
