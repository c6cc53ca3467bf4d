import math

import numpy as np
import pytest

from manifoldplan import generative as gen
from manifoldplan import pipeline as pl
from manifoldplan import trajectory as tr
from manifoldplan import world as wd

Q_GOAL = np.array([0.9, -0.6, -0.4])
Q_START = np.array([math.pi - 0.9, 0.6, 0.4])
PLANAR_T = 50


@pytest.fixture(scope="session")
def arm():
    return wd.load_arm(pl.builtin_path("arm3"))


@pytest.fixture(scope="session")
def two_pillars_scene():
    return wd.load_scene(pl.builtin_path("two_pillars"))


@pytest.fixture(scope="session")
def gate_scene():
    return wd.load_scene(pl.builtin_path("gate"))


@pytest.fixture(scope="session")
def planar_cost():
    return wd.CostConfig(margin=0.1, alpha_smooth=1e-4)


@pytest.fixture(scope="session")
def small_planar_model(arm, two_pillars_scene, planar_cost):
    """A cheap trajectory model on the two-pillar scene for service tests."""
    prop = tr.ProposalConfig(scale_a=0.3, num_samples=1500, seed=11)
    trajs = tr.sample_proposals(Q_START, Q_GOAL, PLANAR_T, prop, dt=1.0 / PLANAR_T)
    configs = np.stack([t.configurations for t in trajs])
    scores = -wd.batch_total_cost(configs, arm, two_pillars_scene, planar_cost, 1.0 / PLANAR_T)
    basis = tr.BasisConfig(kind="logistic", count=20, slope=50.0)
    W = tr.fit_batch(configs, Q_START, Q_GOAL, basis)
    weights = gen.shape_weights(scores, gen.ShapingConfig(alpha=20))
    batch = gen.SampleBatch(inputs=W.reshape(len(trajs), -1), raw_scores=scores, weights=weights)
    cfg = gen.TrainConfig(gamma=10.0, capacity_start=0.0, capacity_end=5.0,
                          epochs=200, batch_size=250, learning_rate=1e-3, seed=5)
    meta = gen.RtpMeta(basis=basis, scaling=tr.ScalingConfig(), q_start=Q_START,
                       q_goal=Q_GOAL, T=PLANAR_T, dt=1.0 / PLANAR_T)
    arch = gen.Architecture(encoder_hidden=(300, 200), decoder_hidden=(200, 300), latent_dim=1)
    return gen.train(batch, cfg, arch, problem_tag="rtp", rtp_meta=meta)
