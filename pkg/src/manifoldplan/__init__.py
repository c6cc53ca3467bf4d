"""Learn latent manifolds of optima; plan and explore diverse arm motions."""

from .generative import (
    Architecture,
    SampleBatch,
    ShapingConfig,
    TrainConfig,
    VaeModel,
    generate,
    load_model,
    save_model,
    shape_weights,
    train,
)
from .pipeline import ExperimentConfig, SolutionRecord, load_config, run_lsmo_testfunc, run_mpsm
from .testfuncs import TestFunctionId, eval_test_function
from .trajectory import BasisConfig, ProposalConfig, RtpParams, fit, reconstruct, sample_proposals
from .world import ArmModel, CostConfig, Scene, Trajectory, trajectory_score

__version__ = "0.1.0"
