"""Compact trajectory coordinates built from a baseline plus a scaled residual.

A trajectory is written as a straight-line interpolation between the start
and goal configurations plus a basis-function residual that is multiplied
by a time-dependent scaling which vanishes at both ends.  This guarantees
the boundary configurations exactly, regardless of the residual weights,
and keeps the weight vectors small enough for a network to regress.

The module also provides the tridiagonal second-difference matrix, the
smoothness covariance derived from it, and the Gaussian trajectory proposal
built on that covariance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .world import Trajectory

__all__ = [
    "BasisConfig",
    "ScalingConfig",
    "FeatureMatrix",
    "RtpParams",
    "ProposalConfig",
    "eval_basis",
    "build_feature_matrix",
    "condition_number",
    "scaling_value",
    "scaling_vector",
    "baseline_trajectory",
    "reconstruct",
    "fit",
    "build_A",
    "build_Sigma",
    "normalized_sigma_cholesky",
    "sample_proposals",
]


@dataclass(frozen=True)
class BasisConfig:
    """Family and placement of the residual basis functions.

    Parameters
    ----------
    kind : {"logistic", "exponential"}
        Logistic sigmoids step down across their centers; exponential bumps
        are classic radial basis functions.  The logistic family keeps the
        feature matrix far better conditioned, which is why it is the
        default.
    count : int
        Number of basis functions (columns of the feature matrix).
    slope : float
        Steepness of the logistic transition.
    bandwidth : float
        Squared-width parameter of the exponential bumps.
    centers : tuple of float, optional
        Strictly increasing centers in [0, 1]; uniformly spaced by default.
    """

    kind: str = "logistic"
    count: int = 20
    slope: float = 50.0
    bandwidth: float = 0.01
    centers: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("logistic", "exponential"):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.count < 2:
            raise ValueError("need at least 2 basis functions")
        if self.slope <= 0 or self.bandwidth <= 0:
            raise ValueError("slope and bandwidth must be positive")
        if self.centers is not None:
            c = tuple(float(v) for v in self.centers)
            if len(c) != self.count:
                raise ValueError("centers length must equal count")
            if any(b <= a for a, b in zip(c, c[1:])):
                raise ValueError("centers must be strictly increasing")
            object.__setattr__(self, "centers", c)

    def center_array(self) -> np.ndarray:
        if self.centers is not None:
            return np.asarray(self.centers)
        return np.linspace(0.0, 1.0, self.count)


@dataclass(frozen=True)
class ScalingConfig:
    """Endpoint-vanishing ramp: up on [0, eps), flat 1, down on [1-eps, 1].

    Continuity of the ramp forces ``slope * eps == 1``.
    """

    eps: float = 0.1
    slope: float = 10.0

    def __post_init__(self):
        if not 0 < self.eps < 0.5:
            raise ValueError("eps must lie in (0, 0.5)")
        if abs(self.slope * self.eps - 1.0) > 1e-9:
            raise ValueError("scaling requires slope * eps == 1")


@dataclass(frozen=True)
class FeatureMatrix:
    """Basis functions evaluated on a uniform time grid."""

    phi: np.ndarray  # (T, B)
    times: np.ndarray  # (T,)


@dataclass(frozen=True)
class RtpParams:
    """Residual weights plus everything needed to rebuild the trajectory."""

    w: np.ndarray  # (B, D)
    q_start: np.ndarray  # (D,)
    q_goal: np.ndarray  # (D,)
    basis: BasisConfig = field(default_factory=BasisConfig)
    scaling: ScalingConfig = field(default_factory=ScalingConfig)

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        qs = np.asarray(self.q_start, dtype=float)
        qg = np.asarray(self.q_goal, dtype=float)
        if w.ndim != 2 or w.shape[0] != self.basis.count:
            raise ValueError(f"w must be ({self.basis.count}, D), got {w.shape}")
        if qs.shape != qg.shape or qs.ndim != 1 or qs.shape[0] != w.shape[1]:
            raise ValueError("start/goal must be (D,) matching w columns")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "q_start", qs)
        object.__setattr__(self, "q_goal", qg)


@dataclass(frozen=True)
class ProposalConfig:
    """Gaussian trajectory proposal around the straight-line baseline."""

    scale_a: float = 0.05
    num_samples: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.scale_a < 0:
            raise ValueError("scale_a must be nonnegative")
        if self.num_samples < 1:
            raise ValueError("num_samples must be >= 1")


def eval_basis(cfg: BasisConfig, t: float) -> np.ndarray:
    """Evaluate all basis functions at one phase value t in [0, 1]."""
    c = cfg.center_array()
    if cfg.kind == "logistic":
        return 1.0 / (1.0 + np.exp(cfg.slope * (t - c)))
    return np.exp(-((t - c) ** 2) / cfg.bandwidth)


def build_feature_matrix(cfg: BasisConfig, T: int) -> FeatureMatrix:
    """Evaluate the basis on ``T`` uniform phase samples.

    Row t holds every basis function at ``times[t]``.
    """
    if T < 2:
        raise ValueError("need T >= 2 time samples")
    times = np.linspace(0.0, 1.0, T)
    c = cfg.center_array()
    if cfg.kind == "logistic":
        phi = 1.0 / (1.0 + np.exp(cfg.slope * (times[:, None] - c[None, :])))
    else:
        phi = np.exp(-((times[:, None] - c[None, :]) ** 2) / cfg.bandwidth)
    return FeatureMatrix(phi=phi, times=times)


def condition_number(M: np.ndarray) -> float:
    """Ratio of extreme singular values; +inf when the smallest underflows."""
    s = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        raise ValueError("matrix has an empty or all-zero spectrum")
    if s[-1] < 1e-300:
        return float("inf")
    return float(s[0] / s[-1])


def scaling_value(cfg: ScalingConfig, t: float) -> float:
    """Endpoint-vanishing scaling at phase t; s(0) = s(1) = 0 exactly."""
    if t < cfg.eps:
        return cfg.slope * t
    if t < 1.0 - cfg.eps:
        return 1.0
    return cfg.slope * (1.0 - t)


def scaling_vector(cfg: ScalingConfig, times: np.ndarray) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    return np.where(
        times < cfg.eps,
        cfg.slope * times,
        np.where(times < 1.0 - cfg.eps, 1.0, cfg.slope * (1.0 - times)),
    )


def baseline_trajectory(q_start: np.ndarray, q_goal: np.ndarray, T: int) -> np.ndarray:
    """Straight-line interpolation from start to goal, shape (T, D)."""
    tau = np.linspace(0.0, 1.0, T)[:, None]
    return (1.0 - tau) * np.asarray(q_start, dtype=float) + tau * np.asarray(q_goal, dtype=float)


def reconstruct(params: RtpParams, T: int, dt: float | None = None) -> Trajectory:
    """Rebuild the dense trajectory from residual weights.

    The first and last rows equal the start and goal exactly because the
    residual scaling vanishes at both ends.
    """
    feat = build_feature_matrix(params.basis, T)
    s = scaling_vector(params.scaling, feat.times)
    configs = baseline_trajectory(params.q_start, params.q_goal, T) + s[:, None] * (feat.phi @ params.w)
    return Trajectory(configurations=configs, dt=(1.0 / T if dt is None else dt))


def fit(
    traj: Trajectory,
    q_start: np.ndarray,
    q_goal: np.ndarray,
    basis: BasisConfig,
    scaling: ScalingConfig | None = None,
    ridge: float = 1e-12,
) -> RtpParams:
    """Project a dense trajectory onto residual weights (ridge least squares).

    The trajectory's endpoint rows are treated as equal to the given start
    and goal; their residuals are forced to zero before solving.
    """
    scaling = scaling or ScalingConfig()
    T = traj.T
    feat = build_feature_matrix(basis, T)
    s = scaling_vector(scaling, feat.times)
    M = s[:, None] * feat.phi  # (T, B)
    resid = traj.configurations - baseline_trajectory(q_start, q_goal, T)
    resid[0, :] = 0.0
    resid[-1, :] = 0.0
    gram = M.T @ M + ridge * np.eye(basis.count)
    w = np.linalg.solve(gram, M.T @ resid)
    return RtpParams(w=w, q_start=np.asarray(q_start, float), q_goal=np.asarray(q_goal, float),
                     basis=basis, scaling=scaling)


def fit_batch(
    configs: np.ndarray,
    q_start: np.ndarray,
    q_goal: np.ndarray,
    basis: BasisConfig,
    scaling: ScalingConfig | None = None,
    ridge: float = 1e-12,
) -> np.ndarray:
    """Vectorized fit over a (K, T, D) batch; returns weights (K, B, D)."""
    scaling = scaling or ScalingConfig()
    K, T, D = configs.shape
    feat = build_feature_matrix(basis, T)
    s = scaling_vector(scaling, feat.times)
    M = s[:, None] * feat.phi
    resid = configs - baseline_trajectory(q_start, q_goal, T)[None, :, :]
    resid = resid.copy()
    resid[:, 0, :] = 0.0
    resid[:, -1, :] = 0.0
    gram = M.T @ M + ridge * np.eye(basis.count)
    rhs = np.einsum("tb,ktd->bkd", M, resid).reshape(basis.count, K * D)
    w = np.linalg.solve(gram, rhs).reshape(basis.count, K, D)
    return np.moveaxis(w, 1, 0)


def build_A(T: int) -> np.ndarray:
    """Symmetric tridiagonal second-difference matrix (2 on, -1 off diagonal)."""
    if T < 2:
        raise ValueError("need T >= 2")
    A = 2.0 * np.eye(T)
    off = np.arange(T - 1)
    A[off, off + 1] = -1.0
    A[off + 1, off] = -1.0
    return A


def build_Sigma(T: int) -> np.ndarray:
    """Smoothness covariance: exact inverse of A^T A."""
    A = build_A(T)
    return np.linalg.inv(A.T @ A)


def normalized_sigma_cholesky(T: int) -> np.ndarray:
    """Cholesky factor of the covariance rescaled to unit maximum variance.

    The rescaling makes the proposal's ``scale_a`` read as the largest
    per-step variance of the injected noise.
    """
    sigma = build_Sigma(T)
    sigma = sigma / np.max(np.diag(sigma))
    sigma = 0.5 * (sigma + sigma.T)
    return np.linalg.cholesky(sigma)


def sample_proposals(
    q_start: np.ndarray,
    q_goal: np.ndarray,
    T: int,
    cfg: ProposalConfig,
    dt: float | None = None,
) -> list[Trajectory]:
    """Draw smooth random trajectories around the straight-line baseline.

    Each joint receives an independent Gaussian noise curve with the
    smoothness covariance; endpoints are clamped back to the start and goal
    afterwards.  Sample ``i`` uses its own generator seeded from
    ``(seed, i)``, so the set is reproducible and order-independent.
    """
    q_start = np.asarray(q_start, dtype=float)
    q_goal = np.asarray(q_goal, dtype=float)
    D = q_start.shape[0]
    base = baseline_trajectory(q_start, q_goal, T)
    L = normalized_sigma_cholesky(T)
    amp = np.sqrt(cfg.scale_a)
    step = 1.0 / T if dt is None else dt
    out = []
    for i in range(cfg.num_samples):
        rng = np.random.default_rng((cfg.seed, i))
        noise = amp * (L @ rng.standard_normal((T, D)))
        configs = base + noise
        configs[0, :] = q_start
        configs[-1, :] = q_goal
        out.append(Trajectory(configurations=configs, dt=step))
    return out
