"""Solution refinement: trust-region trajectory updates and CEM variants.

Trajectory outputs of the generative model are projected onto the
collision-free set by repeatedly taking the closed-form minimizer of a
linearized cost plus a metric trust region (the second-difference metric,
so accepted steps barely disturb the velocity profile).  Point solutions of
the synthetic objectives are polished with a cross-entropy method whose
score is penalized by the distance from the current sampling mean, which
keeps refined solutions close to where the model put them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .trajectory import build_A
from .world import ArmModel, CostConfig, Scene, Trajectory, batch_total_cost, is_collision_free

__all__ = [
    "ChompConfig",
    "CemConfig",
    "chomp_step",
    "chomp_finetune",
    "cost_gradient",
    "cem_trust_region",
    "cem_gmm",
]


@dataclass(frozen=True)
class ChompConfig:
    eta: float = 1500.0
    max_iters: int = 200
    step_tolerance: float = 1e-6
    metric: str = "second_difference"
    fd_step: float = 1e-5

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.metric != "second_difference":
            raise ValueError(f"unknown metric {self.metric!r}")


@dataclass(frozen=True)
class CemConfig:
    population: int = 200
    elite_fraction: float = 0.1
    iterations: int = 50
    init_sigma: float = 0.3
    trust_eta1: float = 2.0
    components: int = 1
    sigma_floor: float = 1e-4
    shrink_rate: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.elite_fraction < 1:
            raise ValueError("elite_fraction must be in (0, 1)")
        if self.population * self.elite_fraction < 2:
            raise ValueError("population * elite_fraction must be >= 2")
        if self.components < 1:
            raise ValueError("components must be >= 1")
        if self.trust_eta1 < 0:
            raise ValueError("trust_eta1 must be nonnegative")
        if not 0 <= self.shrink_rate < 1:
            raise ValueError("shrink_rate must be in [0, 1)")


def _interior_metric(T: int) -> np.ndarray:
    A = build_A(T - 2)
    return A.T @ A


def chomp_step(traj: Trajectory, gradient: np.ndarray, cfg: ChompConfig) -> Trajectory:
    """Closed-form minimizer of the linearized cost plus metric trust region.

    ``gradient`` has shape (T-2, D): the cost gradient at the interior
    configurations.  Start and goal rows are never touched.  The returned
    trajectory satisfies g + eta * M (xi - xi_current) = 0 exactly (up to
    solver roundoff).
    """
    g = np.asarray(gradient, dtype=float)
    if g.shape != (traj.T - 2, traj.D):
        raise ValueError(f"gradient must be (T-2, D) = {(traj.T - 2, traj.D)}, got {g.shape}")
    M = _interior_metric(traj.T)
    delta = np.linalg.solve(M, g) / cfg.eta
    configs = traj.configurations.copy()
    configs[1:-1, :] -= delta
    return Trajectory(configurations=configs, dt=traj.dt)


def cost_gradient(
    traj: Trajectory,
    arm: ArmModel,
    scene: Scene,
    cost_cfg: CostConfig,
    fd_step: float = 1e-5,
) -> np.ndarray:
    """Central finite differences of the total cost w.r.t. interior configs.

    All perturbed trajectories are evaluated in one vectorized batch.
    """
    T, D = traj.T, traj.D
    n = (T - 2) * D
    base = traj.configurations
    batch = np.broadcast_to(base, (2 * n, T, D)).copy()
    rows, cols = np.divmod(np.arange(n), D)
    batch[np.arange(n), rows + 1, cols] += fd_step
    batch[n + np.arange(n), rows + 1, cols] -= fd_step
    costs = batch_total_cost(batch, arm, scene, cost_cfg, traj.dt)
    return ((costs[:n] - costs[n:]) / (2.0 * fd_step)).reshape(T - 2, D)


def chomp_finetune(
    traj: Trajectory,
    arm: ArmModel,
    scene: Scene,
    cost_cfg: CostConfig,
    cfg: ChompConfig,
    time_budget: float | None = None,
    cost_history: list | None = None,
) -> tuple[Trajectory, int, bool]:
    """Iterate trust-region steps until the trajectory is collision-free.

    Steps that would increase the cost are halved (by doubling the
    regularizer) up to 10 times and dropped if still uphill, so the
    accepted-cost sequence never increases.  Returns the trajectory, the
    number of iterations used, and whether it ended collision-free.
    Non-convergence is reported through the flag, never raised.  Pass a
    list as ``cost_history`` to collect the accepted-cost sequence.
    """
    if is_collision_free(traj, arm, scene):
        return traj, 0, True
    deadline = None if time_budget is None else time.perf_counter() + time_budget
    M = _interior_metric(traj.T)
    current = traj
    cost_cur = float(batch_total_cost(current.configurations[None], arm, scene, cost_cfg, traj.dt)[0])
    if cost_history is not None:
        cost_history.append(cost_cur)
    iters = 0
    for _ in range(cfg.max_iters):
        if deadline is not None and time.perf_counter() > deadline:
            break
        g = cost_gradient(current, arm, scene, cost_cfg, cfg.fd_step)
        delta = np.linalg.solve(M, g) / cfg.eta
        accepted = False
        for _halving in range(11):
            trial = current.configurations.copy()
            trial[1:-1, :] -= delta
            cost_trial = float(batch_total_cost(trial[None], arm, scene, cost_cfg, traj.dt)[0])
            if cost_trial <= cost_cur:
                accepted = True
                break
            delta = 0.5 * delta
        if not accepted:
            break
        iters += 1
        current = Trajectory(configurations=trial, dt=traj.dt)
        cost_cur = cost_trial
        if cost_history is not None:
            cost_history.append(cost_cur)
        if is_collision_free(current, arm, scene):
            return current, iters, True
        if float(np.max(np.abs(delta))) < cfg.step_tolerance:
            break
    return current, iters, is_collision_free(current, arm, scene)


# ---------------------------------------------------------------------------
# Cross-entropy refinement

_INIT_TAG, _SAMPLE_TAG = 10, 11


def _elite_count(n: int, fraction: float) -> int:
    return max(2, int(round(n * fraction)))


def _refit(
    x_members: np.ndarray, sigma_prev: np.ndarray, floor: float, shrink_rate: float
) -> tuple[np.ndarray, np.ndarray]:
    # Sigma is monotone non-increasing but never contracts by more than the
    # shrink rate in one iteration; a fast collapse would freeze the mean
    # before it can drift along a flat ridge of the objective.
    mu = np.mean(x_members, axis=0)
    sigma = np.std(x_members, axis=0)
    sigma = np.maximum(sigma, shrink_rate * sigma_prev)
    sigma = np.minimum(sigma_prev, np.maximum(sigma, floor))
    return mu, sigma


def cem_trust_region(
    objective,
    x_init: np.ndarray,
    cfg: CemConfig,
    track_history: bool = False,
):
    """Polish one solution with a distance-penalized cross-entropy method.

    ``objective`` must accept an (n, d) batch and return (n,) scores.  Each
    iteration samples around the current mean, ranks candidates by
    ``score - trust_eta1 * ||x - x_init||``, and refits the Gaussian on the
    elites; the per-dimension sigma never grows.  The trust term is
    anchored at the initial estimate, so a dominating penalty pins the
    result there instead of letting the mean random-walk.  Returns the
    final mean (with the per-iteration mean/sigma history when requested).
    Deterministic given the seed.
    """
    x = np.asarray(x_init, dtype=float)
    d = x.shape[0]
    rng = np.random.default_rng((cfg.seed, _SAMPLE_TAG))
    mu = x.copy()
    sigma = np.full(d, cfg.init_sigma)
    history = {"mean": [mu.copy()], "sigma": [sigma.copy()]}
    k = _elite_count(cfg.population, cfg.elite_fraction)
    for _ in range(cfg.iterations):
        samples = mu + sigma * rng.standard_normal((cfg.population, d))
        scores = np.asarray(objective(samples), dtype=float)
        if cfg.trust_eta1 > 0:
            scores = scores - cfg.trust_eta1 * np.linalg.norm(samples - x, axis=1)
        elite_idx = np.argsort(-scores, kind="stable")[:k]
        mu, sigma = _refit(samples[elite_idx], sigma, cfg.sigma_floor, cfg.shrink_rate)
        history["mean"].append(mu.copy())
        history["sigma"].append(sigma.copy())
    if track_history:
        return mu, history
    return mu


def cem_gmm(objective, cfg: CemConfig, bounds, track_history: bool = False):
    """Multimodal cross-entropy search with a mixture of Gaussians.

    Component means start at uniform random points inside ``bounds``; each
    iteration pools the per-component samples, assigns every sample to the
    nearest component mean, and refits each component on its own elites.
    Returns one (position, score) pair per component.  With a single
    component this reduces to the plain cross-entropy method step for step.
    """
    lo = np.asarray(bounds[0], dtype=float)
    hi = np.asarray(bounds[1], dtype=float)
    d = lo.shape[0]
    init_rng = np.random.default_rng((cfg.seed, _INIT_TAG))
    sample_rng = np.random.default_rng((cfg.seed, _SAMPLE_TAG))
    means = init_rng.uniform(lo, hi, size=(cfg.components, d))
    sigmas = np.full((cfg.components, d), cfg.init_sigma)
    per_comp = cfg.population // cfg.components
    if per_comp < 2:
        raise ValueError("population must allow at least 2 samples per component")
    history = {"mean": [means.copy()], "sigma": [sigmas.copy()]}
    for _ in range(cfg.iterations):
        pools = [
            means[j] + sigmas[j] * sample_rng.standard_normal((per_comp, d))
            for j in range(cfg.components)
        ]
        samples = np.concatenate(pools, axis=0)
        scores = np.asarray(objective(samples), dtype=float)
        dist = np.linalg.norm(samples[:, None, :] - means[None, :, :], axis=2)
        assign = np.argmin(dist, axis=1)
        for j in range(cfg.components):
            members = np.nonzero(assign == j)[0]
            if members.size < 2:
                continue
            k = _elite_count(members.size, cfg.elite_fraction)
            order = np.argsort(-scores[members], kind="stable")[:k]
            means[j], sigmas[j] = _refit(samples[members[order]], sigmas[j], cfg.sigma_floor, cfg.shrink_rate)
        history["mean"].append(means.copy())
        history["sigma"].append(sigmas.copy())
    final_scores = np.asarray(objective(means), dtype=float)
    solutions = [(means[j].copy(), float(final_scores[j])) for j in range(cfg.components)]
    if track_history:
        return solutions, history
    return solutions
