"""Importance-weighted variational autoencoder trained from scratch.

The generative model is a pair of small relu MLPs: an encoder producing the
mean and log-variance of a Gaussian posterior over a 1- or 2-dimensional
latent, and a decoder producing the reconstruction mean.  Training
maximizes a weighted lower bound: each sample's reconstruction and
capacity-regularized KL terms are multiplied by a nonnegative importance
weight derived from its objective score, so the decoder's output
concentrates on the high-scoring set instead of the whole proposal cloud.

Everything (forward, backward, Adam) is implemented directly on numpy
arrays; ``gradient_check`` validates the analytic gradients against central
finite differences.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import trajectory as traj_mod
from .world import Trajectory

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1

__all__ = [
    "ShapingConfig",
    "MlpParams",
    "AdamState",
    "Architecture",
    "TrainConfig",
    "SampleBatch",
    "VaeModel",
    "RtpMeta",
    "TrainingDiverged",
    "shape_weights",
    "init_mlp",
    "mlp_forward",
    "encode",
    "reparameterize",
    "decode",
    "generate",
    "decode_trajectory",
    "kl_to_standard_normal",
    "loss_per_sample",
    "weighted_batch_loss",
    "adam_step",
    "train",
    "gradient_check",
    "save_model",
    "load_model",
]


# ---------------------------------------------------------------------------
# Score shaping


@dataclass(frozen=True)
class ShapingConfig:
    """Exponent of the score-to-weight transform."""

    alpha: float = 10.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")


def shape_weights(scores: np.ndarray, cfg: ShapingConfig) -> np.ndarray:
    """Turn raw scores into importance weights in [0, 1].

    Scores below the batch median get weight zero; the rest are weighted
    ``exp(alpha * (R - R_max) / (R_max - R_med))``, so the best sample gets
    exactly 1 and the median sample gets ``exp(-alpha)``.  The transform is
    invariant to positive affine rescaling of the scores.

    A degenerate batch (max == median) carries no ranking information; all
    weights are set to 1 and a warning is logged.
    """
    r = np.asarray(scores, dtype=float)
    if r.ndim != 1 or r.size < 2:
        raise ValueError("need at least 2 scores")
    if not np.all(np.isfinite(r)):
        raise ValueError("scores must be finite")
    r_max = float(np.max(r))
    r_med = float(np.median(r))
    if r_max <= r_med:
        logger.warning("degenerate score batch (max == median); using uniform weights")
        return np.ones_like(r)
    w = np.exp(cfg.alpha * (r - r_max) / (r_max - r_med))
    return np.where(r >= r_med, w, 0.0)


# ---------------------------------------------------------------------------
# MLP plumbing


@dataclass
class MlpParams:
    """Weights and biases of a relu MLP with identity output."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def arrays(self) -> list[np.ndarray]:
        return self.weights + self.biases


def init_mlp(layer_sizes: list[int], rng: np.random.Generator) -> MlpParams:
    """Glorot-uniform initialization: U(+-sqrt(6 / (fan_in + fan_out)))."""
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes, layer_sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases)


def mlp_forward(params: MlpParams, x: np.ndarray, want_cache: bool = False):
    """Forward pass on a (n, d_in) batch; relu on hidden layers only."""
    a = x
    pre_acts, inputs = [], []
    last = len(params.weights) - 1
    for i, (W, b) in enumerate(zip(params.weights, params.biases)):
        inputs.append(a)
        z = a @ W + b
        pre_acts.append(z)
        a = z if i == last else np.maximum(z, 0.0)
    if want_cache:
        return a, (inputs, pre_acts)
    return a


def _mlp_backward(params: MlpParams, cache, grad_out: np.ndarray):
    """Gradients of all parameters plus the gradient w.r.t. the input batch."""
    inputs, pre_acts = cache
    gw = [None] * len(params.weights)
    gb = [None] * len(params.biases)
    g = grad_out
    for i in range(len(params.weights) - 1, -1, -1):
        if i < len(params.weights) - 1:
            g = g * (pre_acts[i] > 0)
        gw[i] = inputs[i].T @ g
        gb[i] = np.sum(g, axis=0)
        g = g @ params.weights[i].T
    return MlpParams(gw, gb), g


# ---------------------------------------------------------------------------
# Model


@dataclass(frozen=True)
class RtpMeta:
    """Enough metadata to turn a decoded weight vector back into a trajectory."""

    basis: traj_mod.BasisConfig
    scaling: traj_mod.ScalingConfig
    q_start: np.ndarray
    q_goal: np.ndarray
    T: int
    dt: float

    @property
    def D(self) -> int:
        return int(np.asarray(self.q_start).shape[0])


@dataclass
class VaeModel:
    encoder: MlpParams
    decoder: MlpParams
    latent_dim: int
    input_dim: int
    norm_shift: np.ndarray
    norm_scale: np.ndarray
    problem_tag: str = "generic"
    rtp_meta: RtpMeta | None = None
    train_log: dict | None = None

    def __post_init__(self):
        if self.latent_dim not in (1, 2):
            raise ValueError("latent_dim must be 1 or 2")
        if self.encoder.layer_sizes[0] != self.input_dim:
            raise ValueError("encoder input dim must equal input_dim")
        if self.encoder.layer_sizes[-1] != 2 * self.latent_dim:
            raise ValueError("encoder must output mean and log-variance per latent")
        if self.decoder.layer_sizes[0] != self.latent_dim:
            raise ValueError("decoder input dim must equal latent_dim")
        if self.decoder.layer_sizes[-1] != self.input_dim:
            raise ValueError("decoder output dim must equal input_dim")
        if np.any(np.asarray(self.norm_scale) <= 0):
            raise ValueError("normalization scales must be positive")

    def normalize(self, x: np.ndarray) -> np.ndarray:
        return (x - self.norm_shift) / self.norm_scale

    def denormalize(self, xn: np.ndarray) -> np.ndarray:
        return xn * self.norm_scale + self.norm_shift


def encode(model: VaeModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and standard deviation for raw input(s)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xb = x[None, :] if single else x
    out = mlp_forward(model.encoder, model.normalize(xb))
    mu, logvar = out[:, : model.latent_dim], out[:, model.latent_dim :]
    sigma = np.exp(0.5 * logvar)
    if single:
        return mu[0], sigma[0]
    return mu, sigma


def reparameterize(mu: np.ndarray, sigma: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw z = mu + sigma * eps with eps standard normal."""
    return mu + sigma * rng.standard_normal(np.shape(mu))


def decode(model: VaeModel, z: np.ndarray) -> np.ndarray:
    """Decoder mean in normalized data space."""
    z = np.asarray(z, dtype=float)
    single = z.ndim == 1
    zb = z[None, :] if single else z
    if zb.shape[-1] != model.latent_dim:
        raise ValueError(f"z must have {model.latent_dim} entries")
    out = mlp_forward(model.decoder, zb)
    return out[0] if single else out


def generate(model: VaeModel, z: np.ndarray) -> np.ndarray:
    """Decoder mean mapped back to the original data space."""
    return model.denormalize(decode(model, z))


def decode_trajectory(model: VaeModel, z: np.ndarray) -> tuple[np.ndarray, Trajectory]:
    """For trajectory models: decoded weight matrix plus the dense trajectory."""
    if model.rtp_meta is None:
        raise ValueError("model carries no trajectory metadata")
    meta = model.rtp_meta
    w_flat = generate(model, z)
    w = w_flat.reshape(meta.basis.count, meta.D)
    params = traj_mod.RtpParams(
        w=w, q_start=meta.q_start, q_goal=meta.q_goal, basis=meta.basis, scaling=meta.scaling
    )
    return w, traj_mod.reconstruct(params, meta.T, dt=meta.dt)


def kl_to_standard_normal(mu: np.ndarray, sigma: np.ndarray) -> float | np.ndarray:
    """KL(N(mu, diag sigma^2) || N(0, I)); closed form, nonnegative."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma <= 0):
        raise ValueError("sigma must be positive")
    per = 0.5 * np.sum(mu**2 + sigma**2 - 1.0 - 2.0 * np.log(sigma), axis=-1)
    return float(per) if per.ndim == 0 else per


# ---------------------------------------------------------------------------
# Weighted loss with analytic gradients


def _loss_and_grads(
    encoder: MlpParams,
    decoder: MlpParams,
    xn: np.ndarray,
    weights: np.ndarray,
    gamma: float,
    capacity: float,
    noise: np.ndarray,
):
    """Mean weighted per-sample loss over a normalized batch, plus gradients.

    Per sample: 0.5 * ||x - x_hat||^2 + gamma * |KL - capacity|, multiplied
    by its importance weight.  ``noise`` supplies the reparameterization
    draw, one row per sample.
    """
    n = xn.shape[0]
    latent = noise.shape[1]
    enc_out, enc_cache = mlp_forward(encoder, xn, want_cache=True)
    mu, logvar = enc_out[:, :latent], enc_out[:, latent:]
    sigma = np.exp(0.5 * logvar)
    z = mu + sigma * noise
    xhat, dec_cache = mlp_forward(decoder, z, want_cache=True)

    rec = 0.5 * np.sum((xhat - xn) ** 2, axis=1)
    kl = 0.5 * np.sum(mu**2 + np.exp(logvar) - 1.0 - logvar, axis=1)
    pen = np.abs(kl - capacity)
    loss = float(np.mean(weights * (rec + gamma * pen)))

    wn = (weights / n)[:, None]
    d_xhat = wn * (xhat - xn)
    dec_grads, d_z = _mlp_backward(decoder, dec_cache, d_xhat)
    sgn = np.sign(kl - capacity)[:, None]
    d_mu = d_z + wn * gamma * sgn * mu
    d_logvar = d_z * (0.5 * sigma * noise) + wn * gamma * sgn * 0.5 * (np.exp(logvar) - 1.0)
    enc_grads, _ = _mlp_backward(encoder, enc_cache, np.concatenate([d_mu, d_logvar], axis=1))

    aux = {"mean_kl": float(np.mean(kl)), "mean_rec": float(np.mean(rec))}
    return loss, enc_grads, dec_grads, aux


def weighted_batch_loss(
    model: VaeModel,
    x: np.ndarray,
    weights: np.ndarray,
    gamma: float,
    capacity: float,
    noise: np.ndarray,
) -> float:
    """Mean weighted loss of a raw batch (no gradients)."""
    xn = model.normalize(np.asarray(x, dtype=float))
    loss, _, _, _ = _loss_and_grads(model.encoder, model.decoder, xn,
                                    np.asarray(weights, float), gamma, capacity, noise)
    return loss


def loss_per_sample(
    model: VaeModel,
    x: np.ndarray,
    weight: float,
    gamma: float,
    capacity: float,
    rng: np.random.Generator | None = None,
    noise: np.ndarray | None = None,
) -> float:
    """Weighted loss of one sample; pass ``noise`` to pin the latent draw."""
    x = np.asarray(x, dtype=float)
    if noise is None:
        rng = rng or np.random.default_rng(0)
        noise = rng.standard_normal((1, model.latent_dim))
    return weighted_batch_loss(model, x[None, :], np.array([weight]), gamma, capacity, noise)


# ---------------------------------------------------------------------------
# Adam


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0

    @classmethod
    def for_params(cls, params: list[np.ndarray]) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params])


def adam_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> AdamState:
    """One bias-corrected Adam update; parameters are modified in place."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params, grads, and state must have matching lengths")
    state.t += 1
    c1 = 1.0 - beta1**state.t
    c2 = 1.0 - beta2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        p -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    return state


# ---------------------------------------------------------------------------
# Training


@dataclass(frozen=True)
class Architecture:
    encoder_hidden: tuple[int, ...] = (64, 64)
    decoder_hidden: tuple[int, ...] = (64, 64)
    latent_dim: int = 1


@dataclass(frozen=True)
class TrainConfig:
    gamma: float = 0.1
    capacity_start: float = 0.0
    capacity_end: float = 0.0
    epochs: int = 100
    batch_size: int = 250
    learning_rate: float = 1e-3
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.capacity_end < self.capacity_start:
            raise ValueError("capacity_end must be >= capacity_start")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")


@dataclass(frozen=True)
class SampleBatch:
    """Proposal samples with raw scores and shaped importance weights."""

    inputs: np.ndarray  # (N, input_dim)
    raw_scores: np.ndarray  # (N,)
    weights: np.ndarray  # (N,)

    def __post_init__(self):
        x = np.asarray(self.inputs, dtype=float)
        r = np.asarray(self.raw_scores, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if x.ndim != 2 or r.shape != (x.shape[0],) or w.shape != (x.shape[0],):
            raise ValueError("inputs (N, d), raw_scores (N,), weights (N,) required")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if not np.any(w > 0):
            raise ValueError("at least one weight must be positive")
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "raw_scores", r)
        object.__setattr__(self, "weights", w)


class TrainingDiverged(RuntimeError):
    """Raised when the loss becomes non-finite; carries the last-good model."""

    def __init__(self, message: str, model: "VaeModel | None" = None, epoch: int = -1):
        super().__init__(message)
        self.model = model
        self.epoch = epoch


def _stream(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng((seed, tag))


_INIT, _SHUFFLE, _NOISE = 0, 1, 2


def train(
    batch: SampleBatch,
    cfg: TrainConfig,
    arch: Architecture,
    problem_tag: str = "generic",
    rtp_meta: RtpMeta | None = None,
) -> VaeModel:
    """Fit the weighted autoencoder to a scored sample batch.

    Inputs are normalized per coordinate (weight-agnostic statistics) and
    weights renormalized to mean one each epoch, so the shaping exponent
    does not silently rescale the learning rate.  The capacity target is
    annealed linearly from ``capacity_start`` to ``capacity_end`` over all
    optimizer steps.  The whole run is deterministic given the seed.
    """
    x = batch.inputs
    n, input_dim = x.shape
    shift = np.mean(x, axis=0)
    std = np.std(x, axis=0)
    scale = np.where(std > 0, std, 1.0)
    xn = (x - shift) / scale

    enc_sizes = [input_dim, *arch.encoder_hidden, 2 * arch.latent_dim]
    dec_sizes = [arch.latent_dim, *arch.decoder_hidden, input_dim]
    init_rng = _stream(cfg.seed, _INIT)
    encoder = init_mlp(enc_sizes, init_rng)
    decoder = init_mlp(dec_sizes, init_rng)

    params = encoder.arrays() + decoder.arrays()
    state = AdamState.for_params(params)
    shuffle_rng = _stream(cfg.seed, _SHUFFLE)
    noise_rng = _stream(cfg.seed, _NOISE)

    steps_per_epoch = (n + cfg.batch_size - 1) // cfg.batch_size
    total_steps = cfg.epochs * steps_per_epoch
    mean_w = float(np.mean(batch.weights))
    weights = batch.weights / mean_w if mean_w > 0 else batch.weights

    log: dict = {"epoch_loss": [], "epoch_kl": []}
    checkpoint = (encoder.copy(), decoder.copy())
    step = 0
    for epoch in range(cfg.epochs):
        perm = shuffle_rng.permutation(n)
        epoch_loss = 0.0
        epoch_kl = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            frac = step / (total_steps - 1) if total_steps > 1 else 1.0
            capacity = cfg.capacity_start + (cfg.capacity_end - cfg.capacity_start) * frac
            noise = noise_rng.standard_normal((idx.size, arch.latent_dim))
            loss, enc_g, dec_g, aux = _loss_and_grads(
                encoder, decoder, xn[idx], weights[idx], cfg.gamma, capacity, noise
            )
            if not np.isfinite(loss):
                model = _assemble(checkpoint[0], checkpoint[1], arch, input_dim, shift, scale,
                                  problem_tag, rtp_meta, log)
                raise TrainingDiverged(f"non-finite loss at epoch {epoch}", model=model, epoch=epoch)
            adam_step(params, enc_g.arrays() + dec_g.arrays(), state,
                      cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
            epoch_loss += loss * idx.size
            epoch_kl += aux["mean_kl"] * idx.size
            step += 1
        log["epoch_loss"].append(epoch_loss / n)
        log["epoch_kl"].append(epoch_kl / n)
        checkpoint = (encoder.copy(), decoder.copy())

    return _assemble(encoder, decoder, arch, input_dim, shift, scale, problem_tag, rtp_meta, log)


def _assemble(encoder, decoder, arch, input_dim, shift, scale, problem_tag, rtp_meta, log) -> VaeModel:
    summary = {
        "epochs": len(log["epoch_loss"]),
        "first_loss": log["epoch_loss"][0] if log["epoch_loss"] else None,
        "final_loss": log["epoch_loss"][-1] if log["epoch_loss"] else None,
        "final_kl": log["epoch_kl"][-1] if log["epoch_kl"] else None,
    }
    return VaeModel(
        encoder=encoder,
        decoder=decoder,
        latent_dim=arch.latent_dim,
        input_dim=input_dim,
        norm_shift=shift,
        norm_scale=scale,
        problem_tag=problem_tag,
        rtp_meta=rtp_meta,
        train_log=summary,
    )


# ---------------------------------------------------------------------------
# Finite-difference oracle


def gradient_check(
    model: VaeModel,
    batch: SampleBatch,
    gamma: float = 0.1,
    capacity: float = 0.0,
    step: float = 1e-5,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    The latent noise is drawn once and held fixed so both sides
    differentiate the same deterministic function.
    """
    xn = model.normalize(batch.inputs)
    weights = batch.weights
    noise = np.random.default_rng(seed).standard_normal((xn.shape[0], model.latent_dim))

    _, enc_g, dec_g, _ = _loss_and_grads(model.encoder, model.decoder, xn, weights, gamma, capacity, noise)
    analytic = enc_g.arrays() + dec_g.arrays()
    params = model.encoder.arrays() + model.decoder.arrays()

    def loss_now() -> float:
        l, _, _, _ = _loss_and_grads(model.encoder, model.decoder, xn, weights, gamma, capacity, noise)
        return l

    max_rel = 0.0
    for p, g in zip(params, analytic):
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = loss_now()
            flat[i] = orig - step
            down = loss_now()
            flat[i] = orig
            num = (up - down) / (2.0 * step)
            denom = max(abs(num), abs(gflat[i]), 1e-6)
            max_rel = max(max_rel, abs(num - gflat[i]) / denom)
    return max_rel


# ---------------------------------------------------------------------------
# Persistence


def _mlp_to_dict(p: MlpParams) -> dict:
    return {
        "layer_sizes": p.layer_sizes,
        "weights": [w.tolist() for w in p.weights],
        "biases": [b.tolist() for b in p.biases],
    }


def _mlp_from_dict(d: dict) -> MlpParams:
    return MlpParams(
        weights=[np.asarray(w, dtype=float) for w in d["weights"]],
        biases=[np.asarray(b, dtype=float) for b in d["biases"]],
    )


def model_to_dict(model: VaeModel) -> dict:
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "problem_tag": model.problem_tag,
        "latent_dim": model.latent_dim,
        "input_dim": model.input_dim,
        "normalization": {"shift": model.norm_shift.tolist(), "scale": model.norm_scale.tolist()},
        "encoder": _mlp_to_dict(model.encoder),
        "decoder": _mlp_to_dict(model.decoder),
        "rtp_meta": None,
        "train_log_summary": model.train_log,
    }
    if model.rtp_meta is not None:
        meta = model.rtp_meta
        doc["rtp_meta"] = {
            "basis": {
                "kind": meta.basis.kind,
                "count": meta.basis.count,
                "slope": meta.basis.slope,
                "bandwidth": meta.basis.bandwidth,
                "centers": list(meta.basis.centers) if meta.basis.centers else None,
            },
            "scaling": {"eps": meta.scaling.eps, "slope": meta.scaling.slope},
            "q_start": np.asarray(meta.q_start).tolist(),
            "q_goal": np.asarray(meta.q_goal).tolist(),
            "T": meta.T,
            "dt": meta.dt,
        }
    return doc


def model_from_dict(doc: dict) -> VaeModel:
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format {doc.get('format_version')!r}")
    rtp_meta = None
    if doc.get("rtp_meta"):
        m = doc["rtp_meta"]
        basis = traj_mod.BasisConfig(
            kind=m["basis"]["kind"],
            count=m["basis"]["count"],
            slope=m["basis"]["slope"],
            bandwidth=m["basis"]["bandwidth"],
            centers=tuple(m["basis"]["centers"]) if m["basis"]["centers"] else None,
        )
        rtp_meta = RtpMeta(
            basis=basis,
            scaling=traj_mod.ScalingConfig(**m["scaling"]),
            q_start=np.asarray(m["q_start"], dtype=float),
            q_goal=np.asarray(m["q_goal"], dtype=float),
            T=int(m["T"]),
            dt=float(m["dt"]),
        )
    return VaeModel(
        encoder=_mlp_from_dict(doc["encoder"]),
        decoder=_mlp_from_dict(doc["decoder"]),
        latent_dim=int(doc["latent_dim"]),
        input_dim=int(doc["input_dim"]),
        norm_shift=np.asarray(doc["normalization"]["shift"], dtype=float),
        norm_scale=np.asarray(doc["normalization"]["scale"], dtype=float),
        problem_tag=doc["problem_tag"],
        rtp_meta=rtp_meta,
        train_log=doc.get("train_log_summary"),
    )


def save_model(model: VaeModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model(path) -> VaeModel:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
