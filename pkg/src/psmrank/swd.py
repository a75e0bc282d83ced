"""Sliced Wasserstein distance between source and target latent distributions.

With the L1 ground cost and equal sample counts the 1-D Wasserstein distance
is the mean absolute difference of order statistics, so each random
projection costs one sort per side.  Utterances contribute their frame-t
vectors to the timestep-t batch; the per-timestep distances are aggregated
by their median.  Larger values mean a harder transfer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .common import TransferScore
from .errors import (
    DimensionMismatch,
    EmptyDomain,
    LengthMismatch,
    NonFiniteInput,
    ZeroDimension,
)
from .ingest import FeatureMatrix


@dataclass(frozen=True)
class SwdConfig:
    n_projections: int = 128
    batch_size: int = 256
    p_norm: int = 1  # only the closed-form L1 regime is supported
    seed: int = 0

    def __post_init__(self):
        if self.n_projections < 1:
            raise ValueError("n_projections must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.p_norm != 1:
            raise ValueError("only p_norm = 1 is supported")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def w1_1d(a, b) -> float:
    """1-D Wasserstein-1 distance between equal-count samples.

    Equals the optimal-assignment cost: sort both sides and average the
    absolute differences of matched order statistics.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise LengthMismatch(f"vectors of length {a.size} and {b.size}")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise NonFiniteInput("w1_1d inputs contain NaN or Inf")
    return float(np.mean(np.abs(np.sort(a) - np.sort(b))))


def _as_points(x) -> np.ndarray:
    data = x.data if isinstance(x, FeatureMatrix) else np.asarray(x, dtype=np.float64)
    if data.ndim != 2:
        raise DimensionMismatch(f"expected an n x D matrix, got shape {data.shape}")
    return data


def sliced_w1(source, target, cfg: SwdConfig, rng: np.random.Generator | None = None) -> float:
    """Monte Carlo sliced W1: average W1 of random 1-D projections.

    Directions are standard-normal vectors normalized to the unit sphere,
    drawn from ``rng`` (or a fresh generator seeded with ``cfg.seed``).
    """
    source = _as_points(source)
    target = _as_points(target)
    if source.shape[1] != target.shape[1]:
        raise DimensionMismatch(
            f"source D = {source.shape[1]}, target D = {target.shape[1]}")
    if source.shape[1] == 0:
        raise ZeroDimension("feature dimension is zero")
    if source.shape[0] != target.shape[0]:
        raise LengthMismatch(
            f"batches of {source.shape[0]} and {target.shape[0]} rows")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    theta = rng.standard_normal((cfg.n_projections, source.shape[1]))
    theta /= np.linalg.norm(theta, axis=1, keepdims=True)
    proj_s = np.sort(source @ theta.T, axis=0)
    proj_t = np.sort(target @ theta.T, axis=0)
    return float(np.mean(np.abs(proj_s - proj_t)))


def swd_score(source_utts, target_utts, cfg: SwdConfig) -> TransferScore:
    """Median over timesteps of the sliced W1 between frame-t batches.

    The evaluated horizon is the minimum frame count over every utterance on
    both sides (no padding).  When a timestep batch exceeds the configured
    batch size, each side is subsampled without replacement; unequal batch
    sizes are likewise equalized by subsampling the larger side.  Streams are
    derived from (seed, timestep) for directions and (seed, timestep, side)
    for subsampling, so results do not depend on evaluation order.
    """
    src = [_as_points(u) for u in source_utts]
    tgt = [_as_points(u) for u in target_utts]
    if not src or not tgt:
        raise EmptyDomain("both domains need at least one utterance")
    dims = {m.shape[1] for m in src} | {m.shape[1] for m in tgt}
    if len(dims) != 1:
        raise DimensionMismatch(f"feature dimensions differ: {sorted(dims)}")
    if dims.pop() == 0:
        raise ZeroDimension("feature dimension is zero")

    t_eval = min(m.shape[0] for m in src + tgt)
    per_t = np.empty(t_eval)
    for t in range(t_eval):
        batches = []
        for side, utts in enumerate((src, tgt)):
            batch = np.stack([u[t] for u in utts])
            batches.append(batch)
        m = min(cfg.batch_size, batches[0].shape[0], batches[1].shape[0])
        for side in range(2):
            if batches[side].shape[0] > m:
                rng_sub = np.random.default_rng([cfg.seed, t, side])
                idx = rng_sub.choice(batches[side].shape[0], size=m, replace=False)
                batches[side] = batches[side][idx]
        rng_dir = np.random.default_rng([cfg.seed, t])
        per_t[t] = sliced_w1(batches[0], batches[1], cfg, rng=rng_dir)

    score = float(np.median(per_t))
    return TransferScore(method="swd", score=score, seed=cfg.seed,
                         params={"t_eval": int(t_eval), "m": int(cfg.n_projections),
                                 "batch_size": int(cfg.batch_size)})
