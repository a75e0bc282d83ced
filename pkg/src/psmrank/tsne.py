"""Exact t-SNE embedding and the median-distance baseline score.

Source and target frames are pooled, embedded jointly into the plane with
the exact O(n^2) algorithm (per-row perplexity calibration, early
exaggeration, momentum gradient descent on KL(P||Q)), and scored by the
Euclidean distance between the coordinate-wise medians of the two domains'
embedded points.  As with the sliced Wasserstein score, larger means harder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .common import TransferScore
from .errors import (
    BandwidthSearchFailed,
    DimensionMismatch,
    EmptyDomain,
    NonFiniteInput,
    TooManyPoints,
)
from .ingest import FeatureMatrix

_P_FLOOR = 1e-12
_ENTROPY_TOL = 1e-5
_MAX_BISECTIONS = 200
_MAX_POINTS = 5000


@dataclass(frozen=True)
class TsneConfig:
    perplexity: float | None = None  # defaults to min(30, (n - 1) / 3)
    out_dim: int = 2
    iters: int = 1000
    learning_rate: float = 200.0
    momentum_early: float = 0.5
    momentum_late: float = 0.8
    momentum_switch: int = 250
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    seed: int = 0

    def __post_init__(self):
        if self.out_dim != 2:
            raise ValueError("only 2-D embeddings are supported")
        if self.perplexity is not None and self.perplexity <= 0:
            raise ValueError("perplexity must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def _as_points(x) -> np.ndarray:
    data = x.data if isinstance(x, FeatureMatrix) else np.asarray(x, dtype=np.float64)
    if data.ndim != 2:
        raise DimensionMismatch(f"expected an n x D matrix, got shape {data.shape}")
    if not np.isfinite(data).all():
        raise NonFiniteInput("points contain NaN or Inf")
    return data


def _squared_distances(x: np.ndarray) -> np.ndarray:
    sq = (x ** 2).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.fill_diagonal(d2, 0.0)
    return np.maximum(d2, 0.0)


def _row_entropy(d: np.ndarray, beta: float) -> tuple[float, np.ndarray]:
    """Shannon entropy (nats) and probabilities of exp(-beta * d) / Z."""
    shifted = d - d.min()
    w = np.exp(-beta * shifted)
    total = w.sum()
    p = w / total
    entropy = math.log(total) + beta * float((p * shifted).sum())
    return entropy, p


def perplexity_calibration(distances_sq, perplexity: float) -> np.ndarray:
    """Per-row bandwidth search until row entropy hits log(perplexity).

    Rows whose target entropy is unreachable because the nearest distances
    are tied (the entropy plateaus at log(#ties) as the bandwidth shrinks)
    are clamped to the limiting uniform distribution over those ties.
    """
    d2 = np.asarray(distances_sq, dtype=np.float64)
    n = d2.shape[0]
    if d2.ndim != 2 or d2.shape[1] != n:
        raise DimensionMismatch(f"need a square distance matrix, got {d2.shape}")
    if (d2 < 0).any() or np.abs(np.diag(d2)).max() > 0:
        raise ValueError("squared distances must be non-negative with a zero diagonal")
    if not np.allclose(d2, d2.T):
        raise ValueError("distance matrix must be symmetric")
    if not 0 < perplexity < n - 1:
        raise ValueError(f"perplexity must lie in (0, {n - 1})")

    target = math.log(perplexity)
    mask = ~np.eye(n, dtype=bool)
    P = np.zeros((n, n))
    for i in range(n):
        d = d2[i][mask[i]]
        dmin = d.min()
        ties = int((d <= dmin + 1e-12 * max(dmin, 1.0)).sum())
        if target < math.log(ties) - 1e-9:
            # beta -> inf limit: uniform over the tied nearest neighbours
            p = np.where(d <= dmin + 1e-12 * max(dmin, 1.0), 1.0 / ties, 0.0)
            P[i][mask[i]] = p
            continue
        beta, lo, hi = 1.0, 0.0, math.inf
        entropy, p = _row_entropy(d, beta)
        for _ in range(_MAX_BISECTIONS):
            if abs(entropy - target) <= _ENTROPY_TOL:
                break
            if entropy > target:  # too flat: sharpen
                lo = beta
                beta = beta * 2.0 if hi == math.inf else 0.5 * (beta + hi)
            else:
                hi = beta
                beta = beta / 2.0 if lo == 0.0 else 0.5 * (beta + lo)
            entropy, p = _row_entropy(d, beta)
        else:
            raise BandwidthSearchFailed(
                f"row {i}: entropy {entropy:.6f} vs target {target:.6f} "
                f"after {_MAX_BISECTIONS} bisections")
        P[i][mask[i]] = p
    return P


def _kl_divergence(P: np.ndarray, Q: np.ndarray, mask: np.ndarray) -> float:
    p = np.maximum(P[mask], _P_FLOOR)
    q = np.maximum(Q[mask], _P_FLOOR)
    return float((p * np.log(p / q)).sum())


def tsne_embed(points, cfg: TsneConfig, return_history: bool = False):
    """Exact t-SNE embedding into the plane.

    Returns the n x 2 embedding; with ``return_history`` also the KL(P||Q)
    trajectory (entry k = divergence after k gradient updates, measured
    against the unexaggerated P).
    """
    x = _as_points(points)
    n = x.shape[0]
    if n < 4:
        raise ValueError("need at least 4 points to embed")
    if n > _MAX_POINTS:
        raise TooManyPoints(f"{n} points exceed the exact-algorithm guard of {_MAX_POINTS}")
    perplexity = cfg.perplexity if cfg.perplexity is not None else min(30.0, (n - 1) / 3.0)
    if not perplexity < n - 1:
        raise ValueError(f"perplexity {perplexity} must be < n - 1 = {n - 1}")

    cond = perplexity_calibration(_squared_distances(x), perplexity)
    P = (cond + cond.T) / (2.0 * n)
    mask = ~np.eye(n, dtype=bool)
    P[mask] = np.maximum(P[mask], _P_FLOOR)

    rng = np.random.default_rng(cfg.seed)
    y = rng.normal(0.0, 1e-4, size=(n, cfg.out_dim))
    update = np.zeros_like(y)
    history = []

    def q_terms(y):
        num = 1.0 / (1.0 + _squared_distances(y))
        np.fill_diagonal(num, 0.0)
        return num, num / num.sum()

    num, Q = q_terms(y)
    history.append(_kl_divergence(P, Q, mask))
    for i in range(cfg.iters):
        exaggerate = i < cfg.exaggeration_iters
        momentum = cfg.momentum_early if i < cfg.momentum_switch else cfg.momentum_late
        P_eff = P * cfg.early_exaggeration if exaggerate else P
        W = (P_eff - Q) * num
        grad = 4.0 * (y * W.sum(axis=1)[:, None] - W @ y)
        update = momentum * update - cfg.learning_rate * grad
        y = y + update
        num, Q = q_terms(y)
        history.append(_kl_divergence(P, Q, mask))

    if return_history:
        return y, np.asarray(history)
    return y


def tsne_score(source_utts, target_utts, cfg: TsneConfig,
               max_points_per_domain: int = 1000,
               return_embedding: bool = False):
    """Distance between the embedded domains' coordinate-wise median points.

    Frames of each domain are pooled (and subsampled to at most
    ``max_points_per_domain`` with the seeded RNG), embedded jointly, and the
    Euclidean distance between the per-domain median embedding coordinates is
    the score.
    """
    src = [_as_points(u) for u in source_utts]
    tgt = [_as_points(u) for u in target_utts]
    if not src or not tgt:
        raise EmptyDomain("both domains need at least one utterance")
    dims = {m.shape[1] for m in src} | {m.shape[1] for m in tgt}
    if len(dims) != 1:
        raise DimensionMismatch(f"feature dimensions differ: {sorted(dims)}")

    pools = []
    for side, utts in enumerate((src, tgt)):
        pool = np.concatenate(utts, axis=0)
        if pool.shape[0] > max_points_per_domain:
            rng = np.random.default_rng([cfg.seed, side])
            idx = rng.choice(pool.shape[0], size=max_points_per_domain, replace=False)
            pool = pool[idx]
        pools.append(pool)

    n_src = pools[0].shape[0]
    joint = np.concatenate(pools, axis=0)
    y = tsne_embed(joint, cfg)
    med_src = np.median(y[:n_src], axis=0)
    med_tgt = np.median(y[n_src:], axis=0)
    score = float(np.linalg.norm(med_src - med_tgt))
    perplexity = cfg.perplexity if cfg.perplexity is not None else min(30.0, (joint.shape[0] - 1) / 3.0)
    result = TransferScore(method="tsne", score=score, seed=cfg.seed,
                           params={"perplexity": float(perplexity),
                                   "n_source": int(n_src),
                                   "n_target": int(pools[1].shape[0]),
                                   "median_rule": "coordinate_wise"})
    if return_embedding:
        return result, y
    return result
