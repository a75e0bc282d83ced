"""Bayesian evidence maximization scores.

A linear model with isotropic Gaussian prior (precision alpha) and Gaussian
observation noise (precision beta) has a closed-form log marginal likelihood.
Both precisions are tuned by the standard fixed-point iteration, accelerated
by a single SVD of the feature matrix shared across all targets.  The mean
per-class maximum log-evidence divided by the sample count is the
transferability score; the CTC variant pools non-blank aligned frames first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .align import FrameAlignment, frames_to_samples
from .errors import DegenerateShape, EmptyAlignedSet, NoEvaluableClass, NonFiniteInput
from .ingest import FeatureMatrix

_LOG_2PI = math.log(2.0 * math.pi)
_PRECISION_CAP = 1e12
_RESIDUAL_FLOOR = 1e-12

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 200


@dataclass(frozen=True)
class EvidenceState:
    """Converged (or capped) hyperparameters and posterior summary."""

    alpha: float
    beta: float
    m: np.ndarray
    gamma: float
    log_evidence: float
    iterations: int
    converged: bool
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class LogMEScore:
    """Mean per-class maximum log-evidence over the sample count."""

    score: float
    per_class: tuple[float, ...]
    n_samples: int
    n_classes: int
    iterations: tuple[int, ...]
    flags: tuple[str, ...] = ()
    skipped_classes: tuple[int, ...] = ()


def _as_matrix(F) -> np.ndarray:
    data = F.data if isinstance(F, FeatureMatrix) else np.asarray(F, dtype=np.float64)
    if data.ndim != 2:
        raise DegenerateShape(f"feature matrix must be 2-D, got shape {data.shape}")
    return data


def _validate(F: np.ndarray, y: np.ndarray):
    if not np.isfinite(F).all() or not np.isfinite(y).all():
        raise NonFiniteInput("evidence inputs contain NaN or Inf")
    n, d = F.shape
    if n < 2 or d < 1:
        raise DegenerateShape(f"need n >= 2 and D >= 1, got {n} x {d}")
    if y.shape != (n,):
        raise DegenerateShape(f"target length {y.shape} does not match n = {n}")


def _log_evidence_terms(alpha, beta, s, z, y_norm2, n, d):
    """Evidence pieces at (alpha, beta) from the SVD cache.

    s: singular values (length min(n, D)); z: target projected on the left
    singular vectors; y_norm2: squared target norm.
    """
    s2 = s ** 2
    h = beta * s2 / (alpha + beta * s2)
    gamma = float(h.sum())
    coef = beta * s * z / (alpha + beta * s2)  # posterior mean in the V basis
    m_norm2 = float((coef ** 2).sum())
    rss = float(max(y_norm2 - (z ** 2).sum(), 0.0) + (((1.0 - h) * z) ** 2).sum())
    logdet = float(np.log(alpha + beta * s2).sum() + (d - len(s)) * math.log(alpha))
    log_ev = (0.5 * n * math.log(beta) + 0.5 * d * math.log(alpha)
              - 0.5 * n * _LOG_2PI - 0.5 * beta * rss - 0.5 * alpha * m_norm2
              - 0.5 * logdet)
    return log_ev, gamma, coef, m_norm2, rss


def evidence(F, y, alpha: float, beta: float) -> float:
    """Log marginal likelihood of targets under fixed precisions.

    log p(y|F, alpha, beta) = n/2 log beta + D/2 log alpha - n/2 log 2pi
    - beta/2 ||y - F m||^2 - alpha/2 m^T m - 1/2 sum_i log(alpha + beta s_i^2)
    with m the posterior mean weights and s_i the singular values of F
    (zero-padded up to D).
    """
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")
    F = _as_matrix(F)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    _validate(F, y)
    u, s, _ = np.linalg.svd(F, full_matrices=False)
    log_ev, _, _, _, _ = _log_evidence_terms(alpha, beta, s, u.T @ y, float(y @ y),
                                             F.shape[0], F.shape[1])
    return float(log_ev)


def _maximize_from_svd(s, z, y_norm2, n, d, tol, max_iter):
    alpha, beta = 1.0, 1.0
    flags = []
    prev = None
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        log_ev, gamma, coef, m_norm2, rss = _log_evidence_terms(
            alpha, beta, s, z, y_norm2, n, d)
        if prev is not None and abs(log_ev - prev) < tol:
            converged = True
            break
        prev = log_ev
        if rss < _RESIDUAL_FLOOR:
            # target exactly linear in F: noise precision diverges
            beta = _PRECISION_CAP
            flags.append("zero_residual")
            break
        if m_norm2 < _RESIDUAL_FLOOR:
            alpha = _PRECISION_CAP
            flags.append("alpha_capped")
        else:
            alpha = gamma / m_norm2
        beta = (n - gamma) / rss
        if not math.isfinite(beta) or beta <= 0:
            beta = _PRECISION_CAP
            flags.append("beta_capped")
    else:
        flags.append("no_convergence")
    log_ev, gamma, coef, m_norm2, rss = _log_evidence_terms(
        alpha, beta, s, z, y_norm2, n, d)
    return alpha, beta, coef, gamma, log_ev, it, converged, tuple(flags)


def maximize_evidence(F, y, tol: float = DEFAULT_TOL,
                      max_iter: int = DEFAULT_MAX_ITER) -> EvidenceState:
    """Tune (alpha, beta) by fixed-point iteration from alpha = beta = 1.

    Each sweep recomputes the effective dimensionality
    gamma = sum beta s^2 / (alpha + beta s^2) and the posterior mean, then
    sets alpha = gamma / ||m||^2 and beta = (n - gamma) / ||y - F m||^2,
    stopping when the log-evidence moves less than ``tol``.
    """
    F = _as_matrix(F)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    _validate(F, y)
    if not F.any():
        raise DegenerateShape("feature matrix is all-zero")
    u, s, vt = np.linalg.svd(F, full_matrices=False)
    alpha, beta, coef, gamma, log_ev, it, converged, flags = _maximize_from_svd(
        s, u.T @ y, float(y @ y), F.shape[0], F.shape[1], tol, max_iter)
    m = vt.T @ coef
    return EvidenceState(alpha=float(alpha), beta=float(beta), m=m,
                         gamma=float(gamma), log_evidence=float(log_ev),
                         iterations=it, converged=converged, flags=flags)


def logme_classification(F, labels, vocab_size: int, tol: float = DEFAULT_TOL,
                         max_iter: int = DEFAULT_MAX_ITER) -> LogMEScore:
    """One-vs-rest LogME: mean over classes of the maximum evidence, over n.

    Classes that are absent, or that cover all samples (constant one-hot
    target), are skipped and reported in ``skipped_classes``.
    """
    F = _as_matrix(F)
    labels = np.asarray(labels).reshape(-1)
    if labels.shape[0] != F.shape[0]:
        raise DegenerateShape("one label per feature row required")
    if labels.size and (labels.min() < 0 or labels.max() >= vocab_size):
        raise ValueError(f"labels must lie in [0, {vocab_size})")
    _validate(F, labels.astype(np.float64))
    if not F.any():
        raise DegenerateShape("feature matrix is all-zero")

    n, d = F.shape
    u, s, _ = np.linalg.svd(F, full_matrices=False)

    per_class, iterations, flags, skipped = [], [], [], []
    for k in range(vocab_size):
        y = (labels == k).astype(np.float64)
        pos = int(y.sum())
        if pos == 0 or pos == n:
            skipped.append(k)
            continue
        alpha, beta, coef, gamma, log_ev, it, converged, cls_flags = _maximize_from_svd(
            s, u.T @ y, float(y @ y), n, d, tol, max_iter)
        per_class.append(float(log_ev))
        iterations.append(it)
        flags.extend(f"class{k}:{f}" for f in cls_flags)
    if not per_class:
        raise NoEvaluableClass("every one-vs-rest target is constant")

    score = float(np.mean(per_class) / n)
    return LogMEScore(score=score, per_class=tuple(per_class), n_samples=n,
                      n_classes=len(per_class), iterations=tuple(iterations),
                      flags=tuple(flags), skipped_classes=tuple(skipped))


def logme_ctc(features, alignments: list[FrameAlignment], vocab_size: int,
              tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> LogMEScore:
    """LogME over forced-alignment frame pools.

    Non-blank (frame feature, aligned label) pairs from all utterances form
    the sample set; ``n`` in the final division is the pooled frame count.
    """
    pooled, pooled_labels = frames_to_samples(features, alignments)
    if pooled.shape[0] == 0:
        raise EmptyAlignedSet("alignment assigned every frame to blank")
    return logme_classification(pooled, pooled_labels, vocab_size,
                                tol=tol, max_iter=max_iter)
