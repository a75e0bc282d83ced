"""Rankings, Spearman rank correlation, and the benchmark report.

Scores are turned into ranks (1 = predicted best transfer), correlated
against ground-truth fine-tuning ranks with Spearman's rho, and the
two-sided p-value comes from the t approximation with the regularized
incomplete beta function evaluated by continued fraction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CandidateSetMismatch,
    DomainError,
    EnumerationTooLarge,
    LengthMismatch,
    MixedSeeds,
    NonFiniteInput,
    TooFewPoints,
)

# orientation of each scoring method: does a larger score predict better transfer?
HIGHER_IS_BETTER = {"logme": True, "swd": False, "tsne": False}


@dataclass(frozen=True)
class RankVector:
    ranks: np.ndarray
    source: str  # from_metric_lower_better | from_metric_higher_better | from_score


@dataclass(frozen=True)
class CorrelationResult:
    rho: float
    p_value: float
    n: int
    method: str = "spearman"


@dataclass(frozen=True)
class RankingReport:
    candidates: tuple[str, ...]
    ground_truth: tuple[float, ...]
    ground_truth_ranks: tuple[float, ...]
    methods: tuple[str, ...]
    scores: dict = field(default_factory=dict)        # method -> tuple of scores
    ranks: dict = field(default_factory=dict)         # method -> tuple of ranks
    correlations: dict = field(default_factory=dict)  # method -> CorrelationResult
    seeds: dict = field(default_factory=dict)         # method -> seed or None

    def to_json(self) -> dict:
        return {
            "candidates": list(self.candidates),
            "ground_truth": list(self.ground_truth),
            "ground_truth_ranks": list(self.ground_truth_ranks),
            "methods": {
                m: {
                    "scores": list(self.scores[m]),
                    "ranks": list(self.ranks[m]),
                    "rho": self.correlations[m].rho,
                    "p_value": self.correlations[m].p_value,
                    "seed": self.seeds.get(m),
                }
                for m in self.methods
            },
        }

    def format_table(self) -> str:
        headers = ["candidate", "metric", "rank_ft"] + [f"rank_{m}" for m in self.methods]
        rows = []
        for i, cid in enumerate(self.candidates):
            row = [cid, f"{self.ground_truth[i]:.4g}", _fmt_rank(self.ground_truth_ranks[i])]
            row += [_fmt_rank(self.ranks[m][i]) for m in self.methods]
            rows.append(row)
        rows.append(["spearman rho", "", ""] +
                    [f"{self.correlations[m].rho:.4f}" for m in self.methods])
        rows.append(["p-value", "", ""] +
                    [f"{self.correlations[m].p_value:.2e}" for m in self.methods])
        widths = [max(len(r[c]) for r in [headers] + rows) for c in range(len(headers))]
        lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
        lines.append("  ".join("-" * w for w in widths))
        lines += ["  ".join(x.ljust(w) for x, w in zip(r, widths)) for r in rows]
        return "\n".join(lines)


def _fmt_rank(r: float) -> str:
    return str(int(r)) if float(r).is_integer() else f"{r:.1f}"


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ascending ranks starting at 1; tied values share the average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    sv = values[order]
    while i < len(values):
        j = i
        while j + 1 < len(values) and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def to_ranks(values, direction: str) -> RankVector:
    """Rank a metric column: rank 1 is the best value under ``direction``."""
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if not np.isfinite(values).all():
        raise NonFiniteInput("cannot rank non-finite values")
    if direction == "lower_better":
        ranks = _average_ranks(values)
        source = "from_metric_lower_better"
    elif direction == "higher_better":
        ranks = _average_ranks(-values)
        source = "from_metric_higher_better"
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return RankVector(ranks=ranks, source=source)


def _coerce_ranks(x) -> np.ndarray:
    if isinstance(x, RankVector):
        return np.asarray(x.ranks, dtype=np.float64)
    values = np.asarray(x, dtype=np.float64).reshape(-1)
    if not np.isfinite(values).all():
        raise NonFiniteInput("cannot rank non-finite values")
    return _average_ranks(values)


def spearman(a, b) -> CorrelationResult:
    """Spearman's rho with a two-sided t-approximation p-value.

    Without ties rho reduces to 1 - 6 sum(d^2) / (n (n^2 - 1)); with ties the
    Pearson correlation of the rank vectors is used.  rho = +/-1 maps to
    p = 0 by convention.
    """
    ra = _coerce_ranks(a)
    rb = _coerce_ranks(b)
    if ra.shape != rb.shape:
        raise LengthMismatch(f"rank vectors of length {ra.size} and {rb.size}")
    n = ra.size
    if n < 3:
        raise TooFewPoints("need at least 3 paired observations")

    def has_ties(r):
        return np.unique(r).size != r.size

    if has_ties(ra) or has_ties(rb):
        da = ra - ra.mean()
        db = rb - rb.mean()
        denom = math.sqrt(float((da ** 2).sum() * (db ** 2).sum()))
        if denom == 0.0:
            raise TooFewPoints("a rank vector is constant; rho undefined")
        rho = float((da * db).sum() / denom)
    else:
        d = ra - rb
        rho = 1.0 - 6.0 * float((d ** 2).sum()) / (n * (n ** 2 - 1))
    rho = min(1.0, max(-1.0, rho))

    if abs(rho) >= 1.0 - 1e-15:
        p = 0.0
    else:
        df = n - 2
        t2 = rho * rho * df / (1.0 - rho * rho)
        x = df / (df + t2)
        p = incomplete_beta(x, df / 2.0, 0.5)
    return CorrelationResult(rho=rho, p_value=min(1.0, max(0.0, p)), n=n)


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    raise DomainError(f"incomplete beta continued fraction failed for a={a}, b={b}, x={x}")


def incomplete_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta I_x(a, b), absolute error below 1e-10.

    Uses the continued fraction directly for x below the symmetry point
    (a + 1) / (a + b + 2) and the reflection I_x(a,b) = 1 - I_{1-x}(b,a)
    above it.
    """
    if not (0.0 <= x <= 1.0) or a <= 0.0 or b <= 0.0:
        raise DomainError(f"invalid arguments x={x}, a={a}, b={b}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def exact_permutation_p(a, b) -> float:
    """Two-sided permutation-test p-value for Spearman's rho (n <= 8)."""
    ra = _coerce_ranks(a)
    rb = _coerce_ranks(b)
    if ra.shape != rb.shape:
        raise LengthMismatch(f"rank vectors of length {ra.size} and {rb.size}")
    n = ra.size
    if n > 8:
        raise EnumerationTooLarge("permutation test guarded to n <= 8")
    if n < 3:
        raise TooFewPoints("need at least 3 paired observations")

    da = ra - ra.mean()
    db = rb - rb.mean()
    denom = math.sqrt(float((da ** 2).sum() * (db ** 2).sum()))
    if denom == 0.0:
        raise TooFewPoints("a rank vector is constant; rho undefined")
    observed = abs(float((da * db).sum()) / denom)
    perms = np.array(list(itertools.permutations(range(n))))
    rhos = (db[perms] @ da) / denom
    return float((np.abs(rhos) >= observed - 1e-12).mean())


def build_report(scores_by_method: dict, ground_truth: dict,
                 direction: str = "lower_better") -> RankingReport:
    """Correlate per-method score records against a ground-truth metric.

    ``scores_by_method`` maps a method name to its score records (dicts with
    ``candidate_id``, ``score`` and optionally ``seed``).  Every method must
    cover exactly the ground-truth candidate set, and stochastic methods must
    not mix seeds within a column.  Each method is oriented so that rank 1
    means predicted-best before correlating.
    """
    if not scores_by_method:
        raise CandidateSetMismatch("no score columns supplied")
    methods = tuple(sorted(scores_by_method))
    first = scores_by_method[methods[0]]
    candidates = tuple(rec["candidate_id"] for rec in first)
    expected = set(ground_truth)
    if len(set(candidates)) != len(candidates):
        raise CandidateSetMismatch("duplicate candidate in score records")
    if set(candidates) != expected:
        raise CandidateSetMismatch(
            f"score candidates {sorted(candidates)} != ground truth {sorted(expected)}")

    gt_values = tuple(float(ground_truth[c]) for c in candidates)
    gt_ranks = to_ranks(gt_values, direction)

    scores, ranks, correlations, seeds = {}, {}, {}, {}
    for method in methods:
        records = {rec["candidate_id"]: rec for rec in scores_by_method[method]}
        if set(records) != expected:
            raise CandidateSetMismatch(
                f"method {method!r} covers {sorted(records)} != {sorted(expected)}")
        rec_seeds = {rec.get("seed") for rec in records.values() if rec.get("seed") is not None}
        if len(rec_seeds) > 1:
            raise MixedSeeds(f"method {method!r} mixes seeds {sorted(rec_seeds)}")
        col = tuple(float(records[c]["score"]) for c in candidates)
        orientation = "higher_better" if HIGHER_IS_BETTER.get(method, True) else "lower_better"
        rv = to_ranks(col, orientation)
        scores[method] = col
        ranks[method] = tuple(rv.ranks.tolist())
        correlations[method] = spearman(gt_ranks, rv)
        seeds[method] = rec_seeds.pop() if rec_seeds else None

    return RankingReport(candidates=candidates, ground_truth=gt_values,
                         ground_truth_ranks=tuple(gt_ranks.ranks.tolist()),
                         methods=methods, scores=scores, ranks=ranks,
                         correlations=correlations, seeds=seeds)
