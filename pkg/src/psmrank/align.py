"""CTC forced alignment of a label sequence against a posterior grid.

The aligner runs the classic best-path dynamic program over the
blank-interleaved extended label sequence and recovers the frame-level
assignment by backtracking.  A collapse-simulation brute-force enumerator and
a log-space forward pass (sum over all alignments) are provided alongside;
the enumerator is the test oracle for both.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AllPathsImpossible,
    EmptyLabels,
    EnumerationTooLarge,
    InfeasibleLength,
)
from .ingest import FeatureMatrix, PosteriorGrid

_BRUTE_FORCE_MAX_FRAMES = 12
_BRUTE_FORCE_MAX_LABELS = 4


@dataclass(frozen=True)
class FrameAlignment:
    """Frame-level label assignment for one utterance.

    ``assigned[t]`` is the symbol emitted at frame t (``blank`` for none),
    ``state_path[t]`` the index into the extended label sequence, and
    ``path_log_prob`` the summed log-probability of the chosen path.
    """

    assigned: tuple[int, ...]
    path_log_prob: float
    state_path: tuple[int, ...]
    blank: int


def extend_labels(labels, vocab_size: int) -> np.ndarray:
    """Interleave blanks: [y1, y2, ...] -> [blank, y1, blank, y2, ..., blank]."""
    labels = list(labels)
    if not labels:
        raise EmptyLabels("cannot align an empty label sequence")
    if any(not 0 <= lab < vocab_size for lab in labels):
        raise ValueError(f"labels must lie in [0, {vocab_size})")
    blank = vocab_size
    ext = np.full(2 * len(labels) + 1, blank, dtype=np.int64)
    ext[1::2] = labels
    return ext


def _min_frames(labels) -> int:
    labels = list(labels)
    repeats = sum(1 for a, b in zip(labels, labels[1:]) if a == b)
    return len(labels) + repeats


def _check_grid(grid: PosteriorGrid, labels) -> tuple[np.ndarray, int]:
    labels = list(labels)
    if not labels:
        raise EmptyLabels("cannot align an empty label sequence")
    blank = grid.blank
    if any(not 0 <= lab < blank for lab in labels):
        raise ValueError(f"labels must lie in [0, {blank})")
    if grid.frames < _min_frames(labels):
        raise InfeasibleLength(
            f"{grid.frames} frames cannot emit {len(labels)} labels "
            f"(minimum {_min_frames(labels)})")
    return grid.log_probs, blank


def viterbi_align(grid: PosteriorGrid, labels) -> FrameAlignment:
    """Maximum-log-probability CTC alignment with backtracking.

    Ties in the max break toward the smallest step: stay, then advance by
    one state, then skip a blank.
    """
    labels = list(labels)
    lp, blank = _check_grid(grid, labels)
    ext = extend_labels(labels, blank)
    T, S = grid.frames, len(ext)

    delta = np.full((T, S), -np.inf)
    back = np.zeros((T, S), dtype=np.int64)
    delta[0, 0] = lp[0, ext[0]]
    delta[0, 1] = lp[0, ext[1]]
    # skip from s-2 is legal only onto a non-blank that differs from ext[s-2]
    skip_ok = np.zeros(S, dtype=bool)
    skip_ok[3::2] = ext[3::2] != ext[1:-2:2]

    for t in range(1, T):
        prev = delta[t - 1]
        cand = np.full((S, 3), -np.inf)
        cand[:, 0] = prev
        cand[1:, 1] = prev[:-1]
        cand[2:, 2] = np.where(skip_ok[2:], prev[:-2], -np.inf)
        choice = np.argmax(cand, axis=1)  # first max wins: stay > advance-1 > advance-2
        best = cand[np.arange(S), choice]
        delta[t] = best + lp[t, ext]
        back[t] = np.arange(S) - choice

    end = 2 * len(labels)
    last = end if delta[T - 1, end] >= delta[T - 1, end - 1] else end - 1
    score = delta[T - 1, last]
    if score == -np.inf:
        raise AllPathsImpossible("every valid alignment has zero probability")

    states = np.empty(T, dtype=np.int64)
    states[T - 1] = last
    for t in range(T - 1, 0, -1):
        states[t - 1] = back[t, states[t]]
    assigned = ext[states]
    return FrameAlignment(assigned=tuple(int(a) for a in assigned),
                          path_log_prob=float(score),
                          state_path=tuple(int(s) for s in states),
                          blank=blank)


def enumerate_alignments(grid: PosteriorGrid, labels):
    """Yield every (assigned, state_path, log_prob) collapsing to ``labels``.

    Enumerates symbol sequences directly by simulating the collapse rule
    (merge runs, drop blanks); independent of the Viterbi recursion.  Guarded
    to small instances.
    """
    labels = list(labels)
    lp, blank = _check_grid(grid, labels)
    T, L = grid.frames, len(labels)
    if T > _BRUTE_FORCE_MAX_FRAMES or L > _BRUTE_FORCE_MAX_LABELS:
        raise EnumerationTooLarge(
            f"enumeration guard: T <= {_BRUTE_FORCE_MAX_FRAMES}, L <= {_BRUTE_FORCE_MAX_LABELS}")

    symbols = list(range(blank + 1))
    seq = np.empty(T, dtype=np.int64)
    states = np.empty(T, dtype=np.int64)

    def rec(t, pos, last, acc):
        if t == T:
            if pos == L:
                yield tuple(int(s) for s in seq), tuple(int(s) for s in states), acc
            return
        if L - pos > T - t:  # cannot emit the remaining labels
            return
        for c in symbols:
            if c == blank:
                new_pos = pos
            elif c == last:
                new_pos = pos  # merged repeat
            else:
                if pos == L or labels[pos] != c:
                    continue
                new_pos = pos + 1
            seq[t] = c
            states[t] = 2 * new_pos if c == blank else 2 * new_pos - 1
            yield from rec(t + 1, new_pos, c, acc + lp[t, c])

    yield from rec(0, 0, blank, 0.0)


def brute_force_align(grid: PosteriorGrid, labels) -> FrameAlignment:
    """Exhaustive-maximum oracle over all valid alignments (guarded)."""
    best = None
    for assigned, states, logp in enumerate_alignments(grid, labels):
        if best is None or logp > best[2]:
            best = (assigned, states, logp)
    if best is None or best[2] == -np.inf:
        raise AllPathsImpossible("every valid alignment has zero probability")
    return FrameAlignment(assigned=best[0], path_log_prob=float(best[2]),
                          state_path=best[1], blank=grid.blank)


def ctc_total_log_prob(grid: PosteriorGrid, labels) -> float:
    """Log of the summed probability over all valid alignments (forward pass)."""
    labels = list(labels)
    lp, blank = _check_grid(grid, labels)
    ext = extend_labels(labels, blank)
    T, S = grid.frames, len(ext)

    skip_ok = np.zeros(S, dtype=bool)
    skip_ok[3::2] = ext[3::2] != ext[1:-2:2]

    alpha = np.full(S, -np.inf)
    alpha[0] = lp[0, ext[0]]
    alpha[1] = lp[0, ext[1]]
    for t in range(1, T):
        cand = np.full((S, 3), -np.inf)
        cand[:, 0] = alpha
        cand[1:, 1] = alpha[:-1]
        cand[2:, 2] = np.where(skip_ok[2:], alpha[:-2], -np.inf)
        m = cand.max(axis=1)
        ok = m > -np.inf
        merged = np.full(S, -np.inf)
        with np.errstate(invalid="ignore"):
            merged[ok] = m[ok] + np.log(np.exp(cand[ok] - m[ok, None]).sum(axis=1))
        alpha = merged + lp[t, ext]
        alpha[~ok] = -np.inf

    tail = alpha[[S - 1, S - 2]]
    m = tail.max()
    if m == -np.inf:
        raise AllPathsImpossible("every valid alignment has zero probability")
    return float(m + np.log(np.exp(tail - m).sum()))


def frames_to_samples(features, alignments) -> tuple[np.ndarray, np.ndarray]:
    """Stack (frame feature, assigned label) pairs for all non-blank frames.

    Returns a (kept x D) matrix and a label vector, in utterance order then
    frame order.  The result may be empty; callers decide whether that is an
    error.
    """
    if len(features) != len(alignments):
        raise ValueError("features and alignments must pair one-to-one")
    rows, labs = [], []
    for feat, ali in zip(features, alignments):
        data = feat.data if isinstance(feat, FeatureMatrix) else np.asarray(feat, dtype=np.float64)
        if data.shape[0] != len(ali.assigned):
            raise ValueError(
                f"alignment covers {len(ali.assigned)} frames, features have {data.shape[0]}")
        assigned = np.asarray(ali.assigned)
        keep = assigned != ali.blank
        rows.append(data[keep])
        labs.append(assigned[keep])
    stacked = np.concatenate(rows, axis=0) if rows else np.empty((0, 0))
    labels = np.concatenate(labs) if labs else np.empty(0, dtype=np.int64)
    return stacked, labels.astype(np.int64)
