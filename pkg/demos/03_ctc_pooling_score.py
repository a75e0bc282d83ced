"""Sequence-task scoring: forced alignment feeding the evidence score.

Utterance frames have no per-frame labels; the aligner assigns them from the
label sequences and posterior grids, blank frames are dropped, and the pooled
(frame, label) pairs are scored like a classification problem.
"""

import numpy as np

from psmrank import PosteriorGrid, logme_ctc, viterbi_align

VOCAB = 4
DIM = 12
rng = np.random.default_rng(2)

centroids = rng.standard_normal((VOCAB, DIM))
centroids /= np.linalg.norm(centroids, axis=1, keepdims=True)


def make_utterance(frames, labels, separation):
    positions = np.linspace(1, frames - 2, len(labels)).astype(int)
    symbols = np.full(frames, VOCAB)
    symbols[positions] = labels
    probs = np.full((frames, VOCAB + 1), 0.1 / VOCAB)
    probs[np.arange(frames), symbols] = 0.9
    probs /= probs.sum(axis=1, keepdims=True)
    grid = PosteriorGrid(np.log(probs))
    means = np.array([centroids[s] if s != VOCAB else np.zeros(DIM) for s in symbols])
    feats = rng.standard_normal((frames, DIM)) + separation * means
    return feats, grid, labels


for separation in (0.25, 1.0, 4.0):
    features, grids, alignments = [], [], []
    for _ in range(25):
        labels = rng.integers(0, VOCAB, size=int(rng.integers(2, 5))).tolist()
        feats, grid, labels = make_utterance(14, labels, separation)
        features.append(feats)
        alignments.append(viterbi_align(grid, labels))
    score = logme_ctc(features, alignments, VOCAB)
    print(f"separation {separation:5.2f}: logme-ctc score {score.score:+.4f} "
          f"over {score.n_samples} pooled frames")
