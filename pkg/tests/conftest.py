import json

import numpy as np
import pytest

from psmrank import PosteriorGrid, write_array


def random_grid(rng, frames, vocab_size):
    """Row-normalized random log-posterior grid."""
    raw = rng.standard_normal((frames, vocab_size + 1))
    lp = raw - np.log(np.exp(raw).sum(axis=1, keepdims=True))
    return PosteriorGrid(lp)


def log_sum_exp(values):
    values = np.asarray(values, dtype=np.float64)
    m = values.max()
    if m == -np.inf:
        return -np.inf
    return float(m + np.log(np.exp(values - m).sum()))


@pytest.fixture
def grid_factory():
    return random_grid


def write_classification_tree(root, rng, n_candidates=3, n_utts=40, dim=6,
                              n_classes=3, separations=None):
    """Synthetic classification manifest: one feature row per utterance.

    Candidate j's class centroids are scaled by separations[j]; shared noise
    across candidates so higher separation always means cleaner features.
    """
    separations = separations or [0.5 + j for j in range(n_candidates)]
    labels = rng.integers(0, n_classes, size=n_utts)
    noise = rng.standard_normal((n_utts, dim))
    centroids = rng.standard_normal((n_classes, dim))
    centroids /= np.linalg.norm(centroids, axis=1, keepdims=True)

    labels_path = root / "labels.jsonl"
    with open(labels_path, "w") as fh:
        for i, lab in enumerate(labels):
            fh.write(json.dumps({"utt_id": f"utt{i:03d}", "labels": [int(lab)]}) + "\n")

    candidates = []
    for j, sep in enumerate(separations):
        feats = noise + sep * centroids[labels]
        fpath = root / f"cand{j}.npy"
        write_array(fpath, feats)
        candidates.append({
            "id": f"cand{j}",
            "features": fpath.name,
            "labels": labels_path.name,
            "ground_truth_metric": float(len(separations) - j),  # lower = better layer
            "metric_direction": "lower_better",
        })

    manifest = {"task_kind": "classification", "candidates": candidates}
    mpath = root / "manifest.json"
    mpath.write_text(json.dumps(manifest, indent=2))
    return mpath
