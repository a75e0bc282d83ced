"""Full pipeline: synthetic layer benchmark scored and ranked end to end.

Writes NPY features, a label sidecar and a manifest for six candidate
"layers" of increasing quality, scores them through the CLI, and correlates
the induced ranking against the known ground truth.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from psmrank import write_array
from psmrank.cli import main

SEPARATIONS = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)
VOCAB, N, DIM = 5, 80, 16

rng = np.random.default_rng(6)
labels = rng.integers(0, VOCAB, size=N)
noise = rng.standard_normal((N, DIM))
centroids = rng.standard_normal((VOCAB, DIM))
centroids /= np.linalg.norm(centroids, axis=1, keepdims=True)

with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp)
    with open(root / "labels.jsonl", "w") as fh:
        for i, lab in enumerate(labels):
            fh.write(json.dumps({"utt_id": f"utt{i:03d}", "labels": [int(lab)]}) + "\n")

    candidates = []
    ground_truth = {}
    for j, sep in enumerate(SEPARATIONS):
        write_array(root / f"layer{j}.npy", noise + sep * centroids[labels])
        candidates.append({"id": f"layer{j}", "features": f"layer{j}.npy",
                           "labels": "labels.jsonl"})
        # pretend fine-tuning error falls with separation (lower = better)
        ground_truth[f"layer{j}"] = float(len(SEPARATIONS) - j)

    (root / "manifest.json").write_text(json.dumps(
        {"task_kind": "classification", "candidates": candidates}))
    (root / "gt.json").write_text(json.dumps(ground_truth))

    assert main(["score", "--manifest", str(root / "manifest.json"),
                 "--method", "logme", "--output", str(root / "scores.json"),
                 "--seed", "42"]) == 0
    print()
    assert main(["rank", str(root / "scores.json"),
                 "--ground-truth", str(root / "gt.json"),
                 "--direction", "lower_better",
                 "--output", str(root / "report.json")]) == 0
