"""t-SNE median-distance baseline.

Pools source and target frames, embeds them jointly into the plane, and
measures the distance between the two domains' median embedding points.
"""

import numpy as np

from psmrank import TsneConfig, tsne_score

rng = np.random.default_rng(4)

base = rng.standard_normal((120, 10))
cfg = TsneConfig(seed=5)

print("domain shift -> tsne median-distance score")
for shift in (0.0, 4.0, 20.0):
    target = rng.standard_normal((120, 10)) + shift
    result, embedding = tsne_score([base], [target], cfg, return_embedding=True)
    spread = float(np.linalg.norm(embedding.max(axis=0) - embedding.min(axis=0)))
    print(f"  shift {shift:5.1f} -> score {result.score:8.3f}   "
          f"({100 * result.score / spread:5.1f}% of the embedding spread)")
