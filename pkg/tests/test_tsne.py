import math

import numpy as np
import pytest

from psmrank import TsneConfig, perplexity_calibration, tsne_embed, tsne_score
from psmrank.errors import EmptyDomain, TooManyPoints


def entropy(row):
    p = row[row > 0]
    return float(-(p * np.log(p)).sum())


class TestCalibration:
    def test_three_equidistant_points(self):
        d2 = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
        P = perplexity_calibration(d2, 1.7)
        for i in range(3):
            off = np.delete(P[i], i)
            np.testing.assert_allclose(off, 0.5)
        assert np.abs(np.diag(P)).max() == 0.0

    def test_entropy_matches_target(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((12, 4))
        sq = ((x[:, None] - x[None]) ** 2).sum(-1)
        perplexity = 3.0
        P = perplexity_calibration(sq, perplexity)
        for i in range(12):
            assert entropy(P[i]) == pytest.approx(math.log(perplexity), abs=1e-5)

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((10, 3))
        sq = ((x[:, None] - x[None]) ** 2).sum(-1)
        P = perplexity_calibration(sq, 3.0)
        np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)

    def test_perplexity_bound(self):
        d2 = np.zeros((4, 4))
        with pytest.raises(ValueError):
            perplexity_calibration(d2, 3.0)  # must be < n - 1

    def test_joint_matrix_properties(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((15, 5))
        sq = ((x[:, None] - x[None]) ** 2).sum(-1)
        cond = perplexity_calibration(sq, 4.0)
        n = 15
        P = (cond + cond.T) / (2 * n)
        assert (P >= 0).all()
        np.testing.assert_allclose(P, P.T)
        assert P.sum() == pytest.approx(1.0, abs=1e-9)


class TestEmbed:
    def test_bit_identical_given_seed(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((25, 6))
        cfg = TsneConfig(perplexity=8.0, seed=11)
        a = tsne_embed(x, cfg)
        b = tsne_embed(x, cfg)
        assert a.tobytes() == b.tobytes()

    def test_two_blob_purity(self):
        rng = np.random.default_rng(4)
        a = rng.standard_normal((20, 10))
        b = rng.standard_normal((20, 10)) + 8.0
        x = np.vstack([a, b])
        y = tsne_embed(x, TsneConfig(seed=5))
        labels = np.array([0] * 20 + [1] * 20)
        centroids = np.stack([y[labels == k].mean(axis=0) for k in (0, 1)])
        dist = ((y[:, None] - centroids[None]) ** 2).sum(-1)
        assert (dist.argmin(axis=1) == labels).all()

    def test_kl_tracks_downward_after_exaggeration(self):
        rng = np.random.default_rng(5)
        x = np.vstack([rng.standard_normal((15, 4)),
                       rng.standard_normal((15, 4)) + 4.0])
        cfg = TsneConfig(seed=6)
        _, history = tsne_embed(x, cfg, return_history=True)
        assert len(history) == cfg.iters + 1
        assert history[cfg.iters] <= history[cfg.exaggeration_iters] + 1e-9

    def test_too_many_points(self):
        with pytest.raises(TooManyPoints):
            tsne_embed(np.zeros((5001, 2)), TsneConfig())

    def test_minimum_points(self):
        with pytest.raises(ValueError):
            tsne_embed(np.zeros((3, 2)), TsneConfig())


class TestScore:
    def test_identity_domain_small_relative_to_spread(self):
        rng = np.random.default_rng(6)
        cloud = rng.standard_normal((40, 5))
        src = [cloud[:20], cloud[20:]]
        tgt = [cloud[:20].copy(), cloud[20:].copy()]
        ts, y = tsne_score(src, tgt, TsneConfig(seed=3), return_embedding=True)
        spread = float(np.linalg.norm(y.max(axis=0) - y.min(axis=0)))
        assert ts.score < 0.10 * spread

    def test_disjoint_domains_far_apart(self):
        rng = np.random.default_rng(7)
        src = [rng.standard_normal((40, 5))]
        tgt = [rng.standard_normal((40, 5)) + 40.0]
        ts, y = tsne_score(src, tgt, TsneConfig(seed=3), return_embedding=True)
        spread = float(np.linalg.norm(y.max(axis=0) - y.min(axis=0)))
        assert ts.score > 0.5 * spread

    def test_subsampling_cap(self):
        rng = np.random.default_rng(8)
        src = [rng.standard_normal((300, 3))]
        tgt = [rng.standard_normal((300, 3))]
        ts = tsne_score(src, tgt, TsneConfig(seed=1), max_points_per_domain=50)
        assert ts.params["n_source"] == 50
        assert ts.params["n_target"] == 50

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        src = [rng.standard_normal((30, 3))]
        tgt = [rng.standard_normal((30, 3)) + 1.0]
        cfg = TsneConfig(seed=2)
        assert tsne_score(src, tgt, cfg).score == tsne_score(src, tgt, cfg).score

    def test_empty_domain(self):
        with pytest.raises(EmptyDomain):
            tsne_score([], [np.zeros((5, 2))], TsneConfig())
