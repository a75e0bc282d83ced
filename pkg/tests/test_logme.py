import math

import numpy as np
import pytest
from scipy import integrate

from psmrank import (
    evidence,
    logme_classification,
    logme_ctc,
    maximize_evidence,
    viterbi_align,
)
from psmrank.errors import DegenerateShape, EmptyAlignedSet, NoEvaluableClass, NonFiniteInput

from test_align import peaked_grid


def dense_evidence(F, y, alpha, beta):
    """Dense-path oracle: explicit A, solve, and log-determinant (no SVD)."""
    n, d = F.shape
    A = alpha * np.eye(d) + beta * (F.T @ F)
    m = beta * np.linalg.solve(A, F.T @ y)
    rss = float(((y - F @ m) ** 2).sum())
    sign, logdet = np.linalg.slogdet(A)
    assert sign > 0
    return (0.5 * n * math.log(beta) + 0.5 * d * math.log(alpha)
            - 0.5 * n * math.log(2 * math.pi)
            - 0.5 * beta * rss - 0.5 * alpha * float(m @ m) - 0.5 * logdet)


class TestEvidence:
    def test_one_dimensional_analytic(self):
        # F = [1, 1]^T, y = 0, alpha = beta = 1: the weight integral is
        # int N(w; 0, 1) N(0; w, 1)^2 dw = (2 pi)^(-1) 3^(-1/2)
        got = evidence(np.ones((2, 1)), np.zeros(2), 1.0, 1.0)
        want = -math.log(2 * math.pi) - 0.5 * math.log(3.0)
        assert got == pytest.approx(want, abs=1e-10)

    def test_one_dimensional_quadrature(self):
        def integrand(w):
            prior = math.exp(-0.5 * w * w) / math.sqrt(2 * math.pi)
            lik = (math.exp(-0.5 * w * w) / math.sqrt(2 * math.pi)) ** 2
            return prior * lik

        val, err = integrate.quad(integrand, -12, 12)
        assert err < 1e-9
        got = evidence(np.ones((2, 1)), np.zeros(2), 1.0, 1.0)
        assert got == pytest.approx(math.log(val), abs=1e-8)

    def test_zero_target_closed_form(self):
        rng = np.random.default_rng(0)
        F = rng.standard_normal((9, 4))
        alpha, beta = 0.7, 2.3
        n, d = F.shape
        s = np.linalg.svd(F, compute_uv=False)
        want = (0.5 * n * math.log(beta) + 0.5 * d * math.log(alpha)
                - 0.5 * n * math.log(2 * math.pi)
                - 0.5 * float(np.log(alpha + beta * s ** 2).sum()))
        assert evidence(F, np.zeros(n), alpha, beta) == pytest.approx(want, abs=1e-12)

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            n = int(rng.integers(10, 60))
            d = int(rng.integers(1, 12))
            F = rng.standard_normal((n, d))
            y = rng.standard_normal(n)
            alpha = float(10 ** rng.uniform(-2, 2))
            beta = float(10 ** rng.uniform(-2, 2))
            assert evidence(F, y, alpha, beta) == pytest.approx(
                dense_evidence(F, y, alpha, beta), abs=1e-8)

    def test_wide_matrix_dense_oracle(self):
        rng = np.random.default_rng(2)
        F = rng.standard_normal((8, 20))  # D > n exercises the zero-padded spectrum
        y = rng.standard_normal(8)
        assert evidence(F, y, 0.5, 1.5) == pytest.approx(
            dense_evidence(F, y, 0.5, 1.5), abs=1e-8)

    def test_rejects_nan(self):
        with pytest.raises(NonFiniteInput):
            evidence(np.array([[np.nan], [1.0]]), np.zeros(2), 1.0, 1.0)

    def test_rejects_single_sample(self):
        with pytest.raises(DegenerateShape):
            evidence(np.ones((1, 2)), np.zeros(1), 1.0, 1.0)


class TestMaximizeEvidence:
    def test_attains_grid_maximum(self):
        rng = np.random.default_rng(3)
        grid = 10 ** np.linspace(-6, 6, 60)
        for _ in range(3):
            F = rng.standard_normal((100, 5))
            w = rng.standard_normal(5)
            y = F @ w + rng.standard_normal(100)
            state = maximize_evidence(F, y)
            best = max(dense_evidence(F, y, a, b) for a in grid for b in grid)
            assert state.log_evidence >= best - 1e-3

    def test_improves_on_initialization(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            F = rng.standard_normal((40, 6))
            y = rng.standard_normal(40)
            state = maximize_evidence(F, y)
            assert state.log_evidence >= evidence(F, y, 1.0, 1.0) - 1e-9

    def test_perfect_fit_caps_beta(self):
        rng = np.random.default_rng(5)
        F = rng.standard_normal((30, 4))
        y = F @ rng.standard_normal(4)  # exactly linear
        state = maximize_evidence(F, y)
        assert "zero_residual" in state.flags
        assert state.beta == pytest.approx(1e12)

    def test_noise_vs_signal(self):
        rng = np.random.default_rng(6)
        F = rng.standard_normal((80, 6))
        y_noise = rng.standard_normal(80)
        y_signal = F @ rng.standard_normal(6)
        y_signal *= np.linalg.norm(y_noise) / np.linalg.norm(y_signal)
        y_signal += 0.05 * rng.standard_normal(80)
        noise_state = maximize_evidence(F, y_noise)
        signal_state = maximize_evidence(F, y_signal)
        assert noise_state.gamma < 1.5
        assert noise_state.log_evidence < signal_state.log_evidence
        # brute-force both sides over the grid as well
        grid = 10 ** np.linspace(-6, 6, 30)
        best_noise = max(dense_evidence(F, y_noise, a, b) for a in grid for b in grid)
        best_signal = max(dense_evidence(F, y_signal, a, b) for a in grid for b in grid)
        assert best_noise < best_signal

    def test_gamma_within_bounds(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            n, d = int(rng.integers(5, 40)), int(rng.integers(1, 10))
            F = rng.standard_normal((n, d))
            y = rng.standard_normal(n)
            state = maximize_evidence(F, y)
            assert 0.0 <= state.gamma <= min(n, d) + 1e-9

    def test_all_zero_features_rejected(self):
        with pytest.raises(DegenerateShape):
            maximize_evidence(np.zeros((5, 2)), np.ones(5))


def two_blobs(rng, n_per=40, dim=2, gap=6.0):
    a = rng.standard_normal((n_per, dim))
    b = rng.standard_normal((n_per, dim)) + gap / math.sqrt(dim)
    F = np.concatenate([a, b])
    labels = np.array([0] * n_per + [1] * n_per)
    return F, labels


class TestLogmeClassification:
    def test_separated_blobs_beat_shuffled_labels(self):
        rng = np.random.default_rng(8)
        F, labels = two_blobs(rng)
        shuffled = labels[rng.permutation(len(labels))]
        good = logme_classification(F, labels, 2)
        bad = logme_classification(F, shuffled, 2)
        assert good.score > bad.score

    def test_single_class_rejected(self):
        rng = np.random.default_rng(9)
        with pytest.raises(NoEvaluableClass):
            logme_classification(rng.standard_normal((10, 3)), np.zeros(10, int), 2)

    def test_absent_classes_skipped(self):
        rng = np.random.default_rng(10)
        F, labels = two_blobs(rng)
        res = logme_classification(F, labels, 5)
        assert res.skipped_classes == (2, 3, 4)
        assert res.n_classes == 2

    def test_rotation_invariance(self):
        rng = np.random.default_rng(11)
        F, labels = two_blobs(rng, dim=6)
        q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
        a = logme_classification(F, labels, 2)
        b = logme_classification(F @ q, labels, 2)
        assert a.score == pytest.approx(b.score, abs=1e-8)

    def test_sample_permutation_invariance(self):
        rng = np.random.default_rng(12)
        F, labels = two_blobs(rng, dim=4)
        perm = rng.permutation(len(labels))
        a = logme_classification(F, labels, 2)
        b = logme_classification(F[perm], labels[perm], 2)
        # permutation changes only floating-point summation order
        assert a.score == pytest.approx(b.score, abs=1e-10)

    def test_score_is_mean_over_n(self):
        rng = np.random.default_rng(13)
        F, labels = two_blobs(rng)
        res = logme_classification(F, labels, 2)
        assert res.score == pytest.approx(np.mean(res.per_class) / res.n_samples, abs=1e-12)


class TestLogmeCtc:
    def test_composition_identity(self):
        rng = np.random.default_rng(14)
        feats = rng.standard_normal((6, 5))
        grid = peaked_grid([2, 0, 2, 1, 1, 2], vocab_size=2)
        ali = viterbi_align(grid, [0, 1, 1])
        kept = [t for t, sym in enumerate(ali.assigned) if sym != 2]
        direct = logme_classification(feats[kept],
                                      [ali.assigned[t] for t in kept], 2)
        pooled = logme_ctc([feats], [ali], 2)
        assert pooled.score == pytest.approx(direct.score, abs=1e-12)
        assert pooled.n_samples == len(kept)

    def test_all_blank_alignment_rejected(self):
        from psmrank import FrameAlignment
        ali = FrameAlignment(assigned=(2, 2, 2), path_log_prob=-1.0,
                             state_path=(0, 0, 0), blank=2)
        with pytest.raises(EmptyAlignedSet):
            logme_ctc([np.ones((3, 4))], [ali], 2)

    def test_clustered_frames_beat_reassigned_labels(self):
        rng = np.random.default_rng(15)
        vocab = 3
        centroids = 4.0 * np.eye(vocab, 6)
        feats_list, alis = [], []
        for _ in range(8):
            labels = rng.integers(0, vocab, size=2).tolist()
            symbols = [vocab, labels[0], vocab, labels[1], vocab]
            if labels[0] == labels[1]:
                pass  # separating blank already present
            grid = peaked_grid(symbols, vocab_size=vocab)
            ali = viterbi_align(grid, labels)
            frames = np.array([centroids[s] if s != vocab else np.zeros(6)
                               for s in ali.assigned])
            feats_list.append(frames + 0.3 * rng.standard_normal(frames.shape))
            alis.append(ali)
        good = logme_ctc(feats_list, alis, vocab)

        reassigned = []
        from psmrank import FrameAlignment
        for ali in alis:
            syms = list(ali.assigned)
            non_blank = [i for i, s in enumerate(syms) if s != vocab]
            for i in non_blank:
                syms[i] = int(rng.integers(0, vocab))
            reassigned.append(FrameAlignment(assigned=tuple(syms),
                                             path_log_prob=ali.path_log_prob,
                                             state_path=ali.state_path,
                                             blank=vocab))
        bad = logme_ctc(feats_list, reassigned, vocab)
        assert good.score > bad.score
