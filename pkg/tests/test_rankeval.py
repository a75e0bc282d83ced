import numpy as np
import pytest
from scipy import integrate, special, stats

from psmrank import (
    build_report,
    exact_permutation_p,
    incomplete_beta,
    spearman,
    to_ranks,
)
from psmrank.errors import (
    CandidateSetMismatch,
    DomainError,
    MixedSeeds,
    TooFewPoints,
)
from psmrank.fixtures import (
    CONFORMER17_EXPECTED_RHO,
    CONFORMER17_RANKS,
    CONFORMER17_REFERENCE_P,
    CONFORMER17_WER,
    SSL12_EXPECTED_RHO,
    SSL12_PER,
    SSL12_RANKS,
)


class TestToRanks:
    def test_wer_column(self):
        ranks = to_ranks(CONFORMER17_WER, "lower_better").ranks
        # the published fine-tuning rank column transposes the 47.75/48.71
        # layers; ranking the metric itself puts them in metric order
        expected = list(CONFORMER17_RANKS["ft"])
        expected[3], expected[5] = 13, 14
        np.testing.assert_array_equal(ranks, expected)

    def test_per_column(self):
        ranks = to_ranks(SSL12_PER, "lower_better").ranks
        np.testing.assert_array_equal(ranks, SSL12_RANKS["ft"])

    def test_ties_get_average_rank(self):
        np.testing.assert_array_equal(to_ranks([5.0, 5.0, 1.0], "lower_better").ranks,
                                      [2.5, 2.5, 1.0])

    def test_higher_better_reverses(self):
        values = [1.0, 2.0, 3.0, 4.0]
        np.testing.assert_array_equal(to_ranks(values, "higher_better").ranks,
                                      [4, 3, 2, 1])

    def test_idempotent_on_ranks(self):
        rv = to_ranks([0.3, 0.1, 0.9, 0.4], "lower_better")
        again = to_ranks(rv.ranks, "lower_better")
        np.testing.assert_array_equal(rv.ranks, again.ranks)


class TestSpearman:
    def test_benchmark_fixtures(self):
        ft = np.asarray(CONFORMER17_RANKS["ft"], float)
        for method, expected in CONFORMER17_EXPECTED_RHO.items():
            res = spearman(ft, np.asarray(CONFORMER17_RANKS[method], float))
            assert res.rho == pytest.approx(expected, abs=5e-4)
            ref = CONFORMER17_REFERENCE_P[method]
            assert ref / 2 <= res.p_value <= ref * 2

    def test_ssl_fixture(self):
        res = spearman(np.asarray(SSL12_RANKS["ft"], float),
                       np.asarray(SSL12_RANKS["logme"], float))
        assert res.rho == pytest.approx(SSL12_EXPECTED_RHO["logme"], abs=5e-4)
        assert 1.5e-6 <= res.p_value <= 6e-6

    def test_matches_scipy(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = int(rng.integers(4, 30))
            a = rng.standard_normal(n)
            b = rng.standard_normal(n)
            res = spearman(a, b)
            ref_rho, ref_p = stats.spearmanr(a, b)
            assert res.rho == pytest.approx(ref_rho, abs=1e-12)
            assert res.p_value == pytest.approx(ref_p, rel=1e-9)

    def test_identity(self):
        v = np.array([3.0, 1.0, 2.0, 5.0])
        res = spearman(v, v)
        assert res.rho == 1.0 and res.p_value == 0.0

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        a, b = rng.standard_normal(10), rng.standard_normal(10)
        x, y = spearman(a, b), spearman(b, a)
        assert x.rho == y.rho and x.p_value == y.p_value

    def test_reversal_negates(self):
        rng = np.random.default_rng(2)
        a = rng.permutation(10).astype(float)
        b = rng.permutation(10).astype(float)
        assert spearman(a, 9.0 - b).rho == pytest.approx(-spearman(a, b).rho, abs=1e-12)

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal(12)
        b = rng.standard_normal(12)
        base = spearman(a, b).rho
        assert spearman(np.exp(a), b).rho == pytest.approx(base, abs=1e-12)
        assert spearman(a ** 3, b).rho == pytest.approx(base, abs=1e-12)

    def test_tied_ranks_use_pearson(self):
        a = np.array([1.0, 2.0, 2.0, 4.0])
        b = np.array([1.0, 3.0, 2.0, 4.0])
        res = spearman(a, b)
        ref_rho, _ = stats.spearmanr(a, b)
        assert res.rho == pytest.approx(ref_rho, abs=1e-12)

    def test_too_few(self):
        with pytest.raises(TooFewPoints):
            spearman([1.0, 2.0], [2.0, 1.0])

    def test_p_within_factor_two_of_permutation_test(self):
        for seed in range(30):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(5, 9))
            a = rng.standard_normal(n)
            b = rng.standard_normal(n)
            p_approx = spearman(a, b).p_value
            p_exact = exact_permutation_p(a, b)
            assert p_exact / 2 <= p_approx <= p_exact * 2, \
                f"seed {seed}: {p_approx} vs exact {p_exact}"


class TestIncompleteBeta:
    def test_boundaries(self):
        assert incomplete_beta(0.0, 2.0, 3.0) == 0.0
        assert incomplete_beta(1.0, 2.0, 3.0) == 1.0

    def test_uniform_midpoint(self):
        assert incomplete_beta(0.5, 1.0, 1.0) == pytest.approx(0.5, abs=1e-14)

    def test_against_quadrature(self):
        rng = np.random.default_rng(4)
        for _ in range(25):
            a = float(10 ** rng.uniform(-0.5, 1.3))
            b = float(10 ** rng.uniform(-0.5, 1.3))
            x = float(rng.uniform(0.01, 0.99))
            norm = special.beta(a, b)
            val, err = integrate.quad(
                lambda t: t ** (a - 1) * (1 - t) ** (b - 1) / norm, 0.0, x,
                limit=400, epsabs=1e-12, epsrel=1e-12)
            assert err < 5e-9
            assert incomplete_beta(x, a, b) == pytest.approx(val, abs=1e-8)

    def test_against_scipy(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            a = float(10 ** rng.uniform(-1, 2))
            b = float(10 ** rng.uniform(-1, 2))
            x = float(rng.uniform(0, 1))
            assert incomplete_beta(x, a, b) == pytest.approx(
                float(special.betainc(a, b, x)), abs=1e-10)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            incomplete_beta(-0.1, 1.0, 1.0)
        with pytest.raises(DomainError):
            incomplete_beta(0.5, 0.0, 1.0)


def _records(method, ranks, seed=7):
    # scores oriented so that to_ranks reproduces the given rank column
    sign = 1.0 if method in ("swd", "tsne") else -1.0
    return [{"candidate_id": f"cand{i:02d}", "method": method,
             "score": sign * float(r), "seed": seed}
            for i, r in enumerate(ranks)]


class TestBuildReport:
    def test_reproduces_benchmark_rho_rows(self):
        gt = {f"cand{i:02d}": float(r) for i, r in enumerate(CONFORMER17_RANKS["ft"])}
        scores = {m: _records(m, CONFORMER17_RANKS[m]) for m in ("logme", "swd", "tsne")}
        report = build_report(scores, gt, direction="lower_better")
        for method, expected in CONFORMER17_EXPECTED_RHO.items():
            assert report.correlations[method].rho == pytest.approx(expected, abs=5e-4)
            np.testing.assert_array_equal(report.ranks[method], CONFORMER17_RANKS[method])
        table = report.format_table()
        assert "rank_logme" in table and "spearman rho" in table

    def test_perfect_agreement(self):
        gt = {f"c{i}": float(i) for i in range(5)}
        recs = [{"candidate_id": f"c{i}", "method": "logme", "score": -float(i)}
                for i in range(5)]
        report = build_report({"logme": recs}, gt, direction="lower_better")
        assert report.correlations["logme"].rho == 1.0

    def test_candidate_set_mismatch(self):
        gt = {"a": 1.0, "b": 2.0, "c": 3.0}
        recs = [{"candidate_id": x, "method": "logme", "score": 0.0} for x in ("a", "b")]
        with pytest.raises(CandidateSetMismatch):
            build_report({"logme": recs}, gt)

    def test_mixed_seeds_rejected(self):
        gt = {"a": 1.0, "b": 2.0, "c": 3.0}
        recs = [{"candidate_id": x, "method": "swd", "score": 0.0, "seed": i}
                for i, x in enumerate(("a", "b", "c"))]
        with pytest.raises(MixedSeeds):
            build_report({"swd": recs}, gt)

    def test_report_json_shape(self):
        gt = {"a": 3.0, "b": 1.0, "c": 2.0}
        recs = [{"candidate_id": x, "method": "tsne", "score": s, "seed": 1}
                for x, s in (("a", 0.9), ("b", 0.1), ("c", 0.5))]
        doc = build_report({"tsne": recs}, gt).to_json()
        assert doc["candidates"] == ["a", "b", "c"]
        assert doc["methods"]["tsne"]["rho"] == 1.0
        assert doc["methods"]["tsne"]["seed"] == 1
