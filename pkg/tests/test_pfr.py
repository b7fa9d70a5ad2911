import io
import math

import numpy as np
import pytest
from scipy import stats

from pfrsim.distributions import DistributionPair, Finite, Gaussian, Laplace
from pfrsim.errors import (
    DomainError,
    IndexOverflowError,
    NegativeTailError,
    NonConvergenceError,
)
from pfrsim.pfr import (
    IndexPmf,
    PfrOutcome,
    _log_beta_quadrature,
    beta,
    index_pmf,
    log_beta,
    run_pfr,
    sample_index_exact,
    sample_indices,
)

STD_PAIR = DistributionPair(Gaussian(0, 1), Gaussian(1, 1))


class TestBeta:
    def test_identical_pair_is_one(self):
        assert beta(DistributionPair(Gaussian(0, 1), Gaussian(0, 1)), 2.3) == 1.0

    def test_hand_value_at_zero(self):
        phi1 = float(Gaussian(0, 1).cdf(1.0))
        expect = 1.0 / (0.5 + math.exp(0.5) * phi1)
        assert beta(STD_PAIR, 0.0) == pytest.approx(expect, rel=1e-12)
        assert beta(STD_PAIR, 0.0) == pytest.approx(0.5299, abs=2e-4)

    def test_monte_carlo_cross_check(self):
        rng = np.random.default_rng(42)
        x = Gaussian(1, 1).sample(rng, 10**6)
        r = np.exp(STD_PAIR.log_ratio(x))
        r0 = math.exp(float(STD_PAIR.log_ratio(0.0)))
        mc = 1.0 / float(np.mean(np.maximum(r, r0)))
        assert beta(STD_PAIR, 0.0) == pytest.approx(mc, rel=5e-3)

    def test_finite_identical(self):
        pr = DistributionPair(Finite((0.5, 0.5)), Finite((0.5, 0.5)))
        assert beta(pr, 0) == 1.0
        assert beta(pr, 1) == 1.0

    def test_closed_form_matches_quadrature_nonincreasing(self):
        for u in (-3.0, -1.0, 0.0, 1.5, 4.0):
            closed = float(log_beta(STD_PAIR, u))
            quad = _log_beta_quadrature(STD_PAIR, u, None)
            assert closed == pytest.approx(quad, abs=1e-8)

    def test_closed_form_matches_quadrature_nondecreasing(self):
        pr = DistributionPair(Gaussian(1, 1), Gaussian(0, 1))
        for u in (-2.0, 0.0, 0.5, 3.0):
            closed = float(log_beta(pr, u))
            quad = _log_beta_quadrature(pr, u, None)
            assert closed == pytest.approx(quad, abs=1e-8)

    def test_laplace_closed_form_matches_quadrature(self):
        pr = DistributionPair(Laplace(0, 1), Laplace(2, 1))
        for u in (-1.0, 0.0, 1.0, 2.5):
            closed = float(log_beta(pr, u))
            quad = _log_beta_quadrature(pr, u, None)
            assert closed == pytest.approx(quad, abs=1e-8)

    def test_nonmonotone_pair_uses_quadrature(self):
        pr = DistributionPair(Gaussian(0, 1), Gaussian(0, 2))
        val = beta(pr, 0.0)
        assert 0.0 < val <= 1.0
        rng = np.random.default_rng(3)
        x = Gaussian(0, 2).sample(rng, 10**6)
        r = np.exp(pr.log_ratio(x))
        r0 = math.exp(float(pr.log_ratio(0.0)))
        mc = 1.0 / float(np.mean(np.maximum(r, r0)))
        assert val == pytest.approx(mc, rel=5e-3)


class TestRunPfr:
    def test_identical_pair_returns_first_index(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            out = run_pfr(DistributionPair(Gaussian(2, 1), Gaussian(2, 1)), rng)
            assert out.index == 1
            assert out.termination == "exact"

    def test_degenerate_finite_accepts_support_zero(self):
        pr = DistributionPair(Finite((1.0, 0.0)), Finite((0.5, 0.5)))
        rng = np.random.default_rng(1)
        for _ in range(50):
            out = run_pfr(pr, rng)
            assert out.accepted == 0
            assert out.termination == "exact"

    def test_bounded_ratio_terminates_exactly(self):
        pr = DistributionPair(Laplace(0, 1), Laplace(2, 1))
        rng = np.random.default_rng(2)
        out = run_pfr(pr, rng)
        assert out.termination == "exact"

    def test_unbounded_ratio_reports_delta(self):
        rng = np.random.default_rng(3)
        out = run_pfr(STD_PAIR, rng, delta=1e-6)
        assert out.termination == "approximate"
        assert out.delta == 1e-6

    def test_accepted_samples_pass_ks(self):
        rng = np.random.default_rng(7)
        n = 20000
        vals = np.array([run_pfr(STD_PAIR, rng, delta=1e-8).accepted for _ in range(n)])
        res = stats.kstest(vals, "norm")
        assert res.pvalue > 0.01

    def test_deterministic_under_seed(self):
        a = run_pfr(STD_PAIR, np.random.default_rng(11), delta=1e-6)
        b = run_pfr(STD_PAIR, np.random.default_rng(11), delta=1e-6)
        assert a == b

    def test_iteration_cap(self):
        from pfrsim.errors import IterationCapError

        rng = np.random.default_rng(5)
        with pytest.raises(IterationCapError):
            run_pfr(STD_PAIR, rng, delta=1e-300, max_candidates=2000)

    def test_delta_validation(self):
        with pytest.raises(DomainError):
            run_pfr(STD_PAIR, np.random.default_rng(0), delta=0.0)


class TestSampleIndexExact:
    def test_identical_pair_always_one(self):
        pr = DistributionPair(Gaussian(0, 1), Gaussian(0, 1))
        rng = np.random.default_rng(0)
        for _ in range(20):
            assert sample_index_exact(pr, rng).index == 1

    def test_log_index_bound_heavy_pair(self):
        # mean log2(K) stays below the divergence-plus-one bound
        pr = DistributionPair(Gaussian(0, 1), Gaussian(5, 1))
        rng = np.random.default_rng(4)
        k, _ = sample_indices(pr, 10**4, rng)
        logk = np.log2(k)
        bound = 12.5 / math.log(2.0) + 1.0  # KL in bits + 1
        assert float(np.mean(logk)) <= bound + 3.0 * float(
            np.std(logk) / math.sqrt(len(logk))
        )

    def test_accepted_samples_pass_ks(self):
        rng = np.random.default_rng(12)
        _, u = sample_indices(STD_PAIR, 10**5, rng)
        assert stats.kstest(u, "norm").pvalue > 0.01

    def test_overflow_on_extreme_pair(self):
        pr = DistributionPair(Gaussian(0, 1), Gaussian(10, 1))
        rng = np.random.default_rng(0)
        with pytest.raises(IndexOverflowError):
            for _ in range(50):
                sample_index_exact(pr, rng)

    def test_finite_pair_chi_square(self):
        pr = DistributionPair(Finite((0.9, 0.1)), Finite((0.5, 0.5)))
        rng = np.random.default_rng(8)
        k, u = sample_indices(pr, 10**5, rng)
        freq = np.bincount(u.astype(int), minlength=2)
        res = stats.chisquare(freq, f_exp=[90000, 10000])
        assert res.pvalue > 0.01


class TestSamplerAgreement:
    def test_index_law_total_variation(self):
        # empirical index pmfs of the two samplers agree on k <= 50
        n = 10**5
        rng1 = np.random.default_rng(21)
        rng2 = np.random.default_rng(22)
        k_direct = np.array(
            [run_pfr(STD_PAIR, rng1, delta=1e-8).index for _ in range(n)]
        )
        k_cond, _ = sample_indices(STD_PAIR, n, rng2)
        f1 = np.bincount(np.minimum(k_direct, 51), minlength=52)[1:51] / n
        f2 = np.bincount(np.minimum(k_cond.astype(int), 51), minlength=52)[1:51] / n
        tv = 0.5 * float(np.abs(f1 - f2).sum())
        assert tv <= 0.01

    def test_conditional_law_is_geometric(self):
        # condition on |U_K - u0| <= 0.05 and chi-square against Geo(beta)
        u0 = 0.3
        rng = np.random.default_rng(23)
        k, u = sample_indices(STD_PAIR, 3 * 10**5, rng)
        sel = np.abs(u - u0) <= 0.05
        ks = k[sel].astype(int)
        bvals = np.exp(np.asarray(log_beta(STD_PAIR, u[sel]), dtype=float))
        kmax = 12
        expected = np.empty(kmax + 1)
        for j in range(1, kmax + 1):
            expected[j - 1] = float(np.mean((1 - bvals) ** (j - 1) * bvals))
        expected[kmax] = 1.0 - expected[:kmax].sum()
        observed = np.bincount(np.minimum(ks, kmax + 1), minlength=kmax + 2)[1:]
        res = stats.chisquare(observed, f_exp=expected * len(ks))
        assert res.pvalue > 0.01


class TestIndexPmf:
    def test_identical_pair_point_mass(self):
        pmf = index_pmf(DistributionPair(Gaussian(0, 1), Gaussian(0, 1)), 10)
        assert pmf.probs[0] == pytest.approx(1.0, abs=1e-10)
        assert float(np.abs(pmf.probs[1:]).max()) < 1e-12
        assert pmf.tail_mass == pytest.approx(0.0, abs=1e-12)

    def test_finite_pair_hand_value(self):
        pr = DistributionPair(Finite((0.9, 0.1)), Finite((0.5, 0.5)))
        pmf = index_pmf(pr, 50)
        # beta = (1/1.8, 1), so P(K=1) = 0.9/1.8 + 0.1
        assert pmf.probs[0] == pytest.approx(0.6, rel=1e-12)
        assert pmf.probs.sum() + pmf.tail_mass == pytest.approx(1.0, abs=1e-12)

    def test_probs_nonincreasing_and_consistent(self):
        pmf = index_pmf(STD_PAIR, 200)
        assert np.all(np.diff(pmf.probs) <= 1e-15)
        assert pmf.probs.sum() + pmf.tail_mass == pytest.approx(1.0, abs=1e-9)

    def test_matches_empirical_frequencies(self):
        pmf = index_pmf(STD_PAIR, 200)
        rng = np.random.default_rng(31)
        n = 10**5
        k, _ = sample_indices(STD_PAIR, n, rng)
        counts = np.bincount(k.astype(int), minlength=21)[1:21]
        for j in range(20):
            p = pmf.probs[j]
            se = math.sqrt(p * (1 - p) / n)
            assert abs(counts[j] / n - p) <= 3.0 * se + 1e-12, f"k={j + 1}"

    def test_nonmonotone_pair_pmf_matches_sampler(self):
        # unequal variances force the per-node quadrature route for beta;
        # the cross-check sampler is the selection rule, whose bounded
        # ratio needs no beta at all
        from pfrsim.numerics import QuadratureSpec
        from pfrsim.pfr import derive_stream

        pr = DistributionPair(Gaussian(0, 1), Gaussian(0.5, 1.6))
        spec = QuadratureSpec(abs_tol=1e-8, rel_tol=1e-6)
        pmf = index_pmf(pr, 30, spec)
        assert pmf.probs.sum() + pmf.tail_mass == pytest.approx(1.0, abs=1e-8)
        n = 30000
        ks = np.empty(n, dtype=int)
        for i in range(n):
            out = run_pfr(pr, derive_stream(11, i))
            assert out.termination == "exact"
            ks[i] = out.index
        counts = np.bincount(np.minimum(ks, 31), minlength=32)[1:9]
        for j in range(8):
            p = pmf.probs[j]
            se = math.sqrt(p * (1 - p) / n)
            assert abs(counts[j] / n - p) <= 3.0 * se + 1e-12, f"k={j + 1}"

    def test_laplace_pair_pmf_matches_sampler(self):
        pr = DistributionPair(Laplace(0, 1), Laplace(2, 1))
        pmf = index_pmf(pr, 200)
        assert pmf.probs.sum() + pmf.tail_mass == pytest.approx(1.0, abs=1e-9)
        n = 2 * 10**5
        k, _ = sample_indices(pr, n, np.random.default_rng(6))
        counts = np.bincount(np.minimum(k.astype(int), 201), minlength=202)[1:11]
        for j in range(10):
            p = pmf.probs[j]
            se = math.sqrt(p * (1 - p) / n)
            assert abs(counts[j] / n - p) <= 3.0 * se + 1e-12, f"k={j + 1}"

    def test_certificate_checkpoints_continue_the_decay(self):
        pmf = index_pmf(STD_PAIR, 100)
        cert = pmf.tail_certificate
        assert cert is not None and len(cert.checkpoints) > 50
        ks = [k for k, _ in cert.checkpoints]
        ps = [p for _, p in cert.checkpoints]
        assert ks == sorted(ks)
        assert ps[0] <= pmf.probs[-1] + 1e-15
        finite_drop = [a >= b - 1e-18 for a, b in zip(ps, ps[1:])]
        assert all(finite_drop)
        assert len(cert.moment_log2_bounds) >= 4

    def test_csv_roundtrip(self):
        pmf = index_pmf(STD_PAIR, 25)
        buf = io.StringIO()
        pmf.to_csv(buf)
        text = buf.getvalue()
        assert text.startswith("k,prob\n1,")
        assert text.rstrip().splitlines()[-1].startswith("tail,")
        back = IndexPmf.from_csv(io.StringIO(text))
        assert np.allclose(back.probs, pmf.probs, rtol=0, atol=0)
        assert back.tail_mass == pmf.tail_mass

    def test_validation(self):
        with pytest.raises(NegativeTailError):
            IndexPmf(np.array([1.0, 1e-8]), -1e-8)
        with pytest.raises(NonConvergenceError):
            IndexPmf(np.array([0.5]), 0.4)
        with pytest.raises(DomainError):
            IndexPmf(np.array([-0.1, 1.1]), 0.0)

    def test_outcome_validation(self):
        with pytest.raises(DomainError):
            PfrOutcome(0, 0.0, 1, "exact")
        with pytest.raises(DomainError):
            PfrOutcome(5, 0.0, 3, "exact")
        with pytest.raises(DomainError):
            PfrOutcome(1, 0.0, 1, "maybe")
