import io
import math

import numpy as np
import pytest

from pfrsim.bounds import (
    BoundSet,
    c1,
    c2,
    default_alpha_grid,
    lb1,
    lb2,
    optimize_ub,
    sweep,
    sweep_to_csv,
    ub1,
    ub2,
    ub2_epsilon_max,
)
from pfrsim.distributions import DistributionPair, Finite, Gaussian, Laplace
from pfrsim.errors import AbsoluteContinuityError, EpsilonRangeError, OrderError

LN2 = math.log(2.0)
LOG2E = 1.0 / LN2

IDENT = DistributionPair(Gaussian(0, 1), Gaussian(0, 1))
NEAR = DistributionPair(Gaussian(0, 1), Gaussian(1, 1))
FAR = DistributionPair(Gaussian(0, 1), Gaussian(5, 1))


class TestLowerBounds:
    def test_lb1_identical_pair(self):
        assert lb1(IDENT, 0.5) == pytest.approx(-2.0, abs=1e-12)

    def test_lb1_far_pair_hand_value(self):
        assert lb1(FAR, 0.5) == pytest.approx(25.0 / LN2 - 2.0, rel=1e-12)

    def test_lb1_constant_near_one(self):
        # the additive constant tends to -1/ln2 - 1
        val = lb1(IDENT, 0.9999)
        assert val == pytest.approx(-1.0 / LN2 - 1.0, abs=1e-3)

    def test_lb2_identical_pair(self):
        assert lb2(IDENT, 0.5) == pytest.approx(2.0 * math.log2(1.0 / 1.5), rel=1e-12)

    def test_lb2_far_pair_hand_value(self):
        expect = 18.75 / LN2 + 2.0 * math.log2(1.0 / 1.5)
        assert lb2(FAR, 0.5) == pytest.approx(expect, rel=1e-12)

    def test_lb2_recovers_kl_bound_near_one(self):
        from pfrsim.distributions import kl_divergence

        target = kl_divergence(NEAR) - 1.0 / LN2
        assert lb2(NEAR, 0.999) == pytest.approx(target, abs=0.01)

    def test_alpha_validation(self):
        for bad in (0.0, 1.0, 1.5, -0.2):
            with pytest.raises(OrderError):
                lb1(NEAR, bad)

    def test_mutual_ac_required(self):
        pr = DistributionPair(Finite((1.0, 0.0)), Finite((0.5, 0.5)))
        with pytest.raises(AbsoluteContinuityError):
            lb1(pr, 0.5)


class TestConstants:
    def test_c1_first_case_hand_value(self):
        expect = 1.1 * LOG2E + 1.0 + math.log2(11.0)
        assert c1(0.8, 0.1) == pytest.approx(expect, rel=1e-12)
        assert c1(0.8, 0.1) == pytest.approx(6.046, abs=2e-3)

    def test_c1_case_selection(self):
        # below one half the gamma-term case always applies
        low = c1(0.4, 0.1)
        gamma_term = (0.4 / 0.6) * math.lgamma((1.0 + 0.1 * 0.6) / 0.4) * LOG2E
        expect = gamma_term + 4.0 + 0.3 - 2.0 * 0.4 / 0.6 + math.log2(11.0)
        assert low == pytest.approx(expect, rel=1e-12)

    def test_c1_boundary_uses_gamma_case(self):
        # at alpha=0.8 the threshold is eps=3; the boundary belongs to case two
        eps = 3.0
        order = (1.0 + eps * 0.2) / 0.8
        expect = (
            (0.8 / 0.2) * math.lgamma(order) * LOG2E
            + 4.0
            + 9.0
            - 8.0
            + math.log2(1.0 + 1.0 / 3.0)
        )
        assert c1(0.8, eps) == pytest.approx(expect, rel=1e-12)
        # just below the threshold the small-constant case applies
        assert c1(0.8, eps - 1e-9) == pytest.approx(
            (4.0 - 1e-9) * LOG2E + 1.0 + math.log2(1.0 + 1.0 / (eps - 1e-9)),
            rel=1e-9,
        )

    def test_c2_hand_value(self):
        assert c2(1.0) == pytest.approx(4.0 + math.log2(LN2 + 1.5), rel=1e-12)
        assert c2(1.0) == pytest.approx(5.133, abs=1e-3)

    def test_c2_proof_variant_offset(self):
        assert c2(0.7) - c2(0.7, use_proof_constant=True) == pytest.approx(1.0)

    def test_epsilon_validation(self):
        with pytest.raises(EpsilonRangeError):
            c1(0.5, 0.0)
        with pytest.raises(EpsilonRangeError):
            c2(-1.0)


class TestUpperBounds:
    def test_ub1_identical_pair_reduces_to_constant(self):
        assert ub1(IDENT, 0.8, 0.1) == pytest.approx(c1(0.8, 0.1), rel=1e-12)

    def test_ub1_divergence_order(self):
        # at alpha=0.5, eps=0.2 the divergence order is 2.2
        from pfrsim.distributions import renyi_divergence

        expect = 1.2 * renyi_divergence(NEAR, 2.2) + c1(0.5, 0.2)
        assert ub1(NEAR, 0.5, 0.2) == pytest.approx(expect, rel=1e-12)

    def test_ub1_infinite_divergence_propagates(self):
        pr = DistributionPair(Laplace(0, 3), Laplace(0, 1))
        # order (1 + eps/2) / 0.5 > 2 makes the divergence infinite
        assert ub1(pr, 0.5, 1.0) == math.inf

    def test_ub1_order_approaches_reciprocal_alpha(self):
        # the divergence order (1 + eps(1-alpha))/alpha tends to 1/alpha
        for alpha in (0.3, 0.6, 0.9):
            order = (1.0 + 1e-9 * (1.0 - alpha)) / alpha
            assert order == pytest.approx(1.0 / alpha, abs=1e-8)

    def test_ub2_epsilon_ceiling(self):
        assert ub2_epsilon_max(0.7) == pytest.approx(1.0 / 6.0, rel=1e-12)
        with pytest.raises(EpsilonRangeError):
            ub2(NEAR, 0.7, 0.2)
        with pytest.raises(OrderError):
            ub2(NEAR, 0.5, 0.01)

    def test_ub2_identical_pair_is_constant(self):
        assert ub2(IDENT, 0.9, 0.1) == pytest.approx(c2(0.1), rel=1e-12)


class TestOptimization:
    def test_identical_pair_ub1_reduces_to_constant_min(self):
        eps, val = optimize_ub(IDENT, 0.9, "ub1")
        assert math.isfinite(val)
        grid = np.linspace(1e-4, 50.0, 4000)
        assert val <= min(c1(0.9, float(e)) for e in grid) + 1e-6

    def test_ub2_respects_ceiling(self):
        eps, _ = optimize_ub(NEAR, 0.8, "ub2")
        assert 0.0 < eps <= ub2_epsilon_max(0.8) + 1e-12

    def test_ub1_tighter_than_ub2(self):
        _, v1 = optimize_ub(NEAR, 0.9, "ub1")
        _, v2 = optimize_ub(NEAR, 0.9, "ub2")
        assert v1 < v2

    def test_unknown_bound_rejected(self):
        with pytest.raises(ValueError):
            optimize_ub(NEAR, 0.9, "ub3")


class TestSweep:
    def test_identical_pair_single_row(self):
        rows = sweep(IDENT, [0.5])
        assert len(rows) == 1
        r = rows[0]
        assert r.lb1 < 0 and r.lb2 < 0
        assert math.isfinite(r.ub1)
        assert r.ub2 is None and r.ub2_eps is None

    def test_lb2_tighter_near_one_for_close_pair(self):
        rows = sweep(NEAR, [0.9, 0.95, 0.99])
        for r in rows:
            assert r.lb2 > r.lb1

    def test_laplacian_lb_crossover(self):
        # for equal-scale Laplacian pairs the second bound dominates except
        # at small alpha, where the order-1/alpha divergence term takes over
        pr = DistributionPair(Laplace(0, 1), Laplace(5, 1))
        rows = sweep(pr, np.linspace(0.05, 0.995, 20))
        for r in rows:
            if r.alpha >= 0.2:
                assert r.lb2 >= r.lb1 - 1e-9
        assert rows[0].lb1 > rows[0].lb2  # alpha = 0.05

    def test_soundness_on_every_row(self):
        for pr in (IDENT, NEAR, FAR, DistributionPair(Laplace(0, 1), Laplace(2, 1))):
            for r in sweep(pr, np.linspace(0.25, 0.99, 12)):
                assert r.lb_max <= r.ub1 + 1e-9

    def test_rows_sorted_by_alpha(self):
        rows = sweep(NEAR, [0.9, 0.3, 0.6])
        assert [r.alpha for r in rows] == [0.3, 0.6, 0.9]

    def test_default_grids(self):
        g = default_alpha_grid(NEAR)
        assert len(g) == 160 and g[0] == 0.2 and g[-1] == 0.995
        gl = default_alpha_grid(DistributionPair(Laplace(0, 1), Laplace(1, 1)))
        assert gl[0] == 0.05

    def test_boundset_soundness_guard(self):
        with pytest.raises(AssertionError):
            BoundSet(alpha=0.5, lb1=10.0, lb2=0.0, ub1=5.0, ub1_eps=1.0)

    def test_csv_schema(self):
        rows = sweep(NEAR, [0.5, 0.9])
        buf = io.StringIO()
        sweep_to_csv(rows, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "alpha,lb1,lb2,lb_max,ub1,ub1_eps,ub2,ub2_eps"
        first = lines[1].split(",")
        assert len(first) == 8
        assert first[6] == "" and first[7] == ""  # no ub2 at alpha=0.5
        second = lines[2].split(",")
        assert second[6] != ""

    def test_csv_infinite_cells(self):
        pr = DistributionPair(Laplace(0, 2), Laplace(0, 1))
        rows = sweep(pr, [0.3])
        buf = io.StringIO()
        sweep_to_csv(rows, buf)
        assert "inf" in buf.getvalue()
