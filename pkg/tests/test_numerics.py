import math

import numpy as np
import pytest

from pfrsim.errors import DomainError, NonConvergenceError, NonFiniteError
from pfrsim.numerics import (
    MinimizeSpec,
    QuadratureSpec,
    integrate,
    log2_sum_exp,
    log_gamma,
    minimize_scalar,
    quadrature_grid,
)


def std_normal_pdf(x):
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


class TestIntegrate:
    def test_normal_density_normalizes(self):
        assert integrate(std_normal_pdf, -math.inf, math.inf) == pytest.approx(
            1.0, abs=1e-10
        )

    def test_gamma_two(self):
        assert integrate(lambda x: x * math.exp(-x), 0.0, math.inf) == pytest.approx(
            1.0, abs=1e-10
        )

    def test_half_line_symmetry(self):
        assert integrate(std_normal_pdf, -math.inf, 0.0) == pytest.approx(
            0.5, abs=1e-10
        )

    def test_finite_interval_polynomial(self):
        assert integrate(lambda x: 3.0 * x * x, 0.0, 2.0) == pytest.approx(8.0, rel=1e-12)

    def test_rejects_bad_interval(self):
        with pytest.raises(DomainError):
            integrate(std_normal_pdf, 1.0, 1.0)

    def test_nonfinite_integrand_raises(self):
        with pytest.raises(NonFiniteError):
            integrate(lambda x: float("nan"), 0.0, 1.0)

    def test_subdivision_budget_exhaustion(self):
        spec = QuadratureSpec(abs_tol=1e-300, rel_tol=1e-300, max_subdivisions=16)
        with pytest.raises(NonConvergenceError):
            integrate(lambda x: math.exp(-abs(x) ** 0.3), -math.inf, math.inf, spec)

    def test_linearity_on_random_smooth_functions(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            a, b = rng.normal(size=2)
            c1, c2, s1, s2 = rng.uniform(0.5, 2.0, size=4)

            def f(x):
                return math.exp(-((x - c1) ** 2) / (2 * s1 * s1))

            def g(x):
                return math.cos(c2 * x) * math.exp(-(x * x) / (2 * s2 * s2))

            lhs = integrate(lambda x: a * f(x) + b * g(x), -math.inf, math.inf)
            rhs = a * integrate(f, -math.inf, math.inf) + b * integrate(
                g, -math.inf, math.inf
            )
            assert lhs == pytest.approx(rhs, abs=5e-9)

    def test_spec_validation(self):
        with pytest.raises(DomainError):
            QuadratureSpec(abs_tol=0.0)
        with pytest.raises(DomainError):
            QuadratureSpec(max_subdivisions=0)


class TestQuadratureGrid:
    def test_grid_reproduces_pilot_integrals(self):
        fs = [std_normal_pdf, lambda x: std_normal_pdf(x - 3.0)]
        x, w = quadrature_grid(fs, -math.inf, math.inf)
        for f in fs:
            val = float(np.sum(w * np.vectorize(f)(x)))
            assert val == pytest.approx(1.0, abs=1e-9)

    def test_grid_handles_related_integrand(self):
        x, w = quadrature_grid([std_normal_pdf], -math.inf, math.inf)
        second_moment = float(np.sum(w * x * x * np.vectorize(std_normal_pdf)(x)))
        assert second_moment == pytest.approx(1.0, abs=1e-8)


class TestMinimizeScalar:
    def test_quadratic_vertex(self):
        x, v = minimize_scalar(lambda e: (e - 1.0) ** 2, MinimizeSpec(0.1, 10.0))
        assert x == pytest.approx(1.0, abs=1e-6)
        assert v == pytest.approx(0.0, abs=1e-12)

    def test_constant_function(self):
        _, v = minimize_scalar(lambda e: 5.0, MinimizeSpec(1.0, 2.0))
        assert v == 5.0

    def test_am_gm(self):
        x, v = minimize_scalar(lambda e: e + 1.0 / e, MinimizeSpec(0.01, 100.0))
        assert x == pytest.approx(1.0, abs=1e-6)
        assert v == pytest.approx(2.0, abs=1e-6)

    def test_upper_bound_property_on_dense_grid(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            a, b, c = rng.normal(size=3)

            def f(x):
                return math.sin(a * x) + 0.1 * (x - b) ** 2 + c * math.cos(x)

            spec = MinimizeSpec(0.1, 20.0)
            _, v = minimize_scalar(f, spec)
            grid = np.linspace(spec.lo, spec.hi, 2000)
            assert v <= min(f(float(x)) for x in grid) + spec.tol

    def test_infinite_values_tolerated(self):
        def f(x):
            return math.inf if x > 2.0 else (x - 1.5) ** 2

        x, v = minimize_scalar(f, MinimizeSpec(0.5, 10.0))
        assert x == pytest.approx(1.5, abs=1e-5)
        assert v == pytest.approx(0.0, abs=1e-9)

    def test_nan_raises(self):
        with pytest.raises(NonFiniteError):
            minimize_scalar(lambda x: float("nan"), MinimizeSpec(1.0, 2.0))

    def test_spec_validation(self):
        with pytest.raises(DomainError):
            MinimizeSpec(0.0, 1.0)
        with pytest.raises(DomainError):
            MinimizeSpec(2.0, 1.0)


class TestLogGamma:
    def test_gamma_one_and_two(self):
        assert log_gamma(1.0) == 0.0
        assert log_gamma(2.0) == 0.0

    def test_gamma_half(self):
        assert log_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-12)

    def test_recurrence(self):
        for x in np.arange(0.5, 21.0, 1.0):
            lhs = math.exp(log_gamma(x + 1.0))
            rhs = x * math.exp(log_gamma(x))
            assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_domain(self):
        with pytest.raises(DomainError):
            log_gamma(0.0)
        with pytest.raises(DomainError):
            log_gamma(-1.5)


class TestLog2SumExp:
    def test_matches_direct_sum(self):
        vals = [-3.0, 0.0, 2.5]
        expect = math.log2(sum(2.0**v for v in vals))
        assert log2_sum_exp(vals) == pytest.approx(expect, rel=1e-14)

    def test_handles_huge_exponents(self):
        assert log2_sum_exp([5000.0, 5001.0]) == pytest.approx(
            5001.0 + math.log2(1.5), rel=1e-14
        )

    def test_neg_inf_drops_out(self):
        assert log2_sum_exp([-math.inf, 3.0]) == pytest.approx(3.0)
        assert log2_sum_exp([-math.inf, -math.inf]) == -math.inf
        assert log2_sum_exp([]) == -math.inf
