import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from claimgate.kernels import (
    DirichletParams,
    DomainError,
    RngStream,
    ln_gamma,
    reg_inc_beta,
    sample_dirichlet,
    sharded_count,
    student_t_cdf,
    student_t_pdf,
)


def t_cdf_quadrature(z, dof):
    """Independent oracle: adaptive quadrature of the t density."""
    val, _ = integrate.quad(lambda t: student_t_pdf(t, dof), -np.inf, z, epsabs=1e-13, epsrel=1e-12)
    return val


class TestLnGamma:
    def test_known_values(self):
        assert ln_gamma(1.0) == 0.0
        assert ln_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), abs=1e-14)
        assert ln_gamma(10.0) == pytest.approx(math.log(362880.0), abs=1e-12)
        assert ln_gamma(0.5) == pytest.approx(0.5723649, abs=1e-7)
        assert ln_gamma(10.0) == pytest.approx(12.8018275, abs=1e-7)

    @pytest.mark.parametrize("z", [0.0, -1.0, float("nan"), float("inf")])
    def test_domain(self, z):
        with pytest.raises(DomainError):
            ln_gamma(z)

    def test_matches_mpmath_on_log_grid(self):
        # |exp(a) - exp(b)| / exp(b) ~ |a - b| for small differences
        for z in np.geomspace(1e-3, 1e3, 200):
            ref = float(mpmath.loggamma(mpmath.mpf(z)))
            assert abs(ln_gamma(z) - ref) < 1e-12 * max(1.0, abs(ref))


class TestRegIncBeta:
    def test_uniform(self):
        assert reg_inc_beta(0.5, 1, 1) == pytest.approx(0.5, abs=1e-15)

    def test_endpoints(self):
        assert reg_inc_beta(1.0, 3, 7) == 1.0
        assert reg_inc_beta(0.0, 3, 7) == 0.0

    def test_quadrature_oracle(self):
        dens = lambda t: t * (1 - t) ** 4 / math.exp(
            math.lgamma(2) + math.lgamma(5) - math.lgamma(7)
        )
        ref, _ = integrate.quad(dens, 0.0, 0.3, epsabs=1e-14)
        assert ref == pytest.approx(0.579825, abs=1e-12)  # = P(Bin(6, .3) >= 2)
        assert reg_inc_beta(0.3, 2, 5) == pytest.approx(ref, abs=1e-12)

    @pytest.mark.parametrize("args", [(-0.1, 1, 1), (1.1, 1, 1), (0.5, 0, 1), (0.5, 1, -2)])
    def test_domain(self, args):
        with pytest.raises(DomainError):
            reg_inc_beta(*args)

    @given(
        st.floats(0.05, 200), st.floats(0.05, 200),
        st.lists(st.floats(0, 1), min_size=2, max_size=20),
    )
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_x(self, a, b, xs):
        xs = sorted(xs)
        vals = [reg_inc_beta(x, a, b) for x in xs]
        assert all(v1 <= v2 + 1e-15 for v1, v2 in zip(vals, vals[1:]))

    def test_symmetry_identity(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            x, a, b = rng.uniform(0, 1), rng.uniform(0.1, 50), rng.uniform(0.1, 50)
            assert reg_inc_beta(x, a, b) + reg_inc_beta(1 - x, b, a) == pytest.approx(1.0, abs=1e-12)


class TestStudentT:
    def test_center_is_exact(self):
        for dof in (1, 2, 24, 1e6):
            assert student_t_cdf(0.0, dof) == 0.5

    def test_worked_values(self):
        assert student_t_cdf(-1.2309, 24) == pytest.approx(t_cdf_quadrature(-1.2309, 24), abs=1e-10)
        assert student_t_cdf(-1.2309, 24) == pytest.approx(0.1152, abs=1e-4)
        assert student_t_cdf(2.0, 4) == pytest.approx(t_cdf_quadrature(2.0, 4), abs=1e-10)
        assert student_t_cdf(2.0, 4) == pytest.approx(0.9419, abs=5e-5)

    def test_cauchy_closed_form(self):
        for z in (-30.0, -1.0, 0.3, 5.0):
            assert student_t_cdf(z, 1) == pytest.approx(0.5 + math.atan(z) / math.pi, abs=1e-14)

    def test_symmetry(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            z, dof = rng.normal(0, 5), rng.uniform(1, 300)
            assert student_t_cdf(-z, dof) == pytest.approx(1 - student_t_cdf(z, dof), abs=1e-14)

    def test_monotone_on_grid(self):
        zs = np.linspace(-40, 40, 1000)
        for dof in (1, 3.5, 24, 500):
            vals = [student_t_cdf(z, dof) for z in zs]
            assert all(v1 <= v2 for v1, v2 in zip(vals, vals[1:]))

    def test_far_tail_keeps_relative_accuracy(self):
        # tiny probabilities are needed for large deltas
        ref = float(mpmath.quad(
            lambda t: mpmath.gamma(4.5) / (mpmath.sqrt(8 * mpmath.pi) * mpmath.gamma(4)) * (1 + t * t / 8) ** -4.5,
            [-mpmath.inf, -60],
        ))
        assert student_t_cdf(-60, 8) == pytest.approx(ref, rel=1e-9)

    def test_domain(self):
        with pytest.raises(DomainError):
            student_t_cdf(1.0, 0.5)


class TestRngStream:
    def test_same_stream_same_draws(self):
        a = RngStream(7, 3).generator().standard_normal(5)
        b = RngStream(7, 3).generator().standard_normal(5)
        np.testing.assert_array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = RngStream(7, 3).generator().standard_normal(5)
        b = RngStream(7, 4).generator().standard_normal(5)
        assert not np.array_equal(a, b)

    def test_rejects_negative_seed(self):
        with pytest.raises(ValueError):
            RngStream(-1)

    def test_sharded_count_independent_of_workers(self):
        def count(size, gen):
            return int(np.count_nonzero(gen.random(size) < 0.3))

        rng = RngStream(11)
        one = sharded_count(230_000, rng, count, workers=1)
        many = sharded_count(230_000, rng, count, workers=4)
        assert one == many


class TestDirichlet:
    def test_params_validation(self):
        with pytest.raises(DomainError):
            DirichletParams((1.0,))
        with pytest.raises(DomainError):
            DirichletParams((1.0, 0.0, 2.0))

    def test_symmetric_means(self):
        draws = sample_dirichlet(DirichletParams((1, 1, 1)), RngStream(1), 100_000)
        np.testing.assert_allclose(draws.mean(axis=0), 1 / 3, atol=0.01)

    def test_posterior_shaped_mean(self):
        draws = sample_dirichlet(DirichletParams((71, 66, 367)), RngStream(2), 100_000)
        assert draws[:, 0].mean() == pytest.approx(71 / 504, abs=0.005)

    def test_moments_within_three_standard_errors(self):
        params = DirichletParams((2.5, 7.0, 0.8, 12.0))
        a = np.asarray(params.alphas)
        a0 = a.sum()
        mean = a / a0
        var = mean * (1 - mean) / (a0 + 1)
        draws = sample_dirichlet(params, RngStream(9), 100_000)
        se = np.sqrt(var / draws.shape[0])
        assert np.all(np.abs(draws.mean(axis=0) - mean) < 3 * se)

    def test_simplex(self):
        rng = np.random.default_rng(0)
        for i in range(10_000 // 100):
            alphas = rng.uniform(0.05, 50, size=rng.integers(2, 6))
            d = sample_dirichlet(DirichletParams(tuple(alphas)), RngStream(0, i), 100)
            assert np.all(d > 0)
            np.testing.assert_allclose(d.sum(axis=1), 1.0, atol=1e-12)

    def test_deterministic(self):
        p = DirichletParams((3, 4, 5))
        np.testing.assert_array_equal(
            sample_dirichlet(p, RngStream(5, 1), 60_000), sample_dirichlet(p, RngStream(5, 1), 60_000)
        )
