import math

import numpy as np
import pytest

from ldstats import (
    DomainError,
    Fitness,
    QuadSpec,
    yule_d2p_drho2,
    yule_dp_drho,
    yule_pgf,
    yule_pgf_drho,
    yule_pmf,
    yule_pmf_table,
    yule_sample,
    yule_tail,
)
from ldstats.yule import yule_derivative_tables, yule_table_size

RHO_GRID = [0.5, 0.8, 1.0, 1.5, 2.0]


def closed_form_pgf_rho1(z: float) -> float:
    # independent oracle at rho = 1: sum z^k / (k (k+1)) = 1 + (1-z) log(1-z) / z
    return 1.0 + (1.0 - z) * math.log(1.0 - z) / z


def test_pmf_k1_closed_form():
    for rho in RHO_GRID:
        assert yule_pmf(1, rho) == pytest.approx(rho / (rho + 1.0), rel=1e-12)


def test_pmf_rho1_reciprocal_product():
    # p_k = 1/(k(k+1)) at rho = 1
    assert yule_pmf(2, 1.0) == pytest.approx(1.0 / 6.0, rel=1e-12)
    for k in (1, 3, 10, 100):
        assert yule_pmf(k, 1.0) == pytest.approx(1.0 / (k * (k + 1)), rel=1e-11)


def test_pmf_table_telescoping_sum():
    kmax = 10**6
    p = yule_pmf_table(kmax, 1.0)
    assert float(p.sum()) == pytest.approx(1.0 - 1.0 / (kmax + 1), abs=1e-10)


def test_pmf_table_matches_log_beta_form():
    for rho in (0.5, 2.0):
        p = yule_pmf_table(50, rho)
        for k in (1, 2, 17, 50):
            assert p[k] == pytest.approx(yule_pmf(k, rho), rel=1e-12)


def test_exact_tail_formula():
    # sum_{k>K} p_k = rho * B(rho, K+1); telescoping check at rho = 1
    assert yule_tail(100, 1.0) == pytest.approx(1.0 / 101.0, rel=1e-12)
    for rho in RHO_GRID:
        p = yule_pmf_table(2000, rho)
        assert yule_tail(2000, rho) == pytest.approx(1.0 - p.sum(), rel=1e-6)


def test_normalization_with_tail_rule():
    for rho in RHO_GRID:
        # largest tolerance the power-law rule can honor within 1e6 entries
        eps = max(1e-9, 2.0 * yule_tail(10**6, rho))
        kmax = yule_table_size(eps, rho)
        assert kmax <= 10**6
        p = yule_pmf_table(kmax, rho)
        tail = yule_tail(kmax, rho)
        assert tail < eps
        assert p.sum() + tail >= 1.0 - 1e-9
        assert p.sum() + tail == pytest.approx(1.0, abs=1e-9)


def test_pgf_endpoints():
    for rho in RHO_GRID:
        assert yule_pgf(0.0, rho) == 0.0
        assert yule_pgf(1.0, rho) == 1.0


def test_pgf_closed_form_rho1():
    # antiderivative oracle: h_1(0.5) = 0.5 * integral v/(0.5+0.5v) dv
    #                                 = 0.5 * 2 (1 - log 2) = 1 - log 2
    assert yule_pgf(0.5, 1.0) == pytest.approx(1.0 - math.log(2.0), abs=1e-10)
    for z in (0.1, 0.3, 0.7, 0.9):
        assert yule_pgf(z, 1.0) == pytest.approx(closed_form_pgf_rho1(z), abs=1e-9)


def test_pgf_matches_series():
    kmax = 100_000
    for rho in (0.5, 1.0, 2.0):
        p = yule_pmf_table(kmax, rho)
        k = np.arange(kmax + 1)
        for z in (0.3, 0.6, 0.9):
            series = float(np.dot(p, z**k))
            assert abs(yule_pgf(z, rho) - series) < 1e-8


def test_pgf_monotone_in_z():
    zs = np.linspace(0.0, 1.0, 21)
    for rho in (0.5, 2.0):
        vals = [yule_pgf(z, rho) for z in zs]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
        assert all(0.0 <= v <= 1.0 for v in vals)


def test_pgf_domain():
    with pytest.raises(DomainError):
        yule_pgf(-0.1, 1.0)
    with pytest.raises(DomainError):
        yule_pgf(1.1, 1.0)
    with pytest.raises(DomainError):
        yule_pmf(0, 1.0)


def test_pgf_drho_vanishes_at_endpoints():
    for rho in RHO_GRID:
        assert yule_pgf_drho(0.0, rho) == 0.0
        assert yule_pgf_drho(1.0, rho) == 0.0


def test_pgf_drho_finite_difference():
    # the tight quadrature keeps oracle noise (abs_tol / 2h) below the
    # comparison tolerance
    spec = QuadSpec(abs_tol=1e-13)
    h = 1e-5
    for rho in (0.5, 1.0, 2.0):
        for z in (0.2, 0.5, 0.8):
            fd = (yule_pgf(z, rho + h, spec) - yule_pgf(z, rho - h, spec)) / (2.0 * h)
            assert yule_pgf_drho(z, rho, spec) == pytest.approx(fd, rel=1e-6)


def test_dp_drho_k1_closed_form():
    # d/drho [rho/(rho+1)] = 1/(rho+1)^2
    for rho in RHO_GRID:
        assert yule_dp_drho(1, rho) == pytest.approx(1.0 / (rho + 1.0) ** 2, rel=1e-10)


def test_dp_drho_sums_to_zero():
    kmax = 100_000
    for rho in (0.8, 1.0, 1.5):
        _, dp, _ = yule_derivative_tables(kmax, rho)
        tail = yule_tail(kmax, rho)
        # the truncated derivative sum is the rho-derivative of the tail,
        # of size ~ tail * log(kmax)
        assert abs(dp.sum()) <= 2.0 * tail * (1.0 + math.log(kmax))


def test_derivatives_match_finite_differences():
    h = 1e-5
    for rho in (0.5, 1.0, 2.0):
        for k in (1, 2, 5, 20, 100):
            fd1 = (yule_pmf(k, rho + h) - yule_pmf(k, rho - h)) / (2.0 * h)
            assert yule_dp_drho(k, rho) == pytest.approx(fd1, rel=1e-5)
            fd2 = (
                yule_dp_drho(k, rho + h) - yule_dp_drho(k, rho - h)
            ) / (2.0 * h)
            assert yule_d2p_drho2(k, rho) == pytest.approx(fd2, rel=1e-5)


def test_derivative_tables_match_pointwise():
    p, dp, d2p = yule_derivative_tables(200, 0.8)
    for k in (1, 3, 40, 200):
        assert p[k] == pytest.approx(yule_pmf(k, 0.8), rel=1e-12)
        assert dp[k] == pytest.approx(yule_dp_drho(k, 0.8), rel=1e-10)
        assert d2p[k] == pytest.approx(yule_d2p_drho2(k, 0.8), rel=1e-10)


def test_fitness_validation():
    with pytest.raises(DomainError):
        Fitness(0.0)
    with pytest.raises(DomainError):
        Fitness(float("nan"))
    assert yule_pmf(1, Fitness(1.0)) == pytest.approx(0.5, rel=1e-12)


def test_sampler_empirical_pmf():
    rng = np.random.default_rng(101)
    draws = yule_sample(1.0, rng, size=10**6)
    p = yule_pmf_table(20, 1.0)
    for k in range(1, 21):
        emp = np.mean(draws == k)
        assert abs(emp - p[k]) < 3e-3


def test_sampler_success_probability_one_branch():
    class FixedRng:
        def __init__(self):
            self.calls = 0

        def random(self, n):
            self.calls += 1
            # first call drives V = U^(1/rho) to 1, second the geometric draw
            return np.full(n, 1.0 - 1e-17) if self.calls == 1 else np.full(n, 0.5)

    draws = yule_sample(1.0, FixedRng(), size=4)
    assert np.all(draws == 1)


def test_sampler_mean_at_rho2():
    # Yule mean rho/(rho-1) = 2 at rho = 2
    rng = np.random.default_rng(7)
    draws = yule_sample(2.0, rng, size=10**6)
    assert abs(draws.mean() - 2.0) < 0.01


def test_sampler_scalar_mode():
    rng = np.random.default_rng(3)
    value = yule_sample(1.0, rng)
    assert isinstance(value, int) and value >= 1
