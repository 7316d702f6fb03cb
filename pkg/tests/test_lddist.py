import math

import numpy as np
import pytest
import scipy.stats

from ldstats import (
    BudgetError,
    DomainError,
    LDParams,
    ld_cdf,
    ld_pgf,
    ld_pmf_table,
    ld_quantile,
    ld_sample,
    ld_table_size,
)
from ldstats.yule import yule_tail

from conftest import make_rng

PARAM_GRID = [LDParams(a, r) for a in (1.0, 2.0, 4.0) for r in (0.5, 1.0, 2.0)]


def test_q0_is_exact():
    for params in PARAM_GRID:
        table = ld_pmf_table(params, 0)
        assert table.q[0] == math.exp(-params.alpha)


def test_q1_single_recursion_step():
    # q_1 = alpha * p_1 * q_0 with p_1 = rho/(rho+1)
    for params in PARAM_GRID:
        table = ld_pmf_table(params, 1)
        expected = params.alpha * params.rho / (params.rho + 1.0) * math.exp(-params.alpha)
        assert table.q[1] == pytest.approx(expected, rel=1e-12)


def test_jackpot_probability_ld_2_08():
    # probability that a 100-culture experiment contains a count above 1000
    table = ld_pmf_table(LDParams(2.0, 0.8), 1000)
    jackpot = 1.0 - float(np.sum(table.q)) ** 100
    assert jackpot == pytest.approx(0.53, abs=0.01)


def test_table_normalization_at_feasible_tail_tolerance():
    for params in PARAM_GRID:
        # tightest tolerance whose rule-K stays within a 20000-entry table
        eps = max(1e-6, 1.5 * params.alpha * yule_tail(20_000, params.rho))
        kmax = ld_table_size(params, eps)
        assert kmax <= 20_000
        q = ld_pmf_table(params, kmax).q
        total = float(np.sum(q))
        assert 1.0 - eps <= total <= 1.0 + 1e-12
        assert np.all(q >= 0.0)


def test_table_tail_bound_accounting():
    for params in PARAM_GRID:
        table = ld_pmf_table(params, 400)
        assert table.q.sum() + table.tail_bound == pytest.approx(1.0, abs=1e-9)


def test_table_budget_error():
    with pytest.raises(BudgetError):
        ld_pmf_table(LDParams(1.0, 1.0), 10**6)
    with pytest.raises(BudgetError):
        ld_pmf_table(LDParams(1.0, 1.0), 200, budget=100)


def test_pgf_endpoints():
    params = LDParams(2.0, 0.8)
    assert ld_pgf(params, 1.0) == 1.0
    assert ld_pgf(params, 0.0) == math.exp(-2.0)
    with pytest.raises(DomainError):
        ld_pgf(params, 1.5)


def test_pgf_closed_form_alpha1_rho1():
    # h_1(0.5) = 1 - log 2, so g(0.5) = exp(-log 2) = 1/2
    assert ld_pgf(LDParams(1.0, 1.0), 0.5) == pytest.approx(0.5, abs=1e-10)


def test_pgf_matches_series():
    kmax = 2000
    for params in PARAM_GRID:
        q = ld_pmf_table(params, kmax).q
        k = np.arange(kmax + 1)
        for z in (0.5, 0.9):
            series = float(np.dot(q, z**k))
            assert abs(ld_pgf(params, z) - series) < 1e-6


def test_infinite_divisibility():
    # LD(alpha/2) convolved with itself matches LD(alpha) elementwise
    for alpha, rho in ((2.0, 0.8), (1.0, 1.0), (4.0, 2.0)):
        half = ld_pmf_table(LDParams(alpha / 2.0, rho), 200).q
        full = ld_pmf_table(LDParams(alpha, rho), 200).q
        conv = np.convolve(half, half)[:201]
        assert np.max(np.abs(conv - full)) < 1e-8


def test_cdf_reaches_one_within_tail():
    params = LDParams(2.0, 1.0)
    table = ld_pmf_table(params, 5000)
    assert ld_cdf(params, 5000) == pytest.approx(1.0, abs=2.0 * table.tail_bound + 1e-12)
    assert ld_cdf(params, -1) == 0.0


def test_quantile_atom_at_zero():
    params = LDParams(2.0, 0.8)
    assert ld_quantile(params, 0.5 * math.exp(-2.0)) == 0
    assert ld_quantile(params, 0.0) == 0
    with pytest.raises(DomainError):
        ld_quantile(params, 1.0)


def test_quantile_median_matches_monte_carlo():
    params = LDParams(2.0, 0.8)
    sample = ld_sample(params, 10**6, make_rng(404))
    empirical_median = int(np.median(sample.counts))
    assert ld_quantile(params, 0.5) == empirical_median


def test_quantile_budget_refusal():
    # the 0.9999-quantile of a heavy tail with a tiny budget
    with pytest.raises(BudgetError):
        ld_quantile(LDParams(2.0, 0.5), 0.9999, budget=128)


def test_sample_alpha_zero_all_zeros():
    sample = ld_sample(LDParams(0.0, 1.0), 1000, make_rng(1))
    assert sample.max_count == 0
    assert sample.n == 1000


def test_sample_zero_frequency():
    params = LDParams(2.0, 0.8)
    n = 10**6
    sample = ld_sample(params, n, make_rng(2))
    p0 = math.exp(-2.0)
    sigma = math.sqrt(p0 * (1.0 - p0) / n)
    assert abs(sample.zero_fraction() - p0) < 3.0 * sigma


@pytest.mark.parametrize("alpha,rho", [(1.0, 1.0), (2.0, 0.8), (4.0, 2.0)])
def test_sampler_chi_square_against_recursion(alpha, rho):
    params = LDParams(alpha, rho)
    n = 10**5
    sample = ld_sample(params, n, make_rng(17, int(alpha * 10), int(rho * 10)))
    table = ld_pmf_table(params, 50)
    observed = np.bincount(np.minimum(sample.counts, 51), minlength=52)
    expected = n * np.append(table.q, table.tail_bound)
    # merge sparse cells so the chi-square approximation holds
    small = expected < 5.0
    if small.any():
        obs = np.append(observed[~small], observed[small].sum())
        exp = np.append(expected[~small], expected[small].sum())
    else:
        obs, exp = observed, expected
    stat = float(np.sum((obs - exp) ** 2 / exp))
    pvalue = float(scipy.stats.chi2.sf(stat, df=len(obs) - 1))
    assert pvalue > 0.001


def test_sample_deterministic_given_seed():
    params = LDParams(2.0, 1.0)
    a = ld_sample(params, 500, make_rng(9)).counts
    b = ld_sample(params, 500, make_rng(9)).counts
    assert np.array_equal(a, b)


def test_params_validation():
    with pytest.raises(DomainError):
        LDParams(-1.0, 1.0)
    with pytest.raises(DomainError):
        LDParams(1.0, 0.0)
    LDParams(0.0, 1.0)  # degenerate point mass is allowed
