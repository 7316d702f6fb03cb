import math

import numpy as np
import pytest

from ldstats import (
    BracketError,
    DomainError,
    QuadSpec,
    RootSpec,
    digamma,
    find_root,
    integrate,
    log_gamma,
    trigamma,
)
from ldstats.errors import IntegrationError


def test_log_gamma_at_small_integers():
    assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-14)
    assert log_gamma(2.0) == pytest.approx(0.0, abs=1e-14)
    # factorial oracle: Gamma(5) = 4! = 24
    assert log_gamma(5.0) == pytest.approx(math.log(math.factorial(4)), rel=1e-13)


def test_log_gamma_recurrence_grid():
    for x in np.arange(0.1, 50.0, 0.7):
        assert abs(log_gamma(x + 1.0) - log_gamma(x) - math.log(x)) < 1e-12


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
def test_gamma_family_domain(bad):
    for fn in (log_gamma, digamma, trigamma):
        with pytest.raises(DomainError):
            fn(bad)


def test_digamma_recurrence():
    assert digamma(2.0) - digamma(1.0) == pytest.approx(1.0, abs=1e-12)


def test_digamma_at_one_series_oracle():
    # psi(1) = -gamma; Euler-Maclaurin tail on the harmonic series
    n = 200_000
    harmonic = np.sum(1.0 / np.arange(1, n + 1))
    gamma_const = harmonic - math.log(n) - 0.5 / n + 1.0 / (12.0 * n * n)
    assert digamma(1.0) == pytest.approx(-gamma_const, abs=1e-10)


def test_trigamma_at_one_series_oracle():
    # psi'(1) = sum 1/k^2; Euler-Maclaurin tail correction
    n = 200_000
    partial = np.sum(1.0 / np.arange(1, n + 1, dtype=float) ** 2)
    oracle = partial + 1.0 / n - 0.5 / n**2
    assert trigamma(1.0) == pytest.approx(oracle, abs=1e-10)
    assert trigamma(1.0) == pytest.approx(1.644934067, abs=5e-10)


def test_integrate_constants_and_monomials():
    assert integrate(lambda v: 1.0, 0.0, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert integrate(lambda v: v, 0.0, 1.0) == pytest.approx(0.5, abs=1e-12)


def test_integrate_rational_antiderivative_oracle():
    # d/dv [v - log(1+v)] = v/(1+v)
    assert integrate(lambda v: v / (1.0 + v), 0.0, 1.0) == pytest.approx(
        1.0 - math.log(2.0), abs=1e-12
    )


def test_integrate_polynomials_up_to_degree_five_exact():
    rng = np.random.default_rng(11)
    for _ in range(5):
        coeffs = rng.uniform(-3, 3, size=6)
        exact = sum(c / (k + 1) for k, c in enumerate(coeffs))
        value = integrate(lambda v: sum(c * v**k for k, c in enumerate(coeffs)), 0.0, 1.0)
        assert value == pytest.approx(exact, abs=1e-10)


def test_integrate_endpoint_singularity():
    # v^(rho-1) with rho = 0.3: integrable endpoint singularity
    rho = 0.3
    value = integrate(lambda v: v ** (rho - 1.0), 0.0, 1.0)
    assert value == pytest.approx(1.0 / rho, abs=1e-9)


def test_integrate_budget_error_carries_estimate():
    spec = QuadSpec(abs_tol=1e-13, max_subdivisions=2)
    with pytest.raises(IntegrationError) as info:
        integrate(lambda v: math.sin(50.0 * v) ** 2 / math.sqrt(abs(v) + 1e-12), 0.0, 1.0, spec)
    assert info.value.estimate is not None


def test_find_root_linear():
    assert find_root(lambda x: x - 2.0, RootSpec(0.0, 10.0)) == pytest.approx(2.0, abs=1e-9)


def test_find_root_sqrt2():
    root = find_root(lambda x: x * x - 2.0, RootSpec(0.0, 2.0))
    assert root == pytest.approx(math.sqrt(2.0), abs=1e-9)
    assert root == pytest.approx(1.41421356, abs=1e-7)


def test_find_root_exp():
    assert find_root(lambda x: math.exp(x) - 1.0, RootSpec(-1.0, 1.0)) == pytest.approx(
        0.0, abs=1e-9
    )


def test_find_root_bracket_property():
    f = lambda x: math.cos(x) - x  # noqa: E731
    spec = RootSpec(0.0, 1.5, tol=1e-10)
    r = find_root(f, spec)
    assert abs(f(r)) < 1e-9
    assert math.copysign(1.0, f(spec.lo)) * math.copysign(1.0, f(r + spec.tol)) <= 0.0


def test_find_root_no_sign_change():
    with pytest.raises(BracketError):
        find_root(lambda x: x * x + 1.0, RootSpec(-1.0, 1.0))


def test_spec_validation():
    with pytest.raises(DomainError):
        QuadSpec(abs_tol=0.0)
    with pytest.raises(DomainError):
        RootSpec(1.0, 0.0)
