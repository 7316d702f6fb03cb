"""Shared fixtures: seeded samples and the heavyweight Monte Carlo runs
that several test modules interrogate (computed once per session)."""

from __future__ import annotations

import numpy as np
import pytest

from ldstats import (
    EstimationError,
    LDParams,
    gf_fit,
    ld_sample,
    ml_fit,
)


def make_rng(*key: int) -> np.random.Generator:
    return np.random.default_rng(list(key))


@pytest.fixture(scope="session")
def gf_fits_ld21():
    """2000 seeded GF fits of LD(2, 1) at n = 100.

    Reused by the delta-method covariance oracle, the ellipse coverage
    check, and the acceptance suite.  Failed fits are kept as None.
    """
    params = LDParams(2.0, 1.0)
    fits = []
    for rep in range(2000):
        sample = ld_sample(params, 100, make_rng(2021, rep))
        try:
            res, _ = gf_fit(sample)
            fits.append(res)
        except EstimationError:
            fits.append(None)
    return fits


@pytest.fixture(scope="session")
def ml_gf_pairs_ld21():
    """1000 seeded samples of LD(2, 1) at n = 100 with both ML and GF fits.

    The ML side feeds the expected-information oracle; the first 100 pairs
    feed the cross-method acceptance check.
    """
    params = LDParams(2.0, 1.0)
    pairs = []
    for rep in range(1000):
        sample = ld_sample(params, 100, make_rng(2022, rep))
        try:
            gf_res, _ = gf_fit(sample)
        except EstimationError:
            gf_res = None
        ml_res = ml_fit(sample, init=None if gf_res is None else LDParams(
            max(gf_res.alpha_hat, 1e-3), max(gf_res.rho_hat, 1e-3)))
        pairs.append((ml_res, gf_res))
    return pairs


@pytest.fixture(scope="session")
def ml_fits_ld11():
    """1000 seeded ML fits of LD(1, 1) at n = 100 (error-table oracle)."""
    params = LDParams(1.0, 1.0)
    fits = []
    for rep in range(1000):
        sample = ld_sample(params, 100, make_rng(2023, rep))
        fits.append(ml_fit(sample))
    return fits
