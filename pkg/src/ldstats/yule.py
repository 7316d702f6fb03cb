"""Yule clone-size distribution with fitness parameter rho.

A mutant clone that has developed for an exponential time has a
geometrically distributed size; mixing over the exponential developing
time gives the Yule law on {1, 2, ...}:

    p_k = rho * B(rho + 1, k)

with B the Beta function.  rho = nu/mu is the relative fitness of normal
cells versus mutants and is also the heavy-tail exponent: p_k decays like
k^(-(rho+1)).  This module provides the probabilities, the probability
generating function h(z) and its rho-derivative, closed-form derivative
tables used by the likelihood recursions, and an O(1) exact sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .numerics import QuadSpec, digamma, integrate, log_beta, log_gamma, trigamma

__all__ = [
    "Fitness",
    "yule_pmf",
    "yule_pmf_table",
    "yule_tail",
    "yule_table_size",
    "yule_pgf",
    "yule_pgf_drho",
    "yule_dp_drho",
    "yule_d2p_drho2",
    "yule_derivative_tables",
    "yule_sample",
]

# int64 ceiling for sampled clone sizes; far above any observable count
# (published samples top out near 1.3e15) and irrelevant to z**X statistics.
_CLONE_CAP = float(2**62)


@dataclass(frozen=True)
class Fitness:
    """Relative fitness rho = nu/mu of normal cells versus mutants."""

    rho: float

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho > 0.0):
            raise DomainError(f"fitness rho must be finite and > 0, got {self.rho!r}")


def _rho_value(rho) -> float:
    """Accept either a Fitness or a bare positive float."""
    r = rho.rho if isinstance(rho, Fitness) else float(rho)
    if not (math.isfinite(r) and r > 0.0):
        raise DomainError(f"rho must be finite and > 0, got {rho!r}")
    return r


def _check_k(k: int) -> int:
    k = int(k)
    if k < 1:
        raise DomainError(f"clone size k must be >= 1, got {k}")
    return k


def yule_pmf(k: int, rho) -> float:
    """P(clone size = k), k >= 1, computed in log space."""
    k = _check_k(k)
    r = _rho_value(rho)
    return math.exp(math.log(r) + log_beta(r + 1.0, k))


def yule_pmf_table(kmax: int, rho) -> np.ndarray:
    """Vector p[0..kmax] with p[0] = 0, built by the stable ratio recurrence
    p_{k+1} = p_k * k / (rho + k + 1)."""
    if kmax < 0:
        raise DomainError("kmax must be >= 0")
    r = _rho_value(rho)
    p = np.zeros(kmax + 1)
    if kmax >= 1:
        p[1] = r / (r + 1.0)
        if kmax >= 2:
            k = np.arange(1, kmax)
            p[2:] = p[1] * np.cumprod(k / (r + k + 1.0))
    return p


def yule_tail(kmax: int, rho) -> float:
    """Exact tail mass P(clone size > kmax) = rho * B(rho, kmax + 1)."""
    r = _rho_value(rho)
    if kmax <= 0:
        return 1.0
    return math.exp(log_gamma(r + 1.0) + log_gamma(kmax + 1.0) - log_gamma(kmax + 1.0 + r))


def yule_table_size(eps: float, rho) -> int:
    """Smallest table length whose tail mass is below ``eps``.

    Seeded by the power-law asymptotics p_k ~ Gamma(rho+1) rho k^(-(rho+1))
    and then trimmed against the exact tail formula.  The result can be
    astronomically large for small rho; callers enforce their own budgets.
    """
    r = _rho_value(rho)
    if not (0.0 < eps < 1.0):
        raise DomainError("eps must be in (0, 1)")
    k = max(1, math.ceil((math.gamma(r + 1.0) / eps) ** (1.0 / r)))
    # the power-law bound overshoots slightly; walk back while still valid
    while k > 1 and yule_tail(k - 1, r) < eps:
        k -= 1
    while yule_tail(k, r) >= eps:
        k += 1
    return k


def _check_z(z: float) -> float:
    z = float(z)
    if not (0.0 <= z <= 1.0):
        raise DomainError(f"pgf argument z must lie in [0, 1], got {z!r}")
    return z


def yule_pgf(z: float, rho, spec: QuadSpec = QuadSpec()) -> float:
    """h(z) = rho * z * integral_0^1 v^rho / (1 - z + z v) dv."""
    z = _check_z(z)
    r = _rho_value(rho)
    if z == 0.0:
        return 0.0
    if z == 1.0:
        return 1.0
    one_minus_z = 1.0 - z

    def integrand(v: float) -> float:
        return v**r / (one_minus_z + z * v)

    return r * z * integrate(integrand, 0.0, 1.0, spec)


def yule_pgf_drho(z: float, rho, spec: QuadSpec = QuadSpec()) -> float:
    """dh/drho = z * integral_0^1 v^rho (1 + rho log v) / (1 - z + z v) dv.

    Vanishes identically at z = 0 and z = 1 (h(1) = 1 for every rho).
    """
    z = _check_z(z)
    r = _rho_value(rho)
    if z == 0.0 or z == 1.0:
        return 0.0
    one_minus_z = 1.0 - z

    def integrand(v: float) -> float:
        if v <= 0.0:
            return 0.0
        return v**r * (1.0 + r * math.log(v)) / (one_minus_z + z * v)

    return z * integrate(integrand, 0.0, 1.0, spec)


def _dk(k: int, r: float) -> float:
    # d log p_k / d rho
    return 1.0 / r + digamma(r + 1.0) - digamma(r + k + 1.0)


def yule_dp_drho(k: int, rho) -> float:
    """First rho-derivative of p_k via log-differentiation: p_k * D_k with
    D_k = 1/rho + psi(rho+1) - psi(rho+k+1)."""
    k = _check_k(k)
    r = _rho_value(rho)
    return yule_pmf(k, r) * _dk(k, r)


def yule_d2p_drho2(k: int, rho) -> float:
    """Second rho-derivative: p_k * (D_k^2 - 1/rho^2 + psi'(rho+1) - psi'(rho+k+1))."""
    k = _check_k(k)
    r = _rho_value(rho)
    d = _dk(k, r)
    dprime = -1.0 / r**2 + trigamma(r + 1.0) - trigamma(r + k + 1.0)
    return yule_pmf(k, r) * (d * d + dprime)


def yule_derivative_tables(kmax: int, rho) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tables (p, dp/drho, d2p/drho2) for k = 0..kmax in O(kmax).

    D_k and its rho-derivative obey one-term recurrences through the
    digamma/trigamma shift identities, so no special function is evaluated
    past k = 1.
    """
    r = _rho_value(rho)
    p = yule_pmf_table(kmax, r)
    dp = np.zeros(kmax + 1)
    d2p = np.zeros(kmax + 1)
    if kmax >= 1:
        k = np.arange(1, kmax + 1)
        # D_k = D_1 - sum_{j=2..k} 1/(rho+j), vectorized as a cumulative sum
        increments = np.zeros(kmax)
        increments[0] = _dk(1, r)
        if kmax >= 2:
            increments[1:] = -1.0 / (r + np.arange(2, kmax + 1))
        d = np.cumsum(increments)
        dprime_incr = np.zeros(kmax)
        dprime_incr[0] = -1.0 / r**2 + trigamma(r + 1.0) - trigamma(r + 2.0)
        if kmax >= 2:
            dprime_incr[1:] = 1.0 / (r + np.arange(2, kmax + 1)) ** 2
        dprime = np.cumsum(dprime_incr)
        dp[1:] = p[1:] * d
        d2p[1:] = p[1:] * (d * d + dprime)
    return p, dp, d2p


def yule_sample(rho, rng: np.random.Generator, size=None):
    """Exact clone-size draws: V = U^(1/rho) (the law of exp(-mu * s) for an
    exponential developing time), then a geometric on {1, 2, ...} with
    success probability V by inversion, O(1) per draw regardless of size.

    Returns a Python int for size=None, otherwise an int64 array.  Draws
    beyond the int64 range are capped at 2^62.
    """
    r = _rho_value(rho)
    n = 1 if size is None else int(size)
    u = rng.random(n)
    v = u ** (1.0 / r)
    u2 = 1.0 - rng.random(n)  # in (0, 1], keeps the log finite
    with np.errstate(divide="ignore", invalid="ignore"):
        log_q = np.log1p(-v)  # log(1 - V), 0 only when V underflows to 0
        y = 1.0 + np.floor(np.log(u2) / log_q)
    y = np.where(log_q == 0.0, _CLONE_CAP, y)  # V underflowed: astronomically large clone
    y = np.where(v >= 1.0, 1.0, y)  # V = 1: success on the first trial
    y = np.minimum(y, _CLONE_CAP)
    out = y.astype(np.int64)
    if size is None:
        return int(out[0])
    return out
