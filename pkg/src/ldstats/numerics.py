"""Shared numerical kernels: log-gamma family, adaptive quadrature and
bracketed root finding.

Everything here is a thin, contract-enforcing wrapper over the scipy
routines (QUADPACK Gauss-Kronrod quadrature, Brent root bracketing,
log-gamma/psi special functions).  All functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import scipy.integrate
import scipy.optimize
import scipy.special

from .errors import BracketError, DomainError, IntegrationError

__all__ = [
    "QuadSpec",
    "RootSpec",
    "log_gamma",
    "log_beta",
    "digamma",
    "trigamma",
    "integrate",
    "find_root",
]


@dataclass(frozen=True)
class QuadSpec:
    """Accuracy budget for adaptive quadrature."""

    abs_tol: float = 1e-10
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0):
            raise DomainError("abs_tol must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class RootSpec:
    """Bracket and accuracy budget for root finding."""

    lo: float
    hi: float
    tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise DomainError("root bracket requires lo < hi")
        if not (self.tol > 0):
            raise DomainError("tol must be positive")


def _check_positive(x: float, name: str) -> float:
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"{name} requires a positive finite argument, got {x!r}")
    return x


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    return float(scipy.special.gammaln(_check_positive(x, "log_gamma")))


def log_beta(a: float, b: float) -> float:
    """ln B(a, b) computed in log space so large second arguments survive."""
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b)


def digamma(x: float) -> float:
    """psi(x) for x > 0."""
    return float(scipy.special.psi(_check_positive(x, "digamma")))


def trigamma(x: float) -> float:
    """psi'(x) for x > 0."""
    return float(scipy.special.polygamma(1, _check_positive(x, "trigamma")))


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadSpec = QuadSpec(),
) -> float:
    """Adaptive Gauss-Kronrod integral of ``f`` over [a, b].

    Integrable endpoint singularities (the v^(rho-1) type that shows up in
    the clone-size generating function near z = 1) are resolved by the
    adaptive subdivision.  Raises :class:`IntegrationError` carrying the
    best estimate when the subdivision budget is exhausted.
    """
    result = scipy.integrate.quad(
        f,
        a,
        b,
        epsabs=spec.abs_tol,
        epsrel=max(1e-13, 0.01 * spec.abs_tol),
        limit=spec.max_subdivisions,
        full_output=True,
    )
    value, err = result[0], result[1]
    if len(result) >= 4:  # quad appends a message when ier != 0
        raise IntegrationError(
            f"quadrature did not reach abs_tol={spec.abs_tol:g} "
            f"within {spec.max_subdivisions} subdivisions: {result[3]}",
            estimate=float(value),
            error=float(err),
        )
    return float(value)


def find_root(f: Callable[[float], float], spec: RootSpec) -> float:
    """Root of a sign-changing function on [lo, hi] by Brent bracketing."""
    flo, fhi = f(spec.lo), f(spec.hi)
    if flo == 0.0:
        return float(spec.lo)
    if fhi == 0.0:
        return float(spec.hi)
    if math.copysign(1.0, flo) == math.copysign(1.0, fhi):
        raise BracketError(
            f"no sign change on bracket [{spec.lo:g}, {spec.hi:g}]: "
            f"f(lo)={flo:g}, f(hi)={fhi:g}"
        )
    return float(
        scipy.optimize.brentq(
            f, spec.lo, spec.hi, xtol=spec.tol, maxiter=spec.max_iter
        )
    )
