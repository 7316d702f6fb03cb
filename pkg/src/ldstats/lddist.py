"""The Luria-Delbruck distribution LD(alpha, rho).

Compound Poisson (number of mutations, mean alpha) of Yule clone sizes
(tail exponent rho).  Provides the exact pmf through the convolution
recursion

    q_0 = exp(-alpha),   q_k = (alpha / k) * sum_{i=1..k} i p_i q_{k-i},

the probability generating function exp(alpha (h(z) - 1)), cdf/quantile
wrappers, and the exact two-stage sampler.  The recursion is O(K^2), so a
configurable entry budget guards against tables that should be handled by
the generating-function estimators instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, DomainError
from .numerics import QuadSpec
from .samples import Sample
from .yule import yule_pgf, yule_pmf_table, yule_sample

__all__ = [
    "LDParams",
    "PmfTable",
    "DEFAULT_TABLE_BUDGET",
    "ld_pmf_table",
    "ld_pgf",
    "ld_cdf",
    "ld_quantile",
    "ld_sample",
    "ld_table_size",
]

# Hard ceiling on pmf table entries: K = 1e5 keeps the O(K^2) recursion
# around 1e10 flops, the practical limit before GF estimation takes over.
DEFAULT_TABLE_BUDGET = 100_000

_CLONE_CAP = np.int64(2**62)


@dataclass(frozen=True)
class LDParams:
    """Parameter pair: expected number of mutations and relative fitness.

    alpha = 0 is the degenerate point mass at zero; it is accepted (the
    sampler and pmf handle it exactly) but estimators require alpha > 0.
    """

    alpha: float
    rho: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha >= 0.0):
            raise DomainError(f"alpha must be finite and >= 0, got {self.alpha!r}")
        if not (math.isfinite(self.rho) and self.rho > 0.0):
            raise DomainError(f"rho must be finite and > 0, got {self.rho!r}")


@dataclass(frozen=True)
class PmfTable:
    """Probabilities q_0..q_K of LD(alpha, rho) plus residual tail mass."""

    params: LDParams
    q: np.ndarray
    tail_bound: float

    @property
    def kmax(self) -> int:
        return len(self.q) - 1

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.q)


def _check_budget(kmax: int, budget: int) -> None:
    if kmax + 1 > budget:
        raise BudgetError(
            f"pmf table of size {kmax + 1} exceeds the budget of {budget} entries; "
            "the O(K^2) recursion is impractical here, use the GF estimators instead"
        )


def ld_pmf_table(
    params: LDParams, kmax: int, budget: int = DEFAULT_TABLE_BUDGET
) -> PmfTable:
    """Exact probabilities q_0..q_kmax by the convolution recursion.

    Convolutions run in plain probability space; numpy dot products use
    pairwise summation, which bounds accumulated rounding comparably to
    compensated summation for these non-negative terms.
    """
    if kmax < 0:
        raise DomainError("kmax must be >= 0")
    _check_budget(kmax, budget)
    a = params.alpha
    q = np.zeros(kmax + 1)
    q[0] = math.exp(-a)
    if kmax >= 1 and a > 0.0:
        w = yule_pmf_table(kmax, params.rho)
        w *= np.arange(kmax + 1)  # w_i = i * p_i
        for k in range(1, kmax + 1):
            q[k] = (a / k) * np.dot(w[k:0:-1], q[:k])
    tail = 1.0 - float(np.sum(q))
    return PmfTable(params=params, q=q, tail_bound=max(tail, 0.0))


def ld_table_size(params: LDParams, eps: float) -> int:
    """Table length needed for tail mass below ``eps``, by the one-big-jump
    heavy-tail rule P(X > K) ~ alpha * Gamma(rho+1) * K^(-rho), with a 25%
    tail-mass margin absorbing the subleading corrections the power law
    ignores.

    Purely advisory: the result can dwarf any practical budget for small
    rho, in which case the caller should fall back to GF methods.
    """
    if not (0.0 < eps < 1.0):
        raise DomainError("eps must be in (0, 1)")
    if params.alpha == 0.0:
        return 0
    r = params.rho
    target = eps / 1.25
    return max(1, math.ceil((params.alpha * math.gamma(r + 1.0) / target) ** (1.0 / r)))


def ld_pgf(params: LDParams, z: float, spec: QuadSpec = QuadSpec()) -> float:
    """g(z) = exp(alpha * (h(z) - 1)) for z in [0, 1]."""
    z = float(z)
    if not (0.0 <= z <= 1.0):
        raise DomainError(f"pgf argument z must lie in [0, 1], got {z!r}")
    if params.alpha == 0.0:
        return 1.0
    if z == 0.0:
        return math.exp(-params.alpha)
    if z == 1.0:
        return 1.0
    return math.exp(params.alpha * (yule_pgf(z, params.rho, spec) - 1.0))


def ld_cdf(
    params: LDParams, k: int, budget: int = DEFAULT_TABLE_BUDGET
) -> float:
    """P(X <= k), exact up to the table's residual tail."""
    if k < 0:
        return 0.0
    table = ld_pmf_table(params, int(k), budget)
    return float(np.sum(table.q))


def ld_quantile(
    params: LDParams, u: float, budget: int = DEFAULT_TABLE_BUDGET
) -> int:
    """Smallest k with cdf(k) >= u; grows the table geometrically on demand
    and propagates the budget error when u sits too deep in the tail."""
    u = float(u)
    if not (0.0 <= u < 1.0):
        raise DomainError(f"quantile level must lie in [0, 1), got {u!r}")
    if u <= math.exp(-params.alpha):
        return 0
    kmax = 64
    while True:
        cdf = ld_pmf_table(params, kmax, budget).cdf()
        hit = int(np.searchsorted(cdf, u, side="left"))
        if hit < len(cdf):
            return hit
        if kmax + 1 >= budget:
            raise BudgetError(
                f"quantile at level {u:g} lies beyond the {budget}-entry table budget"
            )
        kmax = min(kmax * 2, budget - 1)


def ld_sample(params: LDParams, n: int, rng: np.random.Generator) -> Sample:
    """n independent draws: each is a Poisson(alpha) number of Yule clones
    summed, alpha = 0 giving all zeros."""
    n = int(n)
    if n < 1:
        raise DomainError("sample size must be >= 1")
    totals = np.zeros(n, dtype=np.int64)
    if params.alpha > 0.0:
        counts = rng.poisson(params.alpha, n)
        total_clones = int(counts.sum())
        if total_clones > 0:
            clones = yule_sample(params.rho, rng, total_clones)
            ends = np.cumsum(counts)
            starts = ends - counts
            nz = counts > 0
            sums = np.add.reduceat(clones, starts[nz])
            # int64 wraparound is only reachable via multiple astronomically
            # large clones in one culture; saturate rather than wrap
            sums = np.where(sums < 0, _CLONE_CAP, np.minimum(sums, _CLONE_CAP))
            totals[nz] = sums
    return Sample(totals)
