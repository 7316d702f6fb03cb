"""Maximum-likelihood estimation of (alpha, rho).

The log-likelihood of a sample with frequency table c is
sum_j c_j log q_j (including the zero class).  The pmf derivatives obey
exact convolution recursions seeded at k = 0 by

    dq_0/dalpha = -exp(-alpha),  d2q_0/dalpha2 = exp(-alpha),

all rho-derivatives of q_0 vanishing.  Writing * for discrete
convolution, p for the clone-size law and ' for d/drho:

    dq/dalpha  = p * q - q
    dq/drho    = alpha (p' * q)
    d2q/da2    = p * (dq/da) - dq/da
    d2q/dadr   = p' * (q + alpha dq/da)
    d2q/dr2    = alpha (p'' * q + p' * dq/dr)

Newton iteration uses the raw step first and backtracks by halving when
the likelihood fails to increase or an iterate leaves (0, inf)^2, so the
fixed points are those of the undamped procedure.
"""

from __future__ import annotations

import math
import warnings as _warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import DomainError
from .lddist import DEFAULT_TABLE_BUDGET, LDParams, ld_pmf_table
from .results import EstimateResult
from .samples import Sample
from .yule import yule_derivative_tables

__all__ = [
    "MLOptions",
    "FisherInfo",
    "ld_loglik",
    "ld_score",
    "ld_hessian",
    "ml_fit",
    "winsorized_ml_fit",
    "winsorize",
    "fisher_info",
]

_NAN_COV = np.full((2, 2), np.nan)


@dataclass(frozen=True)
class MLOptions:
    max_iter: int = 100
    step_tol: float = 1e-8
    max_halvings: int = 30
    table_budget: int = DEFAULT_TABLE_BUDGET


def _conv(a: np.ndarray, b: np.ndarray, kmax: int) -> np.ndarray:
    return fftconvolve(a, b)[: kmax + 1]


def _q_table(params: LDParams, kmax: int, budget: int) -> np.ndarray:
    return ld_pmf_table(params, kmax, budget).q


def ld_derivative_tables(
    params: LDParams, kmax: int, budget: int = DEFAULT_TABLE_BUDGET
) -> dict[str, np.ndarray]:
    """All pmf tables needed by score and Hessian, for k = 0..kmax."""
    a = params.alpha
    q = _q_table(params, kmax, budget)
    p, dp, d2p = yule_derivative_tables(kmax, params.rho)
    qa = _conv(p, q, kmax) - q
    qr = a * _conv(dp, q, kmax)
    qaa = _conv(p, qa, kmax) - qa
    qar = _conv(dp, q + a * qa, kmax)
    qrr = a * (_conv(d2p, q, kmax) + _conv(dp, qr, kmax))
    return {"q": q, "qa": qa, "qr": qr, "qaa": qaa, "qar": qar, "qrr": qrr}


def _observed(sample: Sample, table: np.ndarray) -> np.ndarray:
    return table[sample.values]


def _loglik_from_q(sample: Sample, q: np.ndarray) -> float:
    qv = _observed(sample, q)
    if np.any(qv <= 0.0):
        _warnings.warn(
            "pmf underflowed to 0 at an observed count; log-likelihood is -inf",
            RuntimeWarning,
            stacklevel=3,
        )
        return float("-inf")
    return float(np.dot(sample.freqs, np.log(qv)))


def ld_loglik(
    sample: Sample, params: LDParams, budget: int = DEFAULT_TABLE_BUDGET
) -> float:
    """sum_j c_j log q_j over all observed counts, zeros included."""
    return _loglik_from_q(sample, _q_table(params, sample.max_count, budget))


def _score_hessian(sample: Sample, t: dict[str, np.ndarray]):
    qv = _observed(sample, t["q"])
    if np.any(qv <= 0.0):
        raise DomainError("pmf underflow at observed counts; score undefined")
    c = sample.freqs
    ra = _observed(sample, t["qa"]) / qv
    rr = _observed(sample, t["qr"]) / qv
    score = np.array([np.dot(c, ra), np.dot(c, rr)])
    h_aa = np.dot(c, _observed(sample, t["qaa"]) / qv - ra * ra)
    h_ar = np.dot(c, _observed(sample, t["qar"]) / qv - ra * rr)
    h_rr = np.dot(c, _observed(sample, t["qrr"]) / qv - rr * rr)
    hessian = np.array([[h_aa, h_ar], [h_ar, h_rr]])
    return score, hessian


def ld_score(
    sample: Sample, params: LDParams, budget: int = DEFAULT_TABLE_BUDGET
) -> np.ndarray:
    """Gradient of the log-likelihood in (alpha, rho)."""
    tables = ld_derivative_tables(params, sample.max_count, budget)
    return _score_hessian(sample, tables)[0]


def ld_hessian(
    sample: Sample, params: LDParams, budget: int = DEFAULT_TABLE_BUDGET
) -> np.ndarray:
    """Hessian of the log-likelihood in (alpha, rho)."""
    tables = ld_derivative_tables(params, sample.max_count, budget)
    return _score_hessian(sample, tables)[1]


def _default_init(sample: Sample) -> tuple[LDParams, tuple[str, ...]]:
    from .errors import EstimationError
    from .gf import gf_fit

    try:
        res, _ = gf_fit(sample)
        if (
            math.isfinite(res.alpha_hat)
            and math.isfinite(res.rho_hat)
            and res.alpha_hat > 0.0
            and res.rho_hat > 0.0
        ):
            return LDParams(res.alpha_hat, res.rho_hat), ()
    except EstimationError:
        pass
    z0 = sample.zero_fraction()
    alpha0 = -math.log(z0) if z0 > 0.0 else math.log(2.0 * sample.n)
    alpha0 = min(max(alpha0, 0.05), 50.0)
    return LDParams(alpha0, 1.0), ("gf initialization failed; used p0-style fallback",)


def ml_fit(
    sample: Sample,
    init: LDParams | None = None,
    opts: MLOptions = MLOptions(),
    method_tag: str = "ml",
) -> EstimateResult:
    """Newton iteration on the exact score and Hessian.

    Starts from the GF estimate unless ``init`` is given.  Every accepted
    step strictly increases the likelihood; failure to converge, an
    all-zero sample or a sample maximum past the table budget all yield a
    non-converged result rather than an exception.  The covariance is the
    inverse observed information at the optimum.
    """
    n = sample.n
    if sample.max_count == 0:
        return EstimateResult(
            0.0, float("nan"), _NAN_COV, method_tag, n,
            iterations=0, converged=False,
            warnings=("all counts are zero: alpha sits at the boundary 0 "
                      "and rho is unidentifiable",),
        )
    if sample.max_count + 1 > opts.table_budget:
        return EstimateResult(
            float("nan"), float("nan"), _NAN_COV, method_tag, n,
            iterations=0, converged=False,
            warnings=(f"sample maximum {sample.max_count} exceeds the "
                      f"{opts.table_budget}-entry pmf budget: maximum likelihood "
                      "is impractical here, use the GF estimator",),
        )

    warn: list[str] = []
    if init is None:
        init, init_warn = _default_init(sample)
        warn.extend(init_warn)
    if not (init.alpha > 0.0 and init.rho > 0.0):
        raise DomainError("ml_fit initialization must be strictly positive")

    kmax = sample.max_count
    budget = opts.table_budget
    theta = np.array([init.alpha, init.rho])
    ell = _loglik_from_q(sample, _q_table(LDParams(*theta), kmax, budget))
    converged = False
    iterations = 0
    hessian = None
    for iterations in range(1, opts.max_iter + 1):
        tables = ld_derivative_tables(LDParams(*theta), kmax, budget)
        score, hessian = _score_hessian(sample, tables)
        try:
            step = np.linalg.solve(hessian, score)
        except np.linalg.LinAlgError:
            warn.append("singular hessian; fell back to a gradient step")
            step = -score / max(1.0, float(np.abs(score).max()))
        if not np.all(np.isfinite(step)):
            warn.append("non-finite newton step; stopping")
            break
        if float(np.hypot(*step)) < opts.step_tol:
            converged = True
            break
        scale = 1.0
        accepted = False
        for _ in range(opts.max_halvings + 1):
            cand = theta - scale * step
            if np.all(cand > 0.0) and np.all(np.isfinite(cand)):
                ell_new = _loglik_from_q(sample, _q_table(LDParams(*cand), kmax, budget))
                if ell_new > ell:
                    theta, ell = cand, ell_new
                    accepted = True
                    break
            scale *= 0.5
        if not accepted:
            # no direction of increase resolvable: either at the optimum to
            # machine precision, or genuinely stuck
            converged = float(np.hypot(*step)) < math.sqrt(opts.step_tol)
            if not converged:
                warn.append("line search found no likelihood increase")
            break
        if float(np.hypot(*(scale * step))) < opts.step_tol:
            converged = True
            break
    if not converged and iterations >= opts.max_iter:
        warn.append(f"no convergence after {opts.max_iter} iterations")

    cov = _NAN_COV
    if hessian is not None:
        try:
            cov = np.linalg.inv(-hessian)
            if cov[0, 0] < 0.0 or cov[1, 1] < 0.0:
                warn.append("observed information is not positive definite")
                cov = _NAN_COV
        except np.linalg.LinAlgError:
            warn.append("observed information is singular")
    return EstimateResult(
        float(theta[0]), float(theta[1]), cov, method_tag, n,
        iterations=iterations, converged=converged, warnings=tuple(warn),
    )


def winsorize(sample: Sample, bound: int = 500) -> Sample:
    """Clip counts at ``bound``; the clipped values are treated as exact
    observations downstream (plain substitution, no censoring)."""
    bound = int(bound)
    if bound < 1:
        raise DomainError("winsorization bound must be >= 1")
    if sample.max_count <= bound:
        return sample
    clipped = int(np.sum(sample.counts > bound))
    return Sample(
        np.minimum(sample.counts, bound),
        notes=sample.notes + (f"winsorized: {clipped} values clipped at {bound}",),
    )


def winsorized_ml_fit(
    sample: Sample,
    bound: int = 500,
    init: LDParams | None = None,
    opts: MLOptions = MLOptions(),
) -> EstimateResult:
    """ML on the Winsorized sample, tagged ml-winsor."""
    clipped = winsorize(sample, bound)
    result = ml_fit(clipped, init=init, opts=opts, method_tag="ml-winsor")
    extra = tuple(note for note in clipped.notes if note not in sample.notes)
    if extra:
        result.warnings = result.warnings + extra
    return result


@dataclass
class FisherInfo:
    matrix: np.ndarray
    terms: int
    conservative: bool
    last_increment: float


def fisher_info(
    params: LDParams,
    rel_tol: float = 1e-6,
    window: int = 1000,
    max_terms: int = 200_000,
) -> FisherInfo:
    """Expected information by partial sums of the three series
    sum_k (dq_k/d.)(dq_k/d.) / q_k.

    The partial sums increase, so a truncated matrix understates the
    information and its inverse yields conservative intervals.  Summation
    stops once the relative growth of every entry over the last ``window``
    terms drops below ``rel_tol``; hitting ``max_terms`` first flags the
    result as conservative instead of failing.
    """
    if not (rel_tol > 0.0):
        raise DomainError("rel_tol must be positive")
    if params.alpha <= 0.0:
        raise DomainError("fisher information requires alpha > 0")
    kmax = min(2 * window, max_terms)
    while True:
        tables = ld_derivative_tables(params, kmax, budget=max_terms + 1)
        q, qa, qr = tables["q"], tables["qa"], tables["qr"]
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.vstack([qa * qa, qa * qr, qr * qr]) / q
        terms[:, q <= 0.0] = 0.0
        sums = terms.sum(axis=1)
        window_sums = terms[:, -window:].sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.abs(window_sums) / np.where(np.abs(sums) > 0, np.abs(sums), 1.0)
        last_rel = float(rel.max())
        if last_rel < rel_tol:
            conservative = False
            break
        if kmax >= max_terms:
            conservative = True
            break
        kmax = min(2 * kmax, max_terms)
    matrix = np.array([[sums[0], sums[1]], [sums[1], sums[2]]])
    return FisherInfo(matrix=matrix, terms=kmax + 1, conservative=conservative,
                      last_increment=last_rel)
