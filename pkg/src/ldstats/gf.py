"""Generating-function estimation of (alpha, rho).

The empirical probability generating function g_n(z) = mean(z^X_i) damps
jackpots differentially across control points, which makes it a robust
summary of heavy-tailed mutant counts.  With three controls z1 < z2 and
z3 in (0, 1):

    y      = log g_n(z1) / log g_n(z2)
    rho    = inverse of the ratio curve f(rho) = (h(z1)-1)/(h(z2)-1) at y
    alpha  = log g_n(z3) / (h_rho(z3) - 1)

Large samples of large-alpha distributions push g_n(z) below machine
precision, so the sample is first rescaled by its q-quantile b, which is
algebraically the same as moving the controls to z^(1/b).

The asymptotic covariance comes from the delta method applied to the
trivariate CLT for (g_n(z1), g_n(z2), g_n(z3)), whose covariance is
c(zi, zj) = g(zi zj) - g(zi) g(zj).  After rescaling the controls are
data dependent, which the asymptotic argument does not literally cover;
simulated coverage nevertheless matches, and results carry a warning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.stats

from .errors import (
    DegenerateSampleError,
    DomainError,
    EstimationError,
    InferenceError,
    RatioOutOfRangeError,
)
from .lddist import LDParams, ld_pgf
from .numerics import QuadSpec, RootSpec, find_root
from .results import EstimateResult
from .samples import Sample
from .yule import yule_pgf, yule_pgf_drho

__all__ = [
    "GFControls",
    "GFDiagnostics",
    "ConfidenceEllipse",
    "WaldInference",
    "empirical_pgf",
    "ratio_f",
    "ratio_f_inverse",
    "gf_fit",
    "gf_covariance",
    "p0_estimate",
    "wald_inference",
]

# widest fitness bracket tried by the ratio inversion
_RHO_MIN, _RHO_MAX = 1e-6, 1e4


@dataclass(frozen=True)
class GFControls:
    """Control points and rescaling quantile.  The defaults are the
    compromise that minimized simulated mean squared errors across the
    practical (alpha, rho) range."""

    z1: float = 0.1
    z2: float = 0.9
    z3: float = 0.8
    q: float = 0.1

    def __post_init__(self):
        if not (0.0 < self.z1 < self.z2 < 1.0):
            raise DomainError("controls require 0 < z1 < z2 < 1")
        if not (0.0 < self.z3 < 1.0):
            raise DomainError("z3 must lie in (0, 1)")
        if not (0.0 < self.q < 1.0):
            raise DomainError("rescaling quantile q must lie in (0, 1)")


@dataclass(frozen=True)
class GFDiagnostics:
    """Scaling factor, empirical pgf values at the effective controls, and
    the log-ratio that was inverted."""

    b: float
    g_hat: tuple[float, float, float]
    y_hat: float


def empirical_pgf(sample, z: float) -> float:
    """mean(z^X_i), each term as exp(X_i log z) so counts of order 1e15
    underflow cleanly instead of overflowing."""
    counts = sample.counts if isinstance(sample, Sample) else np.asarray(sample)
    z = float(z)
    if not (0.0 < z <= 1.0):
        raise DomainError(f"empirical pgf needs z in (0, 1], got {z!r}")
    if z == 1.0:
        return 1.0
    return float(np.mean(np.exp(counts * math.log(z))))


def ratio_f(rho, z1: float, z2: float, spec: QuadSpec = QuadSpec()) -> float:
    """f(rho) = (h_rho(z1) - 1) / (h_rho(z2) - 1), strictly monotone in rho."""
    if not (0.0 < z1 < 1.0 and 0.0 < z2 < 1.0):
        raise DomainError("ratio controls must lie in (0, 1)")
    if z1 == z2:
        raise DomainError("ratio controls must differ")
    return (yule_pgf(z1, rho, spec) - 1.0) / (yule_pgf(z2, rho, spec) - 1.0)


def ratio_f_inverse(
    y: float,
    z1: float,
    z2: float,
    spec: QuadSpec = QuadSpec(),
    tol: float = 1e-10,
) -> float:
    """rho with f(rho) = y, by Brent bracketing on [1e-4, 100], widening
    tenfold per side up to [1e-6, 1e4] before giving up.

    Out-of-range values are reported, never clamped: clamping would bias
    Monte Carlo error summaries.
    """
    lo, hi = 1e-4, 100.0

    def g(r: float) -> float:
        return ratio_f(r, z1, z2, spec) - y

    glo, ghi = g(lo), g(hi)
    while glo * ghi > 0.0:
        moved = False
        if lo > _RHO_MIN:
            lo = max(lo / 10.0, _RHO_MIN)
            glo = g(lo)
            moved = True
        if glo * ghi > 0.0 and hi < _RHO_MAX:
            hi = min(hi * 10.0, _RHO_MAX)
            ghi = g(hi)
            moved = True
        if glo * ghi > 0.0 and not moved:
            raise RatioOutOfRangeError(
                f"log-ratio {y:g} is outside the attainable range of the "
                f"fitness curve on [{_RHO_MIN:g}, {_RHO_MAX:g}]",
                y=y,
                bracket=(_RHO_MIN, _RHO_MAX),
            )
    return find_root(g, RootSpec(lo, hi, tol=tol))


def _scale_factor(sample: Sample, q: float) -> tuple[float, bool]:
    # order statistic X_(ceil(q n)), floored at 1 to avoid degenerate rescaling
    idx = max(1, math.ceil(q * sample.n))
    value = float(np.partition(sample.counts, idx - 1)[idx - 1])
    return max(value, 1.0), value < 1.0


def _estimate_at(
    sample, z1: float, z2: float, z3: float, spec: QuadSpec
) -> tuple[float, float, tuple[float, float, float], float]:
    """Point estimates at explicit (already rescaled) controls."""
    g1 = empirical_pgf(sample, z1)
    g2 = empirical_pgf(sample, z2)
    g3 = empirical_pgf(sample, z3)
    if g1 >= 1.0 or g2 >= 1.0 or g3 >= 1.0:
        raise DegenerateSampleError(
            "empirical pgf equals 1 at a control point (no nonzero counts); "
            "use p0_estimate"
        )
    y = math.log(g1) / math.log(g2)
    rho = ratio_f_inverse(y, z1, z2, spec)
    alpha = math.log(g3) / (yule_pgf(z3, rho, spec) - 1.0)
    return alpha, rho, (g1, g2, g3), y


def gf_fit(
    sample: Sample,
    controls: GFControls = GFControls(),
    spec: QuadSpec = QuadSpec(),
) -> tuple[EstimateResult, GFDiagnostics]:
    """Generating-function estimates with quantile rescaling and the
    delta-method covariance evaluated at the fitted parameters."""
    if sample.max_count == 0:
        raise DegenerateSampleError(
            "all counts are zero: log g_n vanishes identically; use p0_estimate"
        )
    b, floored = _scale_factor(sample, controls.q)
    z1e, z2e, z3e = (z ** (1.0 / b) for z in (controls.z1, controls.z2, controls.z3))
    alpha, rho, g_hat, y_hat = _estimate_at(sample, z1e, z2e, z3e, spec)
    warn: list[str] = []
    if floored:
        warn.append("rescaling quantile was 0; scale floored at b = 1")
    if b > 1.0:
        warn.append(
            "covariance evaluated at data-dependent rescaled controls; "
            "the asymptotic result does not literally apply"
        )
    if alpha <= 0.0:
        warn.append(f"alpha estimate {alpha:g} is not positive")
    cov = gf_covariance(alpha, rho, z1e, z2e, z3e, sample.n, spec)
    result = EstimateResult(
        alpha, rho, cov, "gf", sample.n, iterations=0, converged=True,
        warnings=tuple(warn),
    )
    return result, GFDiagnostics(b=b, g_hat=g_hat, y_hat=y_hat)


def gf_covariance(
    alpha: float,
    rho: float,
    z1: float,
    z2: float,
    z3: float,
    n: int,
    spec: QuadSpec = QuadSpec(),
) -> np.ndarray:
    """Finite-sample covariance M^T C M / n of (alpha_hat, rho_hat).

    C is the trivariate pgf covariance c(zi, zj) = g(zi zj) - g(zi) g(zj);
    M is the Jacobian of the estimator map, with entries R1, R2, R3 = 0
    (rho row) and A1, A2, A3 (alpha row).
    """
    if alpha <= 0.0:
        raise DomainError("covariance requires alpha > 0")
    if n < 1:
        raise DomainError("covariance requires n >= 1")
    z = (float(z1), float(z2), float(z3))
    if not all(0.0 < zi < 1.0 for zi in z):
        raise DomainError("controls must lie in (0, 1)")
    if z[0] == z[1]:
        raise DomainError("z1 = z2 makes the estimator map degenerate")
    params = LDParams(alpha, rho)
    h = [yule_pgf(zi, rho, spec) for zi in z]
    hd = [yule_pgf_drho(zi, rho, spec) for zi in z]
    g = [ld_pgf(params, zi, spec) for zi in z]
    cmat = np.empty((3, 3))
    for i in range(3):
        for j in range(i, 3):
            cmat[i, j] = cmat[j, i] = ld_pgf(params, z[i] * z[j], spec) - g[i] * g[j]
    denom = (h[1] - 1.0) * hd[0] - (h[0] - 1.0) * hd[1]
    if denom == 0.0:
        raise DomainError("ratio curve has zero slope at these controls")
    r1 = (h[1] - 1.0) / (alpha * g[0] * denom)
    r2 = (h[0] - 1.0) / (alpha * g[1] * -denom)
    a3 = 1.0 / (g[2] * (h[2] - 1.0))
    lever = alpha * hd[2] / (1.0 - h[2])
    m = np.array([[lever * r1, r1], [lever * r2, r2], [a3, 0.0]])
    out = m.T @ cmat @ m / n
    return (out + out.T) / 2.0  # exact symmetry despite float contraction order


def p0_estimate(sample: Sample) -> EstimateResult:
    """alpha = -log(fraction of zero counts); rho is not identified.

    The variance (exp(alpha) - 1) / n comes from the delta method applied
    to the binomial zero frequency (a derivation of this artifact, flagged
    in the warnings).
    """
    zeros = sample.n - int(np.count_nonzero(sample.counts))
    if zeros == 0:
        raise EstimationError(
            "p0 estimator undefined: the sample contains no zero counts"
        )
    p0 = zeros / sample.n
    alpha = -math.log(p0)
    var = (math.exp(alpha) - 1.0) / sample.n
    cov = np.array([[var, math.nan], [math.nan, math.nan]])
    return EstimateResult(
        alpha, float("nan"), cov, "p0", sample.n, iterations=0, converged=True,
        warnings=(
            "rho is not estimated by the p0 method",
            "alpha variance is a delta-method derivation of this implementation",
        ),
    )


@dataclass(frozen=True)
class ConfidenceEllipse:
    """Wald confidence region: center, semi-axis lengths and directions."""

    center: np.ndarray
    radii: np.ndarray
    axes: np.ndarray  # columns are unit eigenvectors of the covariance
    level: float

    def points(self, num: int = 181) -> np.ndarray:
        t = np.linspace(0.0, 2.0 * math.pi, num)
        circle = np.vstack([np.cos(t), np.sin(t)])
        return (self.axes @ (self.radii[:, None] * circle)).T + self.center

    def contains(self, point) -> bool:
        d = np.asarray(point, dtype=float) - self.center
        u = self.axes.T @ d
        with np.errstate(divide="ignore"):
            return bool(np.sum((u / self.radii) ** 2) <= 1.0)


@dataclass(frozen=True)
class WaldInference:
    level: float
    ci_alpha: tuple[float, float] | None
    ci_rho: tuple[float, float] | None
    ellipse: ConfidenceEllipse | None
    p_value: float | None
    null: dict | None


def wald_inference(
    result: EstimateResult,
    level: float = 0.95,
    null: dict | None = None,
) -> WaldInference:
    """Marginal normal intervals, the 2-df chi-square dispersion ellipse,
    and a Wald p-value for a point null such as {"rho": 1}."""
    if not (0.0 < level < 1.0):
        raise DomainError("confidence level must lie in (0, 1)")
    if not result.converged:
        raise InferenceError("Wald inference requires a converged estimate")
    cov = result.cov
    finite = np.isfinite(cov)
    if np.any(np.diag(cov)[np.isfinite(np.diag(cov))] < 0.0):
        raise InferenceError(f"covariance has negative diagonal: {np.diag(cov)}")
    zq = float(scipy.stats.norm.ppf(0.5 + level / 2.0))
    theta = np.array([result.alpha_hat, result.rho_hat])

    def interval(i: int):
        if not finite[i, i]:
            return None
        half = zq * math.sqrt(cov[i, i])
        return (float(theta[i] - half), float(theta[i] + half))

    ci_alpha, ci_rho = interval(0), interval(1)

    ellipse = None
    if finite.all():
        eigvals, eigvecs = np.linalg.eigh(cov)
        if eigvals.min() < -1e-12 * max(1.0, float(eigvals.max())):
            raise InferenceError(
                f"covariance is not positive semidefinite (eigenvalues {eigvals})"
            )
        eigvals = np.clip(eigvals, 0.0, None)
        chi2q = float(scipy.stats.chi2.ppf(level, df=2))
        ellipse = ConfidenceEllipse(
            center=theta.copy(),
            radii=np.sqrt(chi2q * eigvals),
            axes=eigvecs,
            level=level,
        )

    p_value = None
    if null:
        unknown = set(null) - {"alpha", "rho"}
        if unknown:
            raise DomainError(f"unknown null hypothesis components: {unknown}")
        idx = {"alpha": 0, "rho": 1}
        if len(null) == 2:
            if not finite.all():
                raise InferenceError("joint test requires a full covariance")
            delta = theta - np.array([null["alpha"], null["rho"]])
            stat = float(delta @ np.linalg.solve(cov, delta))
            p_value = float(scipy.stats.chi2.sf(stat, df=2))
        else:
            (name, value), = null.items()
            i = idx[name]
            if not finite[i, i] or cov[i, i] <= 0.0:
                raise InferenceError(f"no usable variance for {name}")
            zstat = (theta[i] - value) / math.sqrt(cov[i, i])
            p_value = float(2.0 * scipy.stats.norm.sf(abs(zstat)))
    return WaldInference(
        level=level, ci_alpha=ci_alpha, ci_rho=ci_rho, ellipse=ellipse,
        p_value=p_value, null=dict(null) if null else None,
    )
