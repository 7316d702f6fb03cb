"""Estimation results shared by the ML and generating-function fitters."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["EstimateResult", "METHODS"]

METHODS = ("ml", "ml-winsor", "gf", "p0")


@dataclass
class EstimateResult:
    """Point estimates of (alpha, rho) with asymptotic covariance.

    ``cov`` is the 2x2 covariance of (alpha_hat, rho_hat); entries are NaN
    when a component is not estimated (e.g. rho under the p0 method).
    """

    alpha_hat: float
    rho_hat: float
    cov: np.ndarray
    method: str
    n: int
    iterations: int = 0
    converged: bool = True
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")
        self.cov = np.array(self.cov, dtype=float).reshape(2, 2)  # own copy

    @property
    def se_alpha(self) -> float:
        v = self.cov[0, 0]
        return math.sqrt(v) if v >= 0 else float("nan")

    @property
    def se_rho(self) -> float:
        v = self.cov[1, 1]
        return math.sqrt(v) if v >= 0 else float("nan")

    def to_dict(self) -> dict:
        return {
            "alpha_hat": self.alpha_hat,
            "rho_hat": self.rho_hat,
            "cov": [float(x) for x in self.cov.ravel()],
            "method": self.method,
            "n": self.n,
            "iterations": self.iterations,
            "converged": self.converged,
            "warnings": list(self.warnings),
        }
