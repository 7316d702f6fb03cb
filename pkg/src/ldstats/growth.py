"""Population growth and the G/M/0 branching simulator.

Normal cells divide after i.i.d. generation times with law G; each
division is mutant with probability p, producing one normal and one
mutant cell, otherwise two normal cells.  Mutant clones grow as Markov
binary fission with rate mu, so a clone seeded a time s before the end of
observation has geometric size with parameter exp(-mu s); clones are
resolved analytically instead of cell by cell, which keeps jackpot clones
O(1).

The growth rate nu (Malthusian parameter) solves 2 L(nu) = 1 with L the
Laplace transform of G.  The growth constant C is implemented in the
nu-inclusive form

    C = (4 nu * integral s exp(-nu s) dG(s))^(-1),

the form that passes both the Markov sanity check (exponential G gives
C = 1 exactly) and the deterministic check (C = 1/(2 log 2)); the variant
without the nu factor is available behind ``printed_form`` for
comparison.  For a lattice law (deterministic G) the normalized expected
population E[N(t)] exp(-nu t) oscillates over each generation period and
only its one-period time average converges to C, which is what the
``population_window`` machinery measures.
"""

from __future__ import annotations

import functools
import math
import warnings as _warnings
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, BracketError, DomainError
from .numerics import QuadSpec, RootSpec, find_root, integrate

__all__ = [
    "GenerationTimeLaw",
    "GenerationModel",
    "GM0Result",
    "DEFAULT_DIVISION_BUDGET",
    "malthusian",
    "harris_constant",
    "simulate_gm0",
    "simulate_gm0_detail",
    "calibrate_mutation_probability",
]

DEFAULT_DIVISION_BUDGET = 10_000_000

_CLONE_CAP = float(2**62)

_LAW_KINDS = ("deterministic", "exponential", "gamma", "lognormal")


@dataclass(frozen=True)
class GenerationTimeLaw:
    """Parametric generation-time distribution of normal cells."""

    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in _LAW_KINDS:
            raise DomainError(f"unknown generation-time law {self.kind!r}")
        if not all(math.isfinite(x) for x in self.params):
            raise DomainError("generation-time law parameters must be finite")
        # the lognormal location is a log-scale value and may be any real;
        # every other parameter is a positive time, rate or shape
        positive = self.params[1:] if self.kind == "lognormal" else self.params
        if not all(x > 0.0 for x in positive):
            raise DomainError("generation-time law parameters must be positive")

    @staticmethod
    def deterministic(t: float) -> "GenerationTimeLaw":
        return GenerationTimeLaw("deterministic", (float(t),))

    @staticmethod
    def exponential(rate: float) -> "GenerationTimeLaw":
        return GenerationTimeLaw("exponential", (float(rate),))

    @staticmethod
    def gamma(shape: float, rate: float) -> "GenerationTimeLaw":
        return GenerationTimeLaw("gamma", (float(shape), float(rate)))

    @staticmethod
    def lognormal(mu_log: float, sigma_log: float) -> "GenerationTimeLaw":
        return GenerationTimeLaw("lognormal", (float(mu_log), float(sigma_log)))

    def laplace(self, nu: float, spec: QuadSpec = QuadSpec()) -> float:
        """L(nu) = integral exp(-nu s) dG(s)."""
        if self.kind == "deterministic":
            (t,) = self.params
            return math.exp(-nu * t)
        if self.kind == "exponential":
            (rate,) = self.params
            return rate / (rate + nu)
        if self.kind == "gamma":
            shape, rate = self.params
            return (rate / (rate + nu)) ** shape
        m, sig = self.params

        def integrand(s: float) -> float:
            if s <= 0.0:
                return 0.0
            return math.exp(-nu * s) * _lognormal_pdf(s, m, sig)

        return integrate(integrand, 0.0, math.inf, spec)

    def laplace_ds(self, nu: float, spec: QuadSpec = QuadSpec()) -> float:
        """integral s exp(-nu s) dG(s), the -d/dnu of the transform."""
        if self.kind == "deterministic":
            (t,) = self.params
            return t * math.exp(-nu * t)
        if self.kind == "exponential":
            (rate,) = self.params
            return rate / (rate + nu) ** 2
        if self.kind == "gamma":
            shape, rate = self.params
            return shape * rate**shape / (rate + nu) ** (shape + 1.0)
        m, sig = self.params

        def integrand(s: float) -> float:
            if s <= 0.0:
                return 0.0
            return s * math.exp(-nu * s) * _lognormal_pdf(s, m, sig)

        return integrate(integrand, 0.0, math.inf, spec)

    def mean(self) -> float:
        if self.kind == "deterministic":
            return self.params[0]
        if self.kind == "exponential":
            return 1.0 / self.params[0]
        if self.kind == "gamma":
            return self.params[0] / self.params[1]
        m, sig = self.params
        return math.exp(m + sig * sig / 2.0)

    def period(self) -> float | None:
        """Lattice period of the division-time grid, None for spread laws."""
        return self.params[0] if self.kind == "deterministic" else None

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "deterministic":
            return np.full(size, self.params[0])
        if self.kind == "exponential":
            return rng.exponential(1.0 / self.params[0], size)
        if self.kind == "gamma":
            shape, rate = self.params
            return rng.gamma(shape, 1.0 / rate, size)
        m, sig = self.params
        return rng.lognormal(m, sig, size)


def _lognormal_pdf(s: float, m: float, sig: float) -> float:
    x = (math.log(s) - m) / sig
    return math.exp(-0.5 * x * x) / (s * sig * math.sqrt(2.0 * math.pi))


@functools.lru_cache(maxsize=128)
def malthusian(law: GenerationTimeLaw) -> float:
    """Unique nu > 0 with 2 * L(nu) = 1, in closed form where available."""
    if law.kind == "deterministic":
        return math.log(2.0) / law.params[0]
    if law.kind == "exponential":
        return law.params[0]
    if law.kind == "gamma":
        shape, rate = law.params
        return rate * (2.0 ** (1.0 / shape) - 1.0)
    try:
        return find_root(
            lambda nu: 2.0 * law.laplace(nu) - 1.0,
            RootSpec(1e-8, 1e4, tol=1e-12),
        )
    except BracketError as exc:
        raise DomainError(
            f"Malthusian parameter not bracketed in [1e-8, 1e4] for {law}"
        ) from exc


@functools.lru_cache(maxsize=128)
def harris_constant(
    law: GenerationTimeLaw, nu: float | None = None, printed_form: bool = False
) -> float:
    """Growth constant C = lim E[N(t)] exp(-nu t) for the binary
    Bellman-Harris process (one-period time average in the lattice case).

    ``printed_form`` drops the nu factor from the denominator; it fails
    the Markov sanity check and exists only for comparison.
    """
    if nu is None:
        nu = malthusian(law)
    ds = law.laplace_ds(nu)
    if printed_form:
        return 1.0 / (4.0 * ds)
    return 1.0 / (4.0 * nu * ds)


@dataclass(frozen=True)
class GenerationModel:
    """Full G/M/0 specification: generation law of normal cells, mutant
    division rate, per-division mutation probability, initial population
    and observation horizon."""

    law: GenerationTimeLaw
    mu: float
    p: float
    n0: int
    t_end: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu > 0.0):
            raise DomainError("mutant division rate mu must be positive")
        if not (0.0 <= self.p <= 1.0):
            raise DomainError("mutation probability must lie in [0, 1]")
        if self.n0 < 1:
            raise DomainError("initial population n0 must be >= 1")
        if not (math.isfinite(self.t_end) and self.t_end > 0.0):
            raise DomainError("t_end must be positive")

    def fitness(self) -> float:
        """rho = nu / mu implied by the model."""
        return malthusian(self.law) / self.mu


@dataclass
class GM0Result:
    mutants: int
    mutation_events: int
    divisions: int
    final_normals: int
    population_average: float | None = None


def _geometric_clone_sizes(q: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Geometric draws on {1, 2, ...} with per-element success probability q
    by inversion; q -> 0 draws saturate at the int64-safe cap."""
    u = 1.0 - rng.random(q.size)
    log_fail = np.log1p(-q)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = 1.0 + np.floor(np.log(u) / log_fail)
    y = np.where(log_fail == 0.0, _CLONE_CAP, y)
    y = np.where(q >= 1.0, 1.0, y)
    return np.minimum(y, _CLONE_CAP)


def simulate_gm0_detail(
    model: GenerationModel,
    rng: np.random.Generator,
    max_divisions: int = DEFAULT_DIVISION_BUDGET,
    population_window: float | None = None,
) -> GM0Result:
    """One run of the G/M/0 model up to t_end.

    Normal lineages are swept generation by generation; because lineages
    never interact, the end-time marginal does not depend on the order in
    which divisions are processed, and the sweep vectorizes over the whole
    generation.  Each mutant clone is resolved in O(1) by drawing its
    t_end size from the geometric marginal.

    ``population_window`` (a trailing window length w) additionally
    returns the per-initial-cell time average of N(t) exp(-nu t) over
    [t_end - w, t_end], the quantity whose limit is the growth constant;
    use one lattice period for deterministic laws.
    """
    t1 = model.t_end
    t0 = None
    pop_integral = 0.0
    if population_window is not None:
        if not (0.0 < population_window <= t1):
            raise DomainError("population_window must lie in (0, t_end]")
        nu = malthusian(model.law)
        t0 = t1 - population_window

        def window_weight(times: np.ndarray) -> float:
            # each +1 cell at time tau contributes the integral of
            # exp(-nu t) over [max(tau, t0), t1]
            lo = np.maximum(times, t0)
            return float(np.sum(np.exp(-nu * lo) - math.exp(-nu * t1))) / nu

        pop_integral += model.n0 * window_weight(np.zeros(1))

    # upfront check on the expected number of divisions
    expected_divisions = model.n0 * (
        harris_constant(model.law) * math.exp(malthusian(model.law) * t1) - 1.0
    )
    if expected_divisions > max_divisions:
        raise BudgetError(
            f"expected divisions ~{expected_divisions:.3g} exceed the budget "
            f"{max_divisions}"
        )

    births = np.zeros(model.n0)
    mutants = 0
    mutation_events = 0
    divisions = 0
    final_normals = 0
    while births.size:
        if divisions + births.size > max_divisions:
            raise BudgetError(
                f"division budget {max_divisions} exceeded after {divisions} "
                f"divisions with {births.size} cells pending; partial counts: "
                f"mutants={mutants}, mutation_events={mutation_events}"
            )
        division_times = births + model.law.sample(rng, births.size)
        before_end = division_times < t1
        final_normals += int(np.sum(~before_end))
        division_times = division_times[before_end]
        if division_times.size == 0:
            break
        divisions += division_times.size
        mutated = rng.random(division_times.size) < model.p
        mutation_times = division_times[mutated]
        normal_times = division_times[~mutated]
        if mutation_times.size:
            mutation_events += int(mutation_times.size)
            q = np.exp(-model.mu * (t1 - mutation_times))
            for size in _geometric_clone_sizes(q, rng):
                mutants += int(size)
        if population_window is not None and normal_times.size:
            # a mutation-free division adds one normal cell net; a mutant
            # division replaces the parent with a single normal child
            pop_integral += window_weight(normal_times)
        births = np.concatenate([np.repeat(normal_times, 2), mutation_times])

    population_average = None
    if population_window is not None:
        population_average = pop_integral / ((t1 - t0) * model.n0)
    return GM0Result(
        mutants=mutants,
        mutation_events=mutation_events,
        divisions=divisions,
        final_normals=final_normals,
        population_average=population_average,
    )


def simulate_gm0(
    model: GenerationModel,
    rng: np.random.Generator,
    max_divisions: int = DEFAULT_DIVISION_BUDGET,
) -> int:
    """Mutant count at t_end for one run."""
    return simulate_gm0_detail(model, rng, max_divisions=max_divisions).mutants


def calibrate_mutation_probability(
    law: GenerationTimeLaw,
    mu: float,
    alpha_target: float,
    t_end: float,
    n0: int,
) -> float:
    """Mutation probability p with p * n0 * C * exp(nu t_end) = alpha.

    With this calibration the mutant-count law approaches the limit
    distribution with parameters (alpha, nu/mu).  Clipped into [0, 1] with
    a warning when the target is unreachable at this scale.
    """
    if alpha_target < 0.0:
        raise DomainError("alpha_target must be >= 0")
    if mu <= 0.0:
        raise DomainError("mu must be positive")
    nu = malthusian(law)
    c = harris_constant(law, nu)
    p = alpha_target / (n0 * c * math.exp(nu * t_end))
    if p > 1.0:
        _warnings.warn(
            f"calibrated mutation probability {p:g} clipped to 1; "
            "increase n0 or t_end",
            RuntimeWarning,
            stacklevel=2,
        )
        p = 1.0
    return p
