"""Statistics for Luria-Delbruck mutant-count distributions.

Exact pmf and sampling for the two-parameter mutant-count law, maximum
likelihood and generating-function estimation of (alpha, rho) with
asymptotic covariances, Wald confidence machinery, and a direct
branching-process simulator for end-to-end validation.
"""

from .errors import (
    BracketError,
    BudgetError,
    DegenerateSampleError,
    DomainError,
    EstimationError,
    InferenceError,
    InputError,
    IntegrationError,
    LDStatsError,
    RatioOutOfRangeError,
)
from .gf import (
    ConfidenceEllipse,
    GFControls,
    GFDiagnostics,
    WaldInference,
    empirical_pgf,
    gf_covariance,
    gf_fit,
    p0_estimate,
    ratio_f,
    ratio_f_inverse,
    wald_inference,
)
from .growth import (
    GM0Result,
    GenerationModel,
    GenerationTimeLaw,
    harris_constant,
    malthusian,
    simulate_gm0,
    simulate_gm0_detail,
    calibrate_mutation_probability,
)
from .lddist import (
    DEFAULT_TABLE_BUDGET,
    LDParams,
    PmfTable,
    ld_cdf,
    ld_pgf,
    ld_pmf_table,
    ld_quantile,
    ld_sample,
    ld_table_size,
)
from .ml import (
    FisherInfo,
    MLOptions,
    fisher_info,
    ld_hessian,
    ld_loglik,
    ld_score,
    ml_fit,
    winsorize,
    winsorized_ml_fit,
)
from .numerics import QuadSpec, RootSpec, digamma, find_root, integrate, log_gamma, trigamma
from .results import EstimateResult
from .samples import Sample
from .yule import (
    Fitness,
    yule_d2p_drho2,
    yule_dp_drho,
    yule_pgf,
    yule_pgf_drho,
    yule_pmf,
    yule_pmf_table,
    yule_sample,
    yule_tail,
)

__version__ = "0.1.0"
