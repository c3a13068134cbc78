"""Stationary-by-construction Bayesian vector autoregressions.

The package reparameterises a stationary VAR(p) through partial
autocorrelation matrices into unconstrained square matrices, places
structured priors on the unconstrained space, samples the exact
posterior with Hamiltonian Monte Carlo, and evaluates forecasts with
proper scoring rules.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    AllDivergent,
    BadCsv,
    ConfigInvalid,
    DimensionMismatch,
    InfiniteVariance,
    NonFinite,
    NonPositiveHyper,
    NotInVm,
    NotOrthogonal,
    NotSpd,
    NotStationary,
    OutOfBounds,
    RankDeficientDesign,
    SingularSystem,
    StatVarError,
    TooFewDraws,
    TooFewSamples,
    ZeroDensity,
)
from .linalg import (  # noqa: F401
    singular_values,
    solve_discrete_lyapunov,
    sym_sqrt,
    sym_sqrt_inv,
)
from .process import VarModel, autocovariances, companion_matrix, is_stationary, simulate  # noqa: F401
from .reparam import (  # noqa: F401
    DiagonalForm,
    ForwardMapTrace,
    ScaledAllOnes,
    ScaledIdentity,
    TwoParamExchangeable,
    ZeroForm,
    a_to_p,
    ak_from_rml,
    forward_map,
    orthogonal_conjugate,
    p_to_a,
    reverse_map,
    rml_from_ak,
    structure_p_to_a,
)
from .priors import (  # noqa: F401
    ParameterPoint,
    PriorSpec,
    all_ones_spec,
    diagonal_spec,
    elicit_from_structure,
    exchangeable_spec,
    log_prior,
    marginal_moments,
    minnesota_spec,
    prior1,
    prior2,
    rml_vague_spec,
    sample_prior,
    semi_conjugate_spec,
    sparse_spec,
)
from .inference import (  # noqa: F401
    Draws,
    HmcConfig,
    PosteriorModel,
    diagnostics,
    effective_sample_size,
    gradient,
    log_likelihood_exact,
    log_posterior,
    run_hmc,
    split_rhat,
)
from .scoring import (  # noqa: F401
    MinnesotaFit,
    PredictiveSamples,
    ScoreReport,
    ScoreRow,
    crps_pairwise,
    crps_sample,
    energy_score,
    fit_minnesota,
    log_score,
    log_score_joint,
    predictive_draws,
    score_entry,
    score_forecasts,
    stationarity_probability,
)
