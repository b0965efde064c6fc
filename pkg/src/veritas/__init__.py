"""veritas: belief arithmetic, testimony weights, and a small exact
belief-network engine, with simulation scenarios, a CLI and an HTTP service."""

from .errors import (
    DomainError,
    ImpossibleFindingsError,
    InconsistentParametersError,
    NetworkValidationError,
    StateSpaceTooLargeError,
    UndefinedEvidenceError,
    VeritasError,
)
from .evidence import (
    Belief,
    DiscreteWeight,
    UncertainJL,
    accumulate_jl,
    bayes_factor,
    combine_bayes_factors,
    combine_uncertain_jl,
    convolve_weights,
    expected_frequency,
    jl_from_odds,
    jl_from_prob,
    jl_reference_table,
    odds_from_jl,
    odds_from_prob,
    posterior_prob,
    prob_from_jl,
    prob_from_odds,
    update_odds,
)

__version__ = "0.1.0"
