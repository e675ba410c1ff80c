"""Exact and deterministic-approximate Shapley values for Bernoulli random-set games."""

from .game import (
    BernoulliGame,
    Capacity,
    CapacityReport,
    GameSizeError,
    MassFunction,
    ShapleyVector,
    belief_from_game,
    beta_weight_identity,
    build_capacity_table,
    capacity_of_subset,
    conjugate,
    hitting_probability,
    mobius_invert,
    mobius_transform,
    parse_probability,
    random_set_masses,
    shapley_weight,
    validate_capacity,
)
from .exact import (
    SymmetricSums,
    elementary_symmetric_sums,
    shapley_exact_capacity,
    shapley_exact_enum,
    shapley_exact_integral,
    shapley_exact_symmetric,
    shapley_homogeneous,
    shapley_one_vs_mean_reference,
    shapley_permutation_all,
    shapley_permutation_oracle,
    shapley_vector,
)
from .racs import (
    CommonDenominatorOverflow,
    ErrorReport,
    RationalizedGame,
    Regime,
    RegimeLabel,
    classify_regime,
    common_denominator,
    correct_situation2,
    correct_situation3,
    error_bound_thm,
    error_decomposition,
    meanfield_racs,
    perturbation_bound,
    pick_delta,
    racs_corrected,
    rationalize,
    shapley_racs,
)
from .layered import (
    Layer,
    LayerDecomposition,
    SecondOrderDiagnostic,
    decompose_layers,
    layer_shapley,
    second_order_diagnostic,
    shapley_layered,
    worst_case_relative_error,
)
from .analytic import (
    qbar,
    shapley_binomial_closed,
    shapley_binomial_literal,
    shapley_riemann,
)
from .montecarlo import (
    McConfig,
    McEstimate,
    mc_convergence_curve,
    permutation_marginals,
    shapley_mc,
)
from .gamefile import GameFileError, GameFileResult, parse_game_data, parse_game_file

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
