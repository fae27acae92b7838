"""Biparental Moran model with selection at death.

Forward simulation of the pedigree and advantaged-count process, exact
propagation of ancestral genetic weights along realized pedigrees, the
finite-N jump-chain analysis with its absorbing-system solvers, and the
closed-form large-population limits they converge to.
"""

from .chain import (
    AbsorptionValues,
    JumpCoefficients,
    UVState,
    alpha_down,
    alpha_up,
    apply_jump,
    beta_down,
    beta_up,
    contraction_down,
    contraction_product,
    contraction_up,
    exact_absorption,
    fixation_probability,
    hitting_probabilities,
    hold_resolvent,
    initial_uv,
    jump_coefficients,
    jump_matrices,
    jump_matrices_resummed,
    jump_probability,
    step_eigenvalue_down,
    step_eigenvalue_hold,
    step_eigenvalue_up,
    step_matrices,
)
from .ensemble import ABS_FIXED, ABS_LOST, ABS_TRUNCATED, EnsembleResult, run_ensemble
from .errors import NumericError, ParameterError
from .limits import limit_d, limit_s_infinity, limit_uv, limit_weight
from .model import (
    Absorption,
    ModelParams,
    PedigreeEvent,
    PopulationState,
    Trajectory,
    new_population,
    run_until_absorption,
    step,
    y_transition_probs,
)
from .rng import ReplicaStream, counter_uniforms, stream_keys
from .verify import CheckResult, golden_trajectory, run_identity_suite
from .weights import (
    WeightSummary,
    ancestry_matrix,
    init_weights,
    lineage_sample,
    propagate,
    summarize,
    weights_at,
)

__version__ = "0.1.0"

__all__ = [
    "ABS_FIXED",
    "ABS_LOST",
    "ABS_TRUNCATED",
    "Absorption",
    "AbsorptionValues",
    "CheckResult",
    "EnsembleResult",
    "JumpCoefficients",
    "ModelParams",
    "NumericError",
    "ParameterError",
    "PedigreeEvent",
    "PopulationState",
    "ReplicaStream",
    "Trajectory",
    "UVState",
    "WeightSummary",
    "alpha_down",
    "alpha_up",
    "ancestry_matrix",
    "apply_jump",
    "beta_down",
    "beta_up",
    "contraction_down",
    "contraction_product",
    "contraction_up",
    "counter_uniforms",
    "exact_absorption",
    "fixation_probability",
    "golden_trajectory",
    "hitting_probabilities",
    "hold_resolvent",
    "init_weights",
    "initial_uv",
    "jump_coefficients",
    "jump_matrices",
    "jump_matrices_resummed",
    "jump_probability",
    "limit_d",
    "limit_s_infinity",
    "limit_uv",
    "limit_weight",
    "lineage_sample",
    "new_population",
    "propagate",
    "run_ensemble",
    "run_identity_suite",
    "run_until_absorption",
    "step",
    "step_eigenvalue_down",
    "step_eigenvalue_hold",
    "step_eigenvalue_up",
    "step_matrices",
    "stream_keys",
    "summarize",
    "weights_at",
    "y_transition_probs",
]
