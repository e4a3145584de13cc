"""Exact simulation and statistical verification of a non-linear Langevin
system driven by small jump noise."""

from .analysis import (
    DampedStable,
    DissipationRow,
    EnsembleSample,
    ExperimentConfig,
    QuadratureError,
    dissipation_probe,
    hill_k,
    hill_tail_index,
    ks_critical_value,
    ks_two_sample,
    limit_ensemble,
    monte_carlo_ensemble,
    residual_ensemble,
    response_second_difference,
)
from .dynamics import (
    SystemParams,
    TrajectoryPath,
    flow_displacement,
    flow_velocity,
    response,
    solve_exact,
    solve_oracle,
    velocity_sup,
)
from .limits import (
    LimitPath,
    LimitRegime,
    RegimeError,
    filtered_tail_mass,
    limit_filtered_sum,
    limit_log_signs,
    limit_power_gaps,
    pathwise_residual,
    power_scaling_exponent,
    rescale_to_unit_friction,
    stable_filter_params,
)
from .noise import (
    CompoundPoisson,
    ConstantFamily,
    GaussianSym,
    JumpPath,
    LimitKind,
    Rademacher,
    RegimeReport,
    Regularity,
    TruncatedStable,
    TruncatedStableFamily,
    TwoPoint,
    UniformSym,
    bg_family_bound,
    classify_regime,
    jump_rng,
    sample_jump_events,
    tail_mass,
    total_intensity,
)

__version__ = "0.1.0"
