"""Geometric complexity of unitary channels, coherence dynamics, random
noise ensembles, and two-level gate synthesis."""

from .algebra import (
    RandomVariable,
    SpectralEvents,
    TwoLevelCircuit,
    TwoLevelGate,
    algebraic_complexity,
    decompose_two_level,
    embed_gate,
    law,
    random_special_unitary,
    reconstruct,
    spectral_events,
)
from .channel import (
    ChannelSpec,
    KrausSet,
    TimeDependentSpec,
    apply_channel,
    apply_channel_via_joint,
    channel_complexity_const,
    channel_complexity_td,
    kraus_operators,
    noise_complexity,
    noise_complexity_bounds,
    noise_complexity_td,
    noiseless_complexity,
    perturbative_example,
)
from .coherence import (
    CoheringPowerResult,
    DephasingChannel,
    cohering_power,
    coherence_rate_bound,
    coherence_rate_exact,
    computational_dephasing,
    dephase,
    linear_entropy,
    purity,
    rel_entropy_coherence,
    verify_decohering_bound,
)
from .geodesic import (
    GeodesicEstimate,
    PiecewiseConstantPath,
    check_cost_chain,
    constant_path,
    cost_l1,
    estimate_cc_distance,
    geometric_complexity_const,
    log_distance,
    path_endpoint,
    path_length,
    principal_log_generator,
)
from .operators import (
    commutator,
    density,
    embed_system,
    hermitian,
    hermitian_eig,
    hs_inner,
    hs_norm,
    matrix_abs,
    matrix_exp_unitary,
    partial_trace_env,
    sqrt_abs_diff,
    tensor,
    unitary,
)
from .pauli import (
    MetricSpec,
    PauliBasis,
    VectorizedOperator,
    build_pauli_basis,
    build_penalty_metric,
    devectorize,
    flat_metric,
    omega_inner,
    omega_norm_raw,
    string_weight,
    vectorize,
)
from .rode import (
    EnsembleResult,
    NoiseModel,
    distance_operator,
    distance_unitaries,
    ensemble_mean,
    fluctuation_report,
    integrate_rode,
    write_ensemble,
)

__version__ = "0.1.0"
