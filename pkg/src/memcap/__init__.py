"""Memory capacity of random echo state networks under input rescaling.

The package simulates fixed-weight recurrent state-space models driven by
rescaled Rademacher inputs and estimates how much of the past input a linear
readout can recover from the current state. Its central object of study is
the total memory capacity and how it moves between its bounds (1 and the
state dimension N) purely as a function of the input standard deviation.
"""

from .activations import (
    IDENTITY,
    LOGSIG,
    RELU,
    TANH,
    Activation,
    apply,
    apply_vector,
    is_saturating,
    linear_radius,
    parse_activation,
    piecewise_sigmoid,
)
from .capacity import (
    CapacityProfile,
    default_tau_max,
    estimate_mc_tau,
    estimate_total_mc,
    linear_mc_oracle,
    solve_state_covariance,
)
from .dynamics import (
    ExtremeStates,
    InputProcess,
    Regime,
    RegimeThresholds,
    Trajectory,
    classify_regime,
    compute_thresholds,
    default_washout,
    extreme_states,
    generate_inputs,
    linear_states,
    run,
    saturation_thresholds,
)
from .ensembles import (
    Ensemble,
    ReservoirSpec,
    max_abs_entry,
    min_abs_entry,
    normalize_spectral,
    parse_ensemble,
    sample_dense_gaussian,
    sample_input_mask,
    sample_orthogonal,
    sample_reservoir,
    sample_sparse_conditioned,
    spectral_norm,
)
from .errors import CapacityError, ConfigError, DynamicsError, MemcapError, SamplingError
from .experiment import SigmaGrid, SweepConfig, SweepResult, emit_csv, emit_plot, run_sweep

__version__ = "0.1.0"

__all__ = [
    "Activation",
    "CapacityError",
    "CapacityProfile",
    "ConfigError",
    "DynamicsError",
    "Ensemble",
    "ExtremeStates",
    "IDENTITY",
    "InputProcess",
    "LOGSIG",
    "MemcapError",
    "RELU",
    "Regime",
    "RegimeThresholds",
    "ReservoirSpec",
    "SamplingError",
    "SigmaGrid",
    "SweepConfig",
    "SweepResult",
    "TANH",
    "Trajectory",
    "apply",
    "apply_vector",
    "classify_regime",
    "compute_thresholds",
    "default_tau_max",
    "default_washout",
    "emit_csv",
    "emit_plot",
    "estimate_mc_tau",
    "estimate_total_mc",
    "extreme_states",
    "generate_inputs",
    "is_saturating",
    "linear_mc_oracle",
    "linear_radius",
    "linear_states",
    "max_abs_entry",
    "min_abs_entry",
    "normalize_spectral",
    "parse_activation",
    "parse_ensemble",
    "piecewise_sigmoid",
    "run",
    "run_sweep",
    "sample_dense_gaussian",
    "sample_input_mask",
    "sample_orthogonal",
    "sample_reservoir",
    "sample_sparse_conditioned",
    "saturation_thresholds",
    "solve_state_covariance",
    "spectral_norm",
]
