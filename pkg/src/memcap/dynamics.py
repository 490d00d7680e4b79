"""Driven state recursion, regime thresholds, and regime classification.

The model iterates

    x_t = phi(A x_{t-1} + C z_t + xi)

with scalar inputs z_t = sigma * zeta_t, zeta_t i.i.d. Rademacher. Two input
scales bracket the interesting behavior of a piecewise sigmoid phi:

* above ``sigma_upper`` every post-transient state lands exactly on one of two
  saturated +-1 vectors selected by the sign of the current input;
* below ``sigma_lower`` the recursion never leaves the linear piece of phi and
  is bit-for-bit identical to the linear recursion x_t = A x_{t-1} + C z_t + xi.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .activations import Activation, apply_vector, state_kernel
from .ensembles import ReservoirSpec, max_abs_entry, spectral_norm
from .errors import DynamicsError
from .seeding import stream_rng


def default_washout(n: int) -> int:
    """Transient length long enough to forget the zero initial state."""
    return max(1000, 10 * n)


# ---------------------------------------------------------------------------
# inputs
# ---------------------------------------------------------------------------

@dataclass
class InputProcess:
    """Rescaled Rademacher input path: entries +-sigma, i.i.d., seed-determined."""

    sigma: float
    length: int
    washout: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.sigma > 0.0:
            raise ValueError("sigma must be positive")
        if self.length < 1:
            raise ValueError("length must be at least 1")
        if self.washout < 0:
            raise ValueError("washout must be nonnegative")


def generate_inputs(p: InputProcess) -> np.ndarray:
    """Full drive sequence of ``washout + length`` draws from {-sigma, +sigma}.

    The washout prefix is part of the sequence so that the stored window of a
    trajectory stays aligned with the exact inputs that produced it.
    """
    rng = stream_rng(p.seed, "inputs")
    signs = 2.0 * rng.integers(0, 2, size=p.washout + p.length) - 1.0
    return p.sigma * signs


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    """Realized input/state path after washout.

    ``states[k]`` is the state produced by consuming ``inputs[k]``;
    ``pre_state`` is the state immediately before the stored window, which is
    the anchor for exact linear replays over the same window.
    """

    inputs: np.ndarray
    states: np.ndarray
    pre_state: np.ndarray
    spec: ReservoirSpec
    activation: Activation
    process: InputProcess


def run(
    spec: ReservoirSpec,
    act: Activation,
    process: InputProcess,
    x_init: np.ndarray | None = None,
    inputs: np.ndarray | None = None,
) -> Trajectory:
    """Iterate the recursion for washout + length steps and keep the last ``length``.

    ``inputs`` overrides the generated drive sequence (same total length);
    this is how tests drive the recursion with handpicked paths.
    """
    total = process.washout + process.length
    if inputs is None:
        z = generate_inputs(process)
    else:
        z = np.asarray(inputs, dtype=float)
        if z.shape != (total,):
            raise ValueError(f"override inputs must have length washout + length = {total}")
    if x_init is None:
        x = np.zeros(spec.n)
    else:
        x = np.asarray(x_init, dtype=float)
        if x.shape != (spec.n,):
            raise ValueError("x_init must be an n-vector")

    a = spec.connectivity
    c = spec.input_mask
    xi = spec.input_shift
    has_shift = bool(xi.any())
    phi = state_kernel(act)
    washout = process.washout
    states = np.empty((process.length, spec.n))
    pre_state = x.copy()
    # Overflow to inf is how divergence announces itself; it is detected and
    # reported below rather than warned about.
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(total):
            drive = a @ x
            drive += c * z[t]
            if has_shift:
                drive += xi
            if not np.isfinite(drive).all():
                raise DynamicsError(f"non-finite state at step {t} (diverging recursion)")
            x = phi(drive)
            if t == washout - 1:
                pre_state = x.copy()
            if t >= washout:
                states[t - washout] = x
    return Trajectory(
        inputs=z[washout:],
        states=states,
        pre_state=pre_state,
        spec=spec,
        activation=act,
        process=process,
    )


def linear_states(spec: ReservoirSpec, inputs: np.ndarray, x_init: np.ndarray) -> np.ndarray:
    """Replay of the linear recursion x_t = A x_{t-1} + C z_t + xi over ``inputs``."""
    a = spec.connectivity
    c = spec.input_mask
    xi = spec.input_shift
    x = np.asarray(x_init, dtype=float)
    out = np.empty((len(inputs), spec.n))
    for t, zt in enumerate(inputs):
        x = a @ x + c * zt + xi
        out[t] = x
    return out


# ---------------------------------------------------------------------------
# thresholds and extreme states
# ---------------------------------------------------------------------------

@dataclass
class RegimeThresholds:
    """Input scales bracketing the saturated and linear-equivalent regimes.

    ``sigma_upper`` = (sqrt(N) ||A||_2 + d) / min|C_i| guarantees saturation;
    ``sigma_lower`` = delta (1 - ||A||_2) / (sqrt(N) max|C_i|) guarantees
    linear equivalence. The loose variants drop or coarsen the sqrt(N)
    factors: ``sigma_upper_loose`` = (N max|A_ij| + d) / min|C_i| and
    ``sigma_lower_loose`` = delta (1 - ||A||_2) / max|C_i|.
    """

    sigma_lower: float
    sigma_upper: float
    sigma_lower_loose: float
    sigma_upper_loose: float


def saturation_thresholds(spec: ReservoirSpec, delta: float, d: float) -> RegimeThresholds:
    """Thresholds for arbitrary linear-radius / saturation-onset parameters."""
    if not 0.0 < delta < d:
        raise ValueError("need 0 < delta < d")
    c_floor = spec.mask_floor
    if c_floor == 0.0:
        raise DynamicsError(
            "input mask has a zero entry; saturation thresholds need min |C_i| > 0"
        )
    a_norm = spectral_norm(spec.connectivity)
    if a_norm >= 1.0:
        raise DynamicsError(
            f"spectral norm {a_norm:.6g} >= 1 violates the contraction condition "
            "for a unique input-driven state"
        )
    c_ceil = spec.mask_ceil
    sqrt_n = float(np.sqrt(spec.n))
    return RegimeThresholds(
        sigma_lower=delta * (1.0 - a_norm) / (sqrt_n * c_ceil),
        sigma_upper=(sqrt_n * a_norm + d) / c_floor,
        sigma_lower_loose=delta * (1.0 - a_norm) / c_ceil,
        sigma_upper_loose=(spec.n * max_abs_entry(spec.connectivity) + d) / c_floor,
    )


def compute_thresholds(spec: ReservoirSpec, act: Activation) -> RegimeThresholds:
    """Regime thresholds for a piecewise sigmoid activation."""
    if act.kind != "pws":
        raise ValueError("thresholds are defined for the piecewise sigmoid activation")
    return saturation_thresholds(spec, act.delta, act.d)


@dataclass
class ExtremeStates:
    """The two +-1 vectors that absorb the dynamics at large input scale."""

    x_plus: np.ndarray
    x_minus: np.ndarray


def extreme_states(spec: ReservoirSpec, act: Activation) -> ExtremeStates:
    """Saturated states phi(+- C d / min|C_i|), entrywise exactly +-1."""
    if act.kind != "pws":
        raise ValueError("extreme states are defined for the piecewise sigmoid activation")
    c_floor = spec.mask_floor
    if c_floor == 0.0:
        raise DynamicsError("input mask has a zero entry; extreme states need min |C_i| > 0")
    args = spec.input_mask * (act.d / c_floor)
    x_plus = apply_vector(act, args)
    x_minus = apply_vector(act, -args)
    # |C_i| d / min|C_j| >= d for every i, so both vectors must be +-1 valued.
    assert np.all(np.abs(x_plus) == 1.0) and np.all(np.abs(x_minus) == 1.0)
    return ExtremeStates(x_plus=x_plus, x_minus=x_minus)


# ---------------------------------------------------------------------------
# regime classification
# ---------------------------------------------------------------------------

class Regime(enum.Enum):
    SATURATED = "saturated"
    LINEAR_EQUIVALENT = "linear"
    INTERMEDIATE = "intermediate"


def _saturated_exact(traj: Trajectory, spec: ReservoirSpec, act: Activation) -> bool:
    ext = extreme_states(spec, act)
    pos = traj.inputs > 0.0
    states = traj.states
    if np.any(pos) and not np.array_equal(states[pos], np.broadcast_to(ext.x_plus, states[pos].shape)):
        return False
    neg = ~pos
    if np.any(neg) and not np.array_equal(states[neg], np.broadcast_to(ext.x_minus, states[neg].shape)):
        return False
    return True


def _saturated_collapsed(traj: Trajectory, collapse_ratio: float) -> bool:
    # Two-point collapse: states form one cluster per input sign whose spread
    # is negligible against the separation of the two clusters.
    pos = traj.inputs > 0.0
    neg = ~pos
    if not (np.any(pos) and np.any(neg)):
        return False
    states = traj.states
    rep_plus = states[pos][0]
    rep_minus = states[neg][0]
    separation = float(np.max(np.abs(rep_plus - rep_minus)))
    if separation == 0.0:
        return False
    spread = max(
        float(np.max(np.abs(states[pos] - rep_plus))),
        float(np.max(np.abs(states[neg] - rep_minus))),
    )
    return spread <= collapse_ratio * separation


def _linear_equivalent(traj: Trajectory, spec: ReservoirSpec, atol: float) -> bool:
    a = spec.connectivity
    c = spec.input_mask
    xi = spec.input_shift
    x = traj.pre_state
    for t, zt in enumerate(traj.inputs):
        x = a @ x + c * zt + xi
        if np.max(np.abs(x - traj.states[t])) > atol:
            return False
    return True


def classify_regime(
    traj: Trajectory,
    spec: ReservoirSpec,
    act: Activation,
    sigma: float,
    linear_atol: float = 1e-12,
    collapse_ratio: float = 1e-3,
) -> Regime:
    """Classify a realized trajectory as saturated, linear-equivalent, or neither.

    For the piecewise sigmoid, saturation means every state equals the matching
    extreme state exactly. Other activations have no exact extreme states, so
    saturation is read as two-point collapse of the state path (intra-cluster
    spread at most ``collapse_ratio`` of the cluster separation). Linear
    equivalence means a replay of the linear recursion from ``traj.pre_state``
    tracks every stored state within ``linear_atol``.
    """
    del sigma  # regime is decided from the realized states, not the nominal scale
    if act.kind == "pws":
        if _saturated_exact(traj, spec, act):
            return Regime.SATURATED
    elif _saturated_collapsed(traj, collapse_ratio):
        return Regime.SATURATED
    if _linear_equivalent(traj, spec, linear_atol):
        return Regime.LINEAR_EQUIVALENT
    return Regime.INTERMEDIATE


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def export_trajectory(traj: Trajectory, path: str) -> None:
    """Columnar text dump: step index, input, then the N state coordinates."""
    n = traj.spec.n
    header = "t z " + " ".join(f"x{i}" for i in range(n))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for t in range(len(traj.inputs)):
            row = [str(t), format(traj.inputs[t], ".17g")]
            row.extend(format(v, ".17g") for v in traj.states[t])
            fh.write(" ".join(row) + "\n")
