import numpy as np
import pytest

from memcap import (
    DynamicsError,
    Ensemble,
    IDENTITY,
    InputProcess,
    Regime,
    ReservoirSpec,
    TANH,
    apply_vector,
    classify_regime,
    compute_thresholds,
    default_washout,
    extreme_states,
    generate_inputs,
    linear_states,
    piecewise_sigmoid,
    run,
    sample_reservoir,
    saturation_thresholds,
)
from memcap.dynamics import export_trajectory

PWS = piecewise_sigmoid(0.5, 2.0)


def scalar_spec(a: float, c: float = 1.0) -> ReservoirSpec:
    return ReservoirSpec(n=1, connectivity=[[a]], input_mask=[c])


# ---------------------------------------------------------------------------
# input generation
# ---------------------------------------------------------------------------

def test_inputs_reproducible_signs():
    p = InputProcess(sigma=1.0, length=4, washout=0, seed=11)
    z = generate_inputs(p)
    assert z.shape == (4,)
    assert set(np.unique(z)).issubset({-1.0, 1.0})
    assert np.array_equal(z, generate_inputs(p))


def test_inputs_cover_washout_prefix():
    p = InputProcess(sigma=3.0, length=5, washout=2, seed=0)
    z = generate_inputs(p)
    assert z.shape == (7,)
    assert np.all(np.abs(z) == 3.0)


def test_inputs_sample_variance_band():
    # Direct sample variance oracle; CLT band around sigma^2 = 4.
    p = InputProcess(sigma=2.0, length=100_000, washout=0, seed=7)
    z = generate_inputs(p)
    assert 3.9 <= np.var(z) <= 4.1


def test_inputs_sample_mean_band():
    p = InputProcess(sigma=1.0, length=100_000, washout=0, seed=8)
    assert -0.02 <= generate_inputs(p).mean() <= 0.02


def test_input_process_validation():
    with pytest.raises(ValueError):
        InputProcess(sigma=0.0, length=10)
    with pytest.raises(ValueError):
        InputProcess(sigma=1.0, length=0)
    with pytest.raises(ValueError):
        InputProcess(sigma=1.0, length=10, washout=-1)


# ---------------------------------------------------------------------------
# the recursion
# ---------------------------------------------------------------------------

def test_memoryless_identity_reproduces_inputs():
    spec = scalar_spec(0.0)
    p = InputProcess(sigma=1.0, length=200, washout=0, seed=3)
    traj = run(spec, IDENTITY, p)
    assert np.array_equal(traj.states[:, 0], traj.inputs)


def test_washout_alignment_with_override_inputs():
    spec = scalar_spec(0.0)
    p = InputProcess(sigma=1.0, length=4, washout=3, seed=0)
    z = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0])
    traj = run(spec, IDENTITY, p, inputs=z)
    assert np.array_equal(traj.inputs, z[3:])
    assert np.array_equal(traj.states[:, 0], z[3:])
    assert traj.pre_state[0] == 3.0


def test_zero_inputs_keep_zero_fixed_point():
    spec = ReservoirSpec(n=2, connectivity=0.95 * np.eye(2), input_mask=[1.0, 1.0])
    p = InputProcess(sigma=1.0, length=50, washout=10, seed=0)
    traj = run(spec, TANH, p, inputs=np.zeros(60))
    assert np.all(traj.states == 0.0)


def test_states_satisfy_the_recursion_bitwise():
    spec = sample_reservoir(6, Ensemble.dense(), 0.9, seed=4)
    p = InputProcess(sigma=0.7, length=50, washout=5, seed=9)
    traj = run(spec, TANH, p)
    for t in (1, 10, 49):
        drive = spec.connectivity @ traj.states[t - 1] + spec.input_mask * traj.inputs[t]
        assert np.array_equal(traj.states[t], apply_vector(TANH, drive))


def test_bounded_activations_keep_states_in_unit_box():
    spec = sample_reservoir(8, Ensemble.dense(), 0.95, seed=6)
    for act in (TANH, PWS):
        p = InputProcess(sigma=5.0, length=2000, washout=100, seed=2)
        traj = run(spec, act, p)
        assert np.max(np.abs(traj.states)) <= 1.0


def test_divergent_recursion_raises_with_step_index():
    spec = scalar_spec(10.0)
    p = InputProcess(sigma=1.0, length=400, washout=0, seed=1)
    with pytest.raises(DynamicsError, match=r"step \d+"):
        run(spec, IDENTITY, p)


def test_run_shape_validation():
    spec = scalar_spec(0.5)
    p = InputProcess(sigma=1.0, length=10, washout=0, seed=0)
    with pytest.raises(ValueError):
        run(spec, IDENTITY, p, x_init=np.zeros(2))
    with pytest.raises(ValueError):
        run(spec, IDENTITY, p, inputs=np.zeros(3))


def test_default_washout():
    assert default_washout(30) == 1000
    assert default_washout(200) == 2000


# ---------------------------------------------------------------------------
# thresholds
# ---------------------------------------------------------------------------

def test_thresholds_scalar_hand_computation():
    spec = scalar_spec(0.5, c=2.0)
    th = compute_thresholds(spec, PWS)
    assert abs(th.sigma_upper - 1.25) <= 1e-12
    assert abs(th.sigma_lower - 0.125) <= 1e-12


def test_thresholds_diagonal_hand_computation():
    spec = ReservoirSpec(n=2, connectivity=np.diag([0.3, 0.4]), input_mask=[1.0, 2.0])
    th = saturation_thresholds(spec, 0.5, 2.0)
    sqrt2 = np.sqrt(2.0)
    assert abs(th.sigma_upper - (sqrt2 * 0.4 + 2.0) / 1.0) <= 1e-12
    assert abs(th.sigma_lower - 0.5 * 0.6 / (sqrt2 * 2.0)) <= 1e-12
    assert abs(th.sigma_upper_loose - (2 * 0.4 + 2.0) / 1.0) <= 1e-12
    assert abs(th.sigma_lower_loose - 0.15) <= 1e-12
    assert th.sigma_lower_loose == pytest.approx(th.sigma_lower * sqrt2)


def test_thresholds_shrink_with_delta_and_contraction_margin():
    spec = scalar_spec(0.5, c=2.0)
    tiny_delta = saturation_thresholds(spec, 1e-9, 2.0)
    assert tiny_delta.sigma_lower == pytest.approx(0.125 * 1e-9 / 0.5)
    nearly_one = ReservoirSpec(n=1, connectivity=[[1.0 - 1e-9]], input_mask=[2.0])
    assert saturation_thresholds(nearly_one, 0.5, 2.0).sigma_lower < 1e-9


def test_threshold_ordering_over_sampled_reservoirs():
    for seed in range(5):
        spec = sample_reservoir(10, Ensemble.dense(), 0.95, seed)
        th = compute_thresholds(spec, PWS)
        assert 0.0 < th.sigma_lower < th.sigma_upper
        assert th.sigma_lower <= th.sigma_lower_loose
        assert th.sigma_upper <= th.sigma_upper_loose


def test_threshold_preconditions():
    with pytest.raises(DynamicsError, match="zero entry"):
        saturation_thresholds(
            ReservoirSpec(n=2, connectivity=np.zeros((2, 2)), input_mask=[0.0, 1.0]), 0.5, 2.0
        )
    with pytest.raises(DynamicsError, match="spectral norm"):
        saturation_thresholds(scalar_spec(1.0), 0.5, 2.0)
    with pytest.raises(ValueError):
        compute_thresholds(scalar_spec(0.5), TANH)


# ---------------------------------------------------------------------------
# extreme states
# ---------------------------------------------------------------------------

def test_extreme_states_hand_example():
    spec = ReservoirSpec(n=2, connectivity=np.zeros((2, 2)), input_mask=[1.0, -2.0])
    ext = extreme_states(spec, PWS)
    assert np.array_equal(ext.x_plus, np.array([1.0, -1.0]))
    assert np.array_equal(ext.x_minus, np.array([-1.0, 1.0]))


def test_extreme_states_sign_propagation_and_oddness():
    spec = ReservoirSpec(n=3, connectivity=np.zeros((3, 3)), input_mask=[0.2, 1.0, 3.0])
    ext = extreme_states(spec, PWS)
    assert np.array_equal(ext.x_plus, np.ones(3))
    sampled = sample_reservoir(7, Ensemble.dense(), 0.95, seed=13)
    ext2 = extreme_states(sampled, PWS)
    assert np.array_equal(ext2.x_minus, -ext2.x_plus)


# ---------------------------------------------------------------------------
# regime properties and classification
# ---------------------------------------------------------------------------

def test_above_upper_threshold_every_state_is_extreme():
    # Exact statement, not statistical: any margin above the threshold works.
    for seed in (0, 5):
        spec = sample_reservoir(8, Ensemble.dense(), 0.95, seed)
        th = compute_thresholds(spec, PWS)
        p = InputProcess(sigma=1.01 * th.sigma_upper, length=3000, washout=50, seed=seed)
        traj = run(spec, PWS, p)
        ext = extreme_states(spec, PWS)
        pos = traj.inputs > 0
        assert np.array_equal(traj.states[pos], np.broadcast_to(ext.x_plus, traj.states[pos].shape))
        assert np.array_equal(traj.states[~pos], np.broadcast_to(ext.x_minus, traj.states[~pos].shape))
        assert classify_regime(traj, spec, PWS, p.sigma) is Regime.SATURATED


def test_below_lower_threshold_matches_linear_recursion_exactly():
    spec = sample_reservoir(8, Ensemble.orthogonal(), 0.95, seed=3)
    th = compute_thresholds(spec, PWS)
    sigma = 0.9 * th.sigma_lower
    p = InputProcess(sigma=sigma, length=20_000, washout=0, seed=4)
    traj = run(spec, PWS, p)
    replay = linear_states(spec, traj.inputs, np.zeros(spec.n))
    assert np.max(np.abs(replay - traj.states)) <= 1e-12
    # State bound from the contraction argument keeps the path inside the linear piece.
    bound = np.sqrt(spec.n) * spec.mask_ceil * sigma / (1.0 - 0.95)
    assert np.max(np.abs(traj.states)) <= bound < PWS.delta
    assert classify_regime(traj, spec, PWS, sigma) is Regime.LINEAR_EQUIVALENT


def test_tanh_between_thresholds_is_intermediate():
    spec = sample_reservoir(8, Ensemble.dense(), 0.95, seed=2)
    th = saturation_thresholds(spec, 0.1, 10.0)
    sigma = float(np.sqrt(th.sigma_lower * th.sigma_upper))
    p = InputProcess(sigma=sigma, length=4000, washout=100, seed=5)
    traj = run(spec, TANH, p)
    assert classify_regime(traj, spec, TANH, sigma) is Regime.INTERMEDIATE


def test_identity_classifies_linear():
    spec = scalar_spec(0.5)
    p = InputProcess(sigma=1.0, length=500, washout=10, seed=6)
    traj = run(spec, IDENTITY, p)
    assert classify_regime(traj, spec, IDENTITY, 1.0) is Regime.LINEAR_EQUIVALENT


def test_tanh_collapse_classifies_saturated():
    spec = sample_reservoir(6, Ensemble.dense(), 0.95, seed=7)
    th = saturation_thresholds(spec, 0.1, 10.0)
    p = InputProcess(sigma=4.0 * th.sigma_upper, length=2000, washout=100, seed=8)
    traj = run(spec, TANH, p)
    assert classify_regime(traj, spec, TANH, p.sigma) is Regime.SATURATED


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def test_export_trajectory_columnar(tmp_path):
    spec = scalar_spec(0.0)
    p = InputProcess(sigma=1.0, length=5, washout=0, seed=3)
    traj = run(spec, IDENTITY, p)
    path = tmp_path / "traj.txt"
    export_trajectory(traj, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "t z x0"
    assert len(lines) == 6
    first = lines[1].split()
    assert int(first[0]) == 0
    assert float(first[1]) == traj.inputs[0]
    assert float(first[2]) == traj.states[0, 0]
