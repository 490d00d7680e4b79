import numpy as np
import pytest

from memcap import (
    CapacityError,
    Ensemble,
    IDENTITY,
    InputProcess,
    ReservoirSpec,
    compute_thresholds,
    default_tau_max,
    estimate_mc_tau,
    estimate_total_mc,
    generate_inputs,
    linear_mc_oracle,
    piecewise_sigmoid,
    run,
    sample_reservoir,
    solve_state_covariance,
)
from memcap.capacity import parse_profile_record, profile_record
from memcap.dynamics import Trajectory

PWS = piecewise_sigmoid(0.5, 2.0)


def scalar_spec(a: float, c: float = 1.0) -> ReservoirSpec:
    return ReservoirSpec(n=1, connectivity=[[a]], input_mask=[c])


def make_trajectory(states: np.ndarray, inputs: np.ndarray) -> Trajectory:
    # Hand-built trajectory for exercising estimator edge cases.
    n = states.shape[1]
    spec = ReservoirSpec(n=n, connectivity=np.zeros((n, n)), input_mask=np.ones(n))
    process = InputProcess(sigma=1.0, length=len(inputs), washout=0, seed=0)
    return Trajectory(
        inputs=inputs,
        states=states,
        pre_state=np.zeros(n),
        spec=spec,
        activation=IDENTITY,
        process=process,
    )


# ---------------------------------------------------------------------------
# sample estimator on known systems
# ---------------------------------------------------------------------------

def test_memoryless_identity_lag_profile():
    # x_t = z_t exactly: all capacity at lag 0, none beyond.
    spec = scalar_spec(0.0)
    p = InputProcess(sigma=1.0, length=100_000, washout=0, seed=12)
    traj = run(spec, IDENTITY, p)
    assert abs(estimate_mc_tau(traj, 0) - 1.0) <= 0.01
    assert estimate_mc_tau(traj, 1) <= 0.01


def test_scalar_linear_geometric_profile():
    # Stationary covariance of x = a x + z is c^2 / (1 - a^2); the lag profile
    # is (1 - a^2) a^(2 tau). Frozen from the closed form with a = 0.5.
    spec = scalar_spec(0.5)
    p = InputProcess(sigma=1.0, length=100_000, washout=500, seed=13)
    traj = run(spec, IDENTITY, p)
    expected = 0.75 * 0.25 ** np.arange(6)
    profile = estimate_total_mc(traj, tau_max=40)
    assert np.max(np.abs(profile.per_lag[:6] - expected)) <= 0.01
    assert abs(profile.total - 1.0) <= 0.02


def test_saturated_regime_concentrates_at_lag_zero():
    spec = sample_reservoir(5, Ensemble.dense(), 0.95, seed=3)
    th = compute_thresholds(spec, PWS)
    p = InputProcess(sigma=2.0 * th.sigma_upper, length=20_000, washout=200, seed=3)
    traj = run(spec, PWS, p)
    assert abs(estimate_mc_tau(traj, 0) - 1.0) <= 0.01
    for tau in (1, 2, 3):
        assert estimate_mc_tau(traj, tau) <= 0.01
    profile = estimate_total_mc(traj)
    assert abs(profile.total - 1.0) <= 0.02


def test_saturated_regime_states_decorrelate_from_past_inputs():
    # Sample correlation between z_{t-tau} and every coordinate sits in the
    # CLT band around zero for tau >= 1.
    spec = sample_reservoir(4, Ensemble.dense(), 0.95, seed=9)
    th = compute_thresholds(spec, PWS)
    p = InputProcess(sigma=2.0 * th.sigma_upper, length=20_000, washout=200, seed=10)
    traj = run(spec, PWS, p)
    z = traj.inputs - traj.inputs.mean()
    x = traj.states - traj.states.mean(axis=0)
    for tau in (1, 2, 3):
        m = len(z) - tau
        corr = (x[tau:].T @ z[:m]) / m
        corr /= np.std(traj.inputs) * np.std(traj.states, axis=0)
        assert np.max(np.abs(corr)) <= 6.0 / np.sqrt(m)


def test_linear_equivalent_total_approaches_dimension():
    spec = sample_reservoir(6, Ensemble.orthogonal(), 0.95, seed=5)
    th = compute_thresholds(spec, PWS)
    p = InputProcess(sigma=0.5 * th.sigma_lower, length=50_000, washout=500, seed=6)
    traj = run(spec, PWS, p)
    profile = estimate_total_mc(traj, tau_max=60)
    assert 0.9 * spec.n <= profile.total <= spec.n


def test_estimator_matches_oracle_for_identity_activation():
    spec = sample_reservoir(6, Ensemble.orthogonal(), 0.95, seed=8)
    p = InputProcess(sigma=1.0, length=100_000, washout=500, seed=9)
    traj = run(spec, IDENTITY, p)
    profile = estimate_total_mc(traj, tau_max=20)
    oracle = linear_mc_oracle(spec, tau_max=20)
    k = min(len(profile.per_lag), 21)
    assert np.max(np.abs(profile.per_lag[:k] - oracle.per_lag[:k])) <= 0.02


def test_scale_invariance_in_the_linear_regime():
    # Same Rademacher signs at two scales an order of magnitude apart: the
    # estimated profiles coincide and both match the scale-free oracle.
    spec = sample_reservoir(5, Ensemble.orthogonal(), 0.95, seed=14)
    th = compute_thresholds(spec, PWS)
    sigma = 0.5 * th.sigma_lower
    profiles = []
    for scale in (sigma, sigma / 10.0):
        p = InputProcess(sigma=scale, length=50_000, washout=500, seed=15)
        traj = run(spec, PWS, p)
        profiles.append(estimate_total_mc(traj, tau_max=15).per_lag)
    width = min(len(profiles[0]), len(profiles[1]))
    assert np.max(np.abs(profiles[0][:width] - profiles[1][:width])) <= 0.02
    oracle = linear_mc_oracle(spec, tau_max=15)
    for per_lag in profiles:
        k = min(len(per_lag), len(oracle.per_lag))
        assert np.max(np.abs(per_lag[:k] - oracle.per_lag[:k])) <= 0.02


# ---------------------------------------------------------------------------
# estimator mechanics
# ---------------------------------------------------------------------------

def test_per_lag_values_are_clipped_and_total_bounded():
    spec = sample_reservoir(4, Ensemble.dense(), 0.95, seed=1)
    p = InputProcess(sigma=1.0, length=5000, washout=100, seed=1)
    traj = run(spec, PWS, p)
    profile = estimate_total_mc(traj)
    assert np.all(profile.per_lag >= 0.0) and np.all(profile.per_lag <= 1.0)
    assert 0.0 <= profile.total <= spec.n


def test_early_stop_fires_on_long_dead_tail():
    spec = sample_reservoir(5, Ensemble.dense(), 0.95, seed=3)
    th = compute_thresholds(spec, PWS)
    p = InputProcess(sigma=2.0 * th.sigma_upper, length=100_000, washout=200, seed=4)
    traj = run(spec, PWS, p)
    profile = estimate_total_mc(traj, tau_max=100)
    assert profile.diagnostics.early_stop_lag is not None
    assert profile.diagnostics.early_stop_lag < 40
    assert len(profile.per_lag) == profile.diagnostics.early_stop_lag + 1


def test_default_ridge_is_relative_to_covariance_scale():
    spec = scalar_spec(0.5)
    p = InputProcess(sigma=1.0, length=5000, washout=100, seed=2)
    traj = run(spec, IDENTITY, p)
    profile = estimate_total_mc(traj, tau_max=5)
    centered = traj.states - traj.states.mean(axis=0)
    gamma = centered.T @ centered / len(traj.inputs)
    assert profile.ridge == pytest.approx(1e-10 * np.trace(gamma) / spec.n)
    explicit = estimate_total_mc(traj, tau_max=5, ridge=1e-6)
    assert explicit.ridge == 1e-6


def test_lag_bounds_are_enforced():
    rng = np.random.default_rng(0)
    traj = make_trajectory(rng.standard_normal((50, 3)), rng.choice([-1.0, 1.0], size=50))
    with pytest.raises(ValueError):
        estimate_mc_tau(traj, -1)
    constant = make_trajectory(rng.standard_normal((50, 3)), np.ones(50))
    with pytest.raises(CapacityError, match="zero sample variance"):
        estimate_mc_tau(constant, 0)


def test_short_window_rejected():
    rng = np.random.default_rng(1)
    states = rng.standard_normal((40, 3))
    inputs = rng.choice([-1.0, 1.0], size=40)
    traj = make_trajectory(states, inputs)
    with pytest.raises(CapacityError, match="aligned pairs"):
        estimate_mc_tau(traj, 38)
    with pytest.raises(CapacityError, match="aligned pairs"):
        estimate_total_mc(traj, tau_max=38)
    with pytest.raises(ValueError):
        estimate_total_mc(traj, tau_max=0)


def test_singular_covariance_error_mentions_ridge():
    rng = np.random.default_rng(2)
    inputs = rng.choice([-1.0, 1.0], size=100)
    states = np.zeros((100, 2))  # constant states, singular covariance
    traj = make_trajectory(states, inputs)
    with pytest.raises(CapacityError, match="ridge"):
        estimate_total_mc(traj, tau_max=2, ridge=0.0)
    with pytest.raises(ValueError):
        estimate_total_mc(traj, tau_max=2, ridge=-1.0)


# ---------------------------------------------------------------------------
# linear oracle
# ---------------------------------------------------------------------------

def test_stationary_covariance_scalar_closed_form():
    g = solve_state_covariance(np.array([[0.5]]), np.array([[1.0]]))
    assert abs(g[0, 0] - 1.0 / 0.75) <= 1e-12


def test_stationary_covariance_fixed_point_residual():
    spec = sample_reservoir(8, Ensemble.dense(), 0.95, seed=21)
    q = np.outer(spec.input_mask, spec.input_mask)
    g = solve_state_covariance(spec.connectivity, q)
    residual = spec.connectivity @ g @ spec.connectivity.T + q - g
    assert np.max(np.abs(residual)) <= 1e-12 * np.max(np.abs(g))


def test_stationary_covariance_requires_contraction():
    with pytest.raises(CapacityError):
        solve_state_covariance(np.eye(2), np.eye(2))


def test_oracle_scalar_closed_form():
    oracle = linear_mc_oracle(scalar_spec(0.5), tau_max=10)
    expected = 0.75 * 0.25 ** np.arange(11)
    assert np.max(np.abs(oracle.per_lag - expected)) <= 1e-12
    assert abs(oracle.per_lag[0] - 0.75) <= 1e-12


def test_oracle_memoryless_scalar():
    oracle = linear_mc_oracle(scalar_spec(0.0, c=2.0), tau_max=5)
    assert oracle.per_lag[0] == pytest.approx(1.0, abs=1e-12)
    assert np.all(oracle.per_lag[1:] == 0.0)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_oracle_total_reaches_dimension(n):
    spec = sample_reservoir(n, Ensemble.dense(), 0.95, seed=30 + n) if n > 1 else scalar_spec(0.95)
    oracle = linear_mc_oracle(spec, tau_max=200)
    assert n - 0.05 <= oracle.total <= n


def test_oracle_independent_of_input_scale_by_construction():
    # No sigma argument exists; doubling the mask rescales covariances
    # consistently and leaves the profile unchanged.
    spec = sample_reservoir(4, Ensemble.dense(), 0.95, seed=40)
    doubled = ReservoirSpec(n=4, connectivity=spec.connectivity, input_mask=2.0 * spec.input_mask)
    a = linear_mc_oracle(spec, tau_max=12).per_lag
    b = linear_mc_oracle(doubled, tau_max=12).per_lag
    assert np.max(np.abs(a - b)) <= 1e-10


def test_default_tau_max():
    assert default_tau_max(30) == 90
    assert default_tau_max(100) == 200


# ---------------------------------------------------------------------------
# flat records
# ---------------------------------------------------------------------------

def test_profile_record_roundtrip():
    spec = scalar_spec(0.5)
    oracle = linear_mc_oracle(spec, tau_max=4)
    line = profile_record(oracle, sigma=0.25)
    sigma, total, tau_max, ridge, clips, per_lag = parse_profile_record(line)
    assert sigma == 0.25
    assert total == oracle.total
    assert tau_max == 4
    assert ridge == 0.0
    assert clips == oracle.diagnostics.clipped_lags
    assert np.array_equal(per_lag, oracle.per_lag)
