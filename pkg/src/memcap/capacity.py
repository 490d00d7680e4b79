"""Memory capacity estimation from trajectories, plus the analytic linear oracle.

The lag-tau capacity of a state path is the normalized quadratic form

    MC_tau = cov(z_{t-tau}, x_t)^T Gamma_x^{-1} cov(x_t, z_{t-tau}) / var(z_t),

the best linear readout's R^2 for reconstructing the input tau steps back.
The total capacity is the sum over lags; for i.i.d. inputs the population
value lies between 1 and the state dimension N. Sample estimates at finite T
can fall slightly below the lower bound or exceed 1 per lag from sampling
noise, so per-lag values are clipped to [0, 1] and the clip count is reported
instead of hidden.

For the linear recursion x_t = A x_{t-1} + C z_t the whole profile is
available in closed form through the stationary covariance (a discrete
Lyapunov fixed point), which serves as an independent oracle for the sample
estimator. The input scale cancels, so the oracle takes no sigma argument.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import Trajectory
from .ensembles import ReservoirSpec, spectral_norm
from .errors import CapacityError

_EARLY_STOP_RUN = 10
_EARLY_STOP_LEVEL = 1e-4
_RELATIVE_RIDGE = 1e-10


def default_tau_max(n: int) -> int:
    """Truncation lag covering the geometric decay of the linear profile."""
    return min(3 * n, 200)


@dataclass
class CapacityDiagnostics:
    """Estimator health indicators reported alongside the capacity numbers."""

    gamma_condition: float
    clipped_lags: int
    total_clipped: bool
    early_stop_lag: int | None


@dataclass
class CapacityProfile:
    """Per-lag capacities, their truncated sum, and estimator diagnostics."""

    per_lag: np.ndarray
    total: float
    tau_max: int
    ridge: float
    diagnostics: CapacityDiagnostics


# ---------------------------------------------------------------------------
# sample estimator
# ---------------------------------------------------------------------------

class _Moments:
    """Centered states/inputs and the shared state covariance of one trajectory."""

    def __init__(self, traj: Trajectory, ridge: float | None):
        states = traj.states
        inputs = traj.inputs
        self.T, self.n = states.shape
        self.states_c = states - states.mean(axis=0)
        self.inputs_c = inputs - inputs.mean()
        self.var_z = float(self.inputs_c @ self.inputs_c) / self.T
        if self.var_z <= 0.0:
            raise CapacityError("input path has zero sample variance")
        self.gamma = (self.states_c.T @ self.states_c) / self.T
        eigs = np.linalg.eigvalsh(self.gamma)
        self.gamma_condition = float(eigs[-1] / eigs[0]) if eigs[0] > 0.0 else float("inf")
        if ridge is None:
            ridge = _RELATIVE_RIDGE * float(np.trace(self.gamma)) / self.n
        if ridge < 0.0:
            raise ValueError("ridge must be nonnegative")
        self.ridge = float(ridge)
        self.regularized = self.gamma + self.ridge * np.eye(self.n)
        try:
            np.linalg.cholesky(self.regularized)
        except np.linalg.LinAlgError as exc:
            raise CapacityError(
                "state covariance plus ridge is numerically singular; "
                "increase the ridge to stabilize the solve"
            ) from exc

    def cross_cov(self, tau: int) -> np.ndarray:
        # Aligned pairs (x_t, z_{t-tau}) over the stored window.
        m = self.T - tau
        return (self.states_c[tau:].T @ self.inputs_c[:m]) / m

    def mc_raw(self, taus: list[int]) -> np.ndarray:
        cross = np.stack([self.cross_cov(tau) for tau in taus], axis=1)
        solved = np.linalg.solve(self.regularized, cross)
        return np.einsum("ij,ij->j", cross, solved) / self.var_z

    def check_lag(self, tau: int) -> None:
        if tau < 0:
            raise ValueError("lag must be nonnegative")
        if tau >= self.T - self.n:
            raise CapacityError(
                f"lag {tau} leaves fewer than n + 1 = {self.n + 1} aligned pairs "
                f"(window length {self.T}); lengthen the trajectory or lower tau_max"
            )


def estimate_mc_tau(traj: Trajectory, tau: int, ridge: float | None = None) -> float:
    """Sample lag-``tau`` capacity of a trajectory, clipped to [0, 1].

    ``ridge`` regularizes the state covariance solve; None selects the default
    relative ridge 1e-10 * trace(Gamma_x) / n.
    """
    moments = _Moments(traj, ridge)
    moments.check_lag(tau)
    raw = float(moments.mc_raw([tau])[0])
    return min(max(raw, 0.0), 1.0)


def estimate_total_mc(
    traj: Trajectory,
    tau_max: int | None = None,
    ridge: float | None = None,
) -> CapacityProfile:
    """Truncated total capacity with shared covariance across lags.

    Lags run from 0 to ``tau_max`` (default min(3n, 200)) with an early stop
    once 10 consecutive per-lag estimates fall below 1e-4, where the geometric
    tail is already negligible. The total is clipped to the population range
    [0, n]; per-lag clips and a binding total clip are recorded in diagnostics.
    """
    moments = _Moments(traj, ridge)
    if tau_max is None:
        tau_max = default_tau_max(moments.n)
    if tau_max < 1:
        raise ValueError("tau_max must be at least 1")
    moments.check_lag(tau_max)

    per_lag: list[float] = []
    clipped = 0
    early_stop_lag: int | None = None
    below = 0
    tau = 0
    block = 16
    while tau <= tau_max and early_stop_lag is None:
        taus = list(range(tau, min(tau + block, tau_max + 1)))
        raw = moments.mc_raw(taus)
        for offset, value in enumerate(raw):
            clip = min(max(float(value), 0.0), 1.0)
            if clip != value:
                clipped += 1
            per_lag.append(clip)
            below = below + 1 if clip < _EARLY_STOP_LEVEL else 0
            if below >= _EARLY_STOP_RUN:
                early_stop_lag = taus[offset]
                break
        tau += block

    total_raw = float(np.sum(per_lag))
    total = min(total_raw, float(moments.n))
    return CapacityProfile(
        per_lag=np.array(per_lag),
        total=total,
        tau_max=tau_max,
        ridge=moments.ridge,
        diagnostics=CapacityDiagnostics(
            gamma_condition=moments.gamma_condition,
            clipped_lags=clipped,
            total_clipped=total < total_raw,
            early_stop_lag=early_stop_lag,
        ),
    )


# ---------------------------------------------------------------------------
# analytic linear oracle
# ---------------------------------------------------------------------------

def solve_state_covariance(
    a: np.ndarray,
    q: np.ndarray,
    tol: float = 1e-14,
    max_iter: int = 200_000,
) -> np.ndarray:
    """Fixed point of G = A G A^T + Q, the stationary covariance of the linear recursion.

    The iteration converges geometrically at rate ||A||_2^2, so it requires a
    spectral norm below 1.
    """
    a = np.asarray(a, dtype=float)
    q = np.asarray(q, dtype=float)
    if spectral_norm(a) >= 1.0:
        raise CapacityError("stationary covariance needs spectral norm of A below 1")
    g = q.copy()
    for _ in range(max_iter):
        g_next = a @ g @ a.T + q
        if np.max(np.abs(g_next - g)) <= tol * max(1.0, float(np.max(np.abs(g_next)))):
            return g_next
        g = g_next
    raise CapacityError("stationary covariance iteration did not converge")


def linear_mc_oracle(spec: ReservoirSpec, tau_max: int | None = None) -> CapacityProfile:
    """Population capacity profile of the linear recursion x_t = A x_{t-1} + C z_t.

    With unit-variance inputs the stationary covariance solves
    G = A G A^T + C C^T and the lag-tau capacity is (A^tau C)^T G^{-1} (A^tau C).
    Rescaling the inputs scales G and the cross covariance identically, so the
    profile is independent of the input scale.
    """
    if tau_max is None:
        tau_max = default_tau_max(spec.n)
    if tau_max < 0:
        raise ValueError("tau_max must be nonnegative")
    a = spec.connectivity
    c = spec.input_mask
    gamma = solve_state_covariance(a, np.outer(c, c))
    eigs = np.linalg.eigvalsh(gamma)
    condition = float(eigs[-1] / eigs[0]) if eigs[0] > 0.0 else float("inf")

    lagged = np.empty((spec.n, tau_max + 1))
    v = c.astype(float).copy()
    for tau in range(tau_max + 1):
        lagged[:, tau] = v
        v = a @ v
    try:
        solved = np.linalg.solve(gamma, lagged)
    except np.linalg.LinAlgError as exc:
        raise CapacityError(
            "stationary covariance is singular; the pair (A, C) does not excite "
            "the full state space"
        ) from exc
    raw = np.einsum("ij,ij->j", lagged, solved)
    per_lag = np.clip(raw, 0.0, 1.0)
    clipped = int(np.sum(per_lag != raw))
    total_raw = float(np.sum(per_lag))
    total = min(total_raw, float(spec.n))
    return CapacityProfile(
        per_lag=per_lag,
        total=total,
        tau_max=tau_max,
        ridge=0.0,
        diagnostics=CapacityDiagnostics(
            gamma_condition=condition,
            clipped_lags=clipped,
            total_clipped=total < total_raw,
            early_stop_lag=None,
        ),
    )


# ---------------------------------------------------------------------------
# flat records
# ---------------------------------------------------------------------------

def profile_record(profile: CapacityProfile, sigma: float) -> str:
    """One-line flat record: sigma, total, tau_max, ridge, clip count, per-lag values."""
    fields = [
        format(float(sigma), ".17g"),
        format(profile.total, ".17g"),
        str(profile.tau_max),
        format(profile.ridge, ".17g"),
        str(profile.diagnostics.clipped_lags),
    ]
    fields.extend(format(v, ".17g") for v in profile.per_lag)
    return ",".join(fields)


def parse_profile_record(line: str) -> tuple[float, float, int, float, int, np.ndarray]:
    """Inverse of :func:`profile_record`."""
    parts = line.strip().split(",")
    if len(parts) < 5:
        raise ValueError("profile record needs at least five fields")
    sigma = float(parts[0])
    total = float(parts[1])
    tau_max = int(parts[2])
    ridge = float(parts[3])
    clip_count = int(parts[4])
    per_lag = np.array([float(v) for v in parts[5:]])
    return sigma, total, tau_max, ridge, clip_count, per_lag
