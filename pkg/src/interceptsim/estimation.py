"""Interacting multiple-model particle filter over the sojourn-augmented state.

Particle state columns: [rho, lam, gamma_E, a_E, theta]. Modes index the
evader's command set (two-mode bang-bang by default: mode 0 commands
-a_e_max, mode 1 commands +a_e_max). The interaction stage is merged into
the resampling stage: for every target mode, ancestors are drawn from the
full mixture weighted by w * p_ij(theta), then the sojourn clock is
updated, particles are propagated with mode-matched commands, and weights
are refreshed from the bearing likelihood.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import EngagementState, VehicleParams
from .kernels import propagate_states

RHO, LAM, GAMMA_E, A_E, THETA = range(5)


@dataclass
class TransitionModel:
    """Row-stochastic mode transition matrix, optionally sojourn-dependent.

    tpm is either an (M, M) matrix or a callable mapping a sojourn-time
    array (N,) to an (N, M, M) stack of matrices.
    """

    tpm: object

    def __post_init__(self):
        if not callable(self.tpm):
            m = np.asarray(self.tpm, dtype=float)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError("tpm must be square")
            if np.any(m < 0.0) or not np.allclose(m.sum(axis=1), 1.0, atol=1e-12):
                raise ValueError("tpm rows must be nonnegative and sum to 1")
            self.tpm = m

    @property
    def n_modes(self) -> int:
        if callable(self.tpm):
            probe = self.tpm(np.zeros(1))
            return probe.shape[-1]
        return self.tpm.shape[0]

    def probabilities(self, modes: np.ndarray, thetas: np.ndarray) -> np.ndarray:
        """(N, M) transition probabilities out of each particle's mode."""
        if callable(self.tpm):
            stack = self.tpm(thetas)
            return stack[np.arange(modes.size), modes, :]
        return self.tpm[modes, :]


@dataclass
class NoiseConfig:
    """Filter tuning: process jitter per step and the bearing likelihood width.

    sigma_lam_rough is a small post-propagation roughening of the LOS
    angle; it keeps the ensemble's bearing spread from collapsing below
    the measurement noise, which would make the modal probabilities
    flicker on single unlucky measurements.
    """

    sigma_lambda: float = 5e-4       # rad, measurement noise std
    sigma_gamma_e: float = math.radians(0.1)  # rad per step
    sigma_a_e: float = 2.0           # m/s^2 per step
    sigma_lam_rough: float = 0.0     # rad per step


@dataclass
class ParticleEnsemble:
    states: np.ndarray   # (N, 5)
    modes: np.ndarray    # (N,) int
    weights: np.ndarray  # (N,)
    t: float
    n_modes: int

    @property
    def n_particles(self) -> int:
        return self.states.shape[0]

    @property
    def per_mode(self) -> int:
        return self.n_particles // self.n_modes

    def modal_probabilities(self) -> np.ndarray:
        return np.bincount(self.modes, weights=self.weights,
                           minlength=self.n_modes)

    def mean_state(self) -> np.ndarray:
        return self.weights @ self.states

    def ess(self) -> float:
        return 1.0 / float(np.sum(self.weights ** 2))


@dataclass
class FilterOutput:
    mean: np.ndarray          # (5,) weighted mean state
    modal_probs: np.ndarray   # (M,)
    ess: float
    diverged: bool = False


@dataclass
class StepResult:
    ensemble: ParticleEnsemble
    output: FilterOutput
    ancestors: np.ndarray     # (N,) indices into the previous ensemble


def systematic_resample(probs: np.ndarray, n_draws: int,
                        rng: np.random.Generator) -> np.ndarray:
    """Systematic resampling: one uniform offset, O(N), minimal variance."""
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    positions = (rng.random() + np.arange(n_draws)) / n_draws
    return np.searchsorted(cdf, positions, side="left").astype(np.int64)


def initialize_ensemble(truth: EngagementState, pursuer_xy, radar_xy,
                        p_r_std, theta_ranges, params: VehicleParams,
                        per_mode: int, n_modes: int,
                        rng: np.random.Generator,
                        v_by_mode=None) -> ParticleEnsemble:
    """Radar-handoff initialization.

    Draws (rho_R, lam_R, gamma_E, a_E) around the true radar-relative
    state, maps each draw to the pursuer-relative polar state through the
    radar/pursuer geometry, and seeds the sojourn clock per mode from the
    configured uniform ranges. Weights start equal at 1/(M*S).
    """
    p_r_std = np.asarray(p_r_std, dtype=float)
    if p_r_std.shape != (4,) or np.any(p_r_std < 0.0):
        raise ValueError("p_r_std must be 4 nonnegative standard deviations")
    if len(theta_ranges) != n_modes:
        raise ValueError("need one sojourn range per mode")

    xp, yp = pursuer_xy
    xr, yr = radar_xy
    # true evader position, then the radar-relative truth
    ex = xp + truth.rho * math.cos(truth.lam)
    ey = yp + truth.rho * math.sin(truth.lam)
    rho_r = math.hypot(ex - xr, ey - yr)
    lam_r = math.atan2(ey - yr, ex - xr)

    n = per_mode * n_modes
    mean = np.array([rho_r, lam_r, truth.gamma_e, truth.a_e])
    draws = mean + rng.standard_normal((n, 4)) * p_r_std

    # map radar-relative draws back to pursuer-relative polar coordinates
    ex_s = xr + draws[:, 0] * np.cos(draws[:, 1])
    ey_s = yr + draws[:, 0] * np.sin(draws[:, 1])
    rho_s = np.hypot(ex_s - xp, ey_s - yp)
    lam_s = np.arctan2(ey_s - yp, ex_s - xp)

    states = np.empty((n, 5))
    states[:, RHO] = rho_s
    states[:, LAM] = lam_s
    states[:, GAMMA_E] = draws[:, 2]
    states[:, A_E] = draws[:, 3]
    modes = np.repeat(np.arange(n_modes), per_mode)
    for m, (lo, hi) in enumerate(theta_ranges):
        sel = modes == m
        states[sel, THETA] = rng.uniform(lo, hi, size=int(sel.sum()))

    return ParticleEnsemble(states=states, modes=modes,
                            weights=np.full(n, 1.0 / n), t=truth.t,
                            n_modes=n_modes)


def immpf_step(ensemble: ParticleEnsemble, z: float, transition: TransitionModel,
               params: VehicleParams, noise: NoiseConfig, u_cmd: float,
               pursuer_gamma_p: float, pursuer_a_p: float,
               gamma_p_at_meas: float, rng: np.random.Generator,
               v_by_mode=None, nsub: int = 1) -> StepResult:
    """One combined interaction/resampling + prediction + filtering cycle.

    pursuer_gamma_p / pursuer_a_p are the known own-state at the start of
    the interval; gamma_p_at_meas is the own path angle at the measurement
    instant (used for the predicted bearing). The sojourn clock follows
    the indicator update: retained mode adds 1/f, a switch resets to 1/f.
    """
    n = ensemble.n_particles
    m_modes = ensemble.n_modes
    per_mode = ensemble.per_mode
    dt = 1.0 / params.f_meas
    if v_by_mode is None:
        v_by_mode = _default_mode_commands(m_modes)

    trans = transition.probabilities(ensemble.modes, ensemble.states[:, THETA])
    mix = ensemble.weights[:, None] * trans          # (N, M)
    c_modes = mix.sum(axis=0)                        # predictive modal masses

    ancestors = np.empty(n, dtype=np.int64)
    new_modes = np.repeat(np.arange(m_modes), per_mode)
    log_prior = np.empty(n)
    for j in range(m_modes):
        sl = slice(j * per_mode, (j + 1) * per_mode)
        if c_modes[j] > 0.0:
            ancestors[sl] = systematic_resample(mix[:, j] / c_modes[j],
                                                per_mode, rng)
            log_prior[sl] = math.log(c_modes[j] / per_mode)
        else:
            ancestors[sl] = systematic_resample(
                np.full(n, 1.0 / n), per_mode, rng)
            log_prior[sl] = -np.inf

    states = ensemble.states[ancestors].copy()
    retained = ensemble.modes[ancestors] == new_modes
    states[:, THETA] = np.where(retained, states[:, THETA] + dt, dt)

    rows = np.empty((n, 6))
    rows[:, :4] = states[:, :4]
    rows[:, 4] = pursuer_gamma_p
    rows[:, 5] = pursuer_a_p
    a_e_cmd = params.a_e_max * np.asarray(v_by_mode, dtype=float)[new_modes]
    propagate_states(rows, params.a_p_max * u_cmd, a_e_cmd, dt, nsub,
                     params.v_p, params.v_e, params.tau_p, params.tau_e)
    states[:, :4] = rows[:, :4]

    if noise.sigma_gamma_e > 0.0:
        states[:, GAMMA_E] += rng.normal(0.0, noise.sigma_gamma_e, n)
    if noise.sigma_a_e > 0.0:
        states[:, A_E] += rng.normal(0.0, noise.sigma_a_e, n)
    if noise.sigma_lam_rough > 0.0:
        states[:, LAM] += rng.normal(0.0, noise.sigma_lam_rough, n)

    resid = z - (gamma_p_at_meas - states[:, LAM])
    logw = log_prior - 0.5 * (resid / noise.sigma_lambda) ** 2
    logw_max = logw.max()
    diverged = False
    if not np.isfinite(logw_max):
        weights = np.full(n, 1.0 / n)
        diverged = True
    else:
        w = np.exp(logw - logw_max)
        total = w.sum()
        if total <= 0.0 or not np.isfinite(total):
            weights = np.full(n, 1.0 / n)
            diverged = True
        else:
            weights = w / total

    new_ens = ParticleEnsemble(states=states, modes=new_modes, weights=weights,
                               t=ensemble.t + dt, n_modes=m_modes)
    output = FilterOutput(mean=new_ens.mean_state(),
                          modal_probs=new_ens.modal_probabilities(),
                          ess=new_ens.ess(), diverged=diverged)
    return StepResult(ensemble=new_ens, output=output, ancestors=ancestors)


def modal_probabilities(ensemble: ParticleEnsemble) -> np.ndarray:
    return ensemble.modal_probabilities()


def _default_mode_commands(m_modes: int) -> np.ndarray:
    if m_modes == 2:
        return np.array([-1.0, 1.0])
    return np.linspace(-1.0, 1.0, m_modes)
