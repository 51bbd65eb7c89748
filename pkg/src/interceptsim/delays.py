"""Real-time uncertainty-interval estimation and delay resolution.

One estimator cycle: if a mode dominates (modal probability above
W_thres), the trailing uncertainty-interval length is the weighted
p_thres-quantile of the complement-mode sojourn times. Otherwise the
first-principles detection-delay approximation seeds the estimate before
the first dominance event, and afterwards the last fitted cube-root model
is propagated in time-to-go.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .estimation import ParticleEnsemble, THETA
from .stats import weighted_quantile

SOURCE_QUANTILE = "quantile"
SOURCE_ANALYTIC = "analytic-init"
SOURCE_PROPAGATED = "propagated"


@dataclass(frozen=True)
class UncertaintyEstimate:
    theta_star: float          # s, after smoothing/flooring
    source: str
    t_k: float
    raw: float | None = None   # unsmoothed quantile value when applicable


@dataclass(frozen=True)
class AnalyticDelayParams:
    """Inputs to the first-principles detection-delay approximation."""

    tau_e: float
    sigma_lambda: float
    delta_a: float              # command jump magnitude, m/s^2
    k_xi: float = 2.0
    f_meas: float = 100.0

    def __post_init__(self):
        for name in ("tau_e", "sigma_lambda", "delta_a", "k_xi", "f_meas"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")


class EmptyComplementError(LookupError):
    """All posterior mass sits in the dominant mode."""


def analytic_theta(t_go: float, params: AnalyticDelayParams,
                   v_rho: float) -> float:
    """Detection-delay approximation with the one-sample floor.

    1/f + (-6 tau_E k_xi V_rho t_go sigma_lambda / delta_a)^(1/3); a switch
    in the final sample is undetectable, hence the floor.
    """
    if t_go < 0.0:
        raise ValueError("t_go must be nonnegative")
    if v_rho >= 0.0:
        raise ValueError("analytic delay model requires closing geometry")
    base = (-6.0 * params.tau_e * params.k_xi * v_rho * t_go
            * params.sigma_lambda / params.delta_a)
    return 1.0 / params.f_meas + base ** (1.0 / 3.0)


def greedy_theta_star(ensemble: ParticleEnsemble, dominant: int) -> float:
    """Largest complement-mode sojourn time (volatile upper envelope)."""
    mask = ensemble.modes != dominant
    if not np.any(mask):
        raise EmptyComplementError("no complement-mode particles")
    return float(ensemble.states[mask, THETA].max())


def estimate_theta_star(ensemble: ParticleEnsemble, w_thres: float,
                        p_thres: float,
                        max_age: float | None = None) -> UncertaintyEstimate | None:
    """Soft quantile estimate; None when no mode dominates.

    Complement weights are renormalized within the complement set before
    taking the quantile, which is the particle reading of the conditional
    sojourn density. max_age, when given, drops complement particles whose
    sojourn exceeds it: those hypothesize no maneuver at all (sojourn
    clocks inherited from before the engagement), not an undetected recent
    one, and would otherwise blow up the estimate right after a true
    switch is detected, while the old-mode bank is still being flushed.
    """
    probs = ensemble.modal_probabilities()
    dominant = int(np.argmax(probs))
    if probs[dominant] <= w_thres:
        return None
    mask = ensemble.modes != dominant
    if max_age is not None:
        mask &= ensemble.states[:, THETA] <= max_age
    w = ensemble.weights[mask]
    if mask.sum() == 0 or w.sum() <= 0.0:
        raise EmptyComplementError("complement mode carries no weight")
    theta = weighted_quantile(ensemble.states[mask, THETA], w, p_thres)
    return UncertaintyEstimate(theta_star=float(theta), source=SOURCE_QUANTILE,
                               t_k=ensemble.t, raw=float(theta))


def resolve_delays(theta_star: float, c: float, b_fit: float,
                   t_go: float) -> tuple[float, float, float, float]:
    """(Delta1, Delta2, gamma1, gamma2) from the interval estimate.

    Delta2 covers the full uncertainty interval; Delta1 = C * Delta2. The
    slopes come from the fitted cube-root model rather than differencing
    the noisy estimate sequence.
    """
    if not 0.0 <= c <= 1.0:
        raise ValueError("C must lie in [0, 1]")
    d2 = theta_star
    d1 = c * theta_star
    g2 = b_fit / (3.0 * max(t_go, 1e-9) ** (2.0 / 3.0))
    return d1, d2, g2 * c, g2


@dataclass
class DelayEstimator:
    """Stateful uncertainty-interval estimator (one per engagement).

    Exactly one source is active per cycle: the quantile when a mode
    dominates, the analytic seed before the first dominance event, and the
    propagated fit otherwise. Fresh quantile values are smoothed with an
    exponential moving average; the fitted model pins its base to the
    one-sample floor and refits the cube-root gain at every fresh value.
    """

    analytic: AnalyticDelayParams
    w_thres: float = 0.9
    p_thres: float = 0.99
    c: float = 0.75
    ema_alpha: float = 0.3
    max_stale: float = 1.0      # s before a propagated fit falls back to analytic
    age_headroom: float = 0.25  # complement sojourns beyond t_k + this are
                                # pre-engagement hypotheses, not undetected switches

    _initialized: bool = field(default=False, init=False)
    _ema: float | None = field(default=None, init=False)
    _b_fit: float = field(default=0.0, init=False)
    _fit_time: float | None = field(default=None, init=False)
    last_estimate: UncertaintyEstimate | None = field(default=None, init=False)

    @property
    def floor(self) -> float:
        return 1.0 / self.analytic.f_meas

    def step(self, ensemble: ParticleEnsemble, t_go: float,
             v_rho: float) -> UncertaintyEstimate:
        t_k = ensemble.t
        try:
            fresh = estimate_theta_star(ensemble, self.w_thres, self.p_thres,
                                        max_age=t_k + self.age_headroom)
        except EmptyComplementError:
            fresh = None

        if fresh is not None:
            raw = max(fresh.theta_star, self.floor)
            self._ema = raw if self._ema is None else (
                self.ema_alpha * raw + (1.0 - self.ema_alpha) * self._ema)
            value = max(self._ema, self.floor)
            self._fit(value, t_go, t_k)
            self._initialized = True
            est = UncertaintyEstimate(theta_star=value, source=SOURCE_QUANTILE,
                                      t_k=t_k, raw=fresh.raw)
        elif not self._initialized:
            est = UncertaintyEstimate(
                theta_star=analytic_theta(max(t_go, 0.0), self.analytic, v_rho),
                source=SOURCE_ANALYTIC, t_k=t_k)
            self._fit(est.theta_star, t_go, None)
        else:
            est = self._propagate(t_go, v_rho, t_k)
        self.last_estimate = est
        return est

    def _fit(self, theta_star: float, t_go: float, t_k: float | None) -> None:
        if t_go > 1e-9:
            self._b_fit = max(theta_star - self.floor, 0.0) / t_go ** (1.0 / 3.0)
        self._fit_time = t_k

    def _propagate(self, t_go: float, v_rho: float,
                   t_k: float) -> UncertaintyEstimate:
        if (self._fit_time is not None
                and t_k - self._fit_time > self.max_stale):
            return UncertaintyEstimate(
                theta_star=analytic_theta(max(t_go, 0.0), self.analytic, v_rho),
                source=SOURCE_ANALYTIC, t_k=t_k)
        value = self.floor + self._b_fit * max(t_go, 0.0) ** (1.0 / 3.0)
        return UncertaintyEstimate(theta_star=max(value, self.floor),
                                   source=SOURCE_PROPAGATED, t_k=t_k)

    def resolve(self, estimate: UncertaintyEstimate,
                t_go: float) -> tuple[float, float, float, float]:
        return resolve_delays(estimate.theta_star, self.c, self._b_fit, t_go)

    @property
    def b_fit(self) -> float:
        return self._b_fit
