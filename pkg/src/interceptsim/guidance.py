"""Zero-effort-miss computation and the three guidance commands.

The ZEM formulas are implemented once in normalized variables; the
dimensional entry points normalize their inputs, evaluate the normalized
core, and scale back by a_e_max * tau_p^2. Linearization is about the
instantaneous LOS: the caller supplies the reference angle lam_ref, and
all lateral components are projections onto the normal of that reference
direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .game import BoundaryTable, DelayModel, GameParams, psi


# --- linearized state components -------------------------------------------

def linearized_components(rho, lam, gamma_e, a_e, gamma_p, a_p, lam_ref,
                          v_p, v_e):
    """(x1, x2, x3, x4) of the linear model, referenced to lam_ref.

    x1: lateral separation; x2: lateral relative velocity; x3/x4: pursuer
    and evader accelerations normal to the reference LOS. Vectorized over
    the state arguments. The velocities use each state's own geometry; only
    the projection uses the shared reference angle.
    """
    d_p = gamma_p - lam
    d_e = gamma_e + lam
    v_rho = -(v_p * np.cos(d_p) + v_e * np.cos(d_e))
    v_lam = -v_p * np.sin(d_p) + v_e * np.sin(d_e)
    rel = lam - lam_ref
    x1 = rho * np.sin(rel)
    x2 = v_rho * np.sin(rel) + v_lam * np.cos(rel)
    x3 = a_p * np.cos(gamma_p - lam_ref)
    x4 = a_e * np.cos(gamma_e + lam_ref)
    return x1, x2, x3, x4


def xi_dot_values(states, gamma_p, lam_ref, v_p, v_e):
    """Per-particle lateral relative velocity for a (N,5) particle array.

    Lean path for the smoother's hot query: only the x2 projection.
    """
    lam = states[:, 1]
    d_p = gamma_p - lam
    d_e = states[:, 2] + lam
    v_rho = -(v_p * np.cos(d_p) + v_e * np.cos(d_e))
    v_lam = -v_p * np.sin(d_p) + v_e * np.sin(d_e)
    rel = lam - lam_ref
    return v_rho * np.sin(rel) + v_lam * np.cos(rel)


def a_e_normal_values(states, lam_ref):
    """Per-particle evader acceleration normal to the reference LOS."""
    return states[:, 3] * np.cos(states[:, 2] + lam_ref)


# --- guidance inputs ---------------------------------------------------------

@dataclass
class GuidanceInputs:
    """Dimensional inputs to the ZEM formulas at one guidance update."""

    x1: float                 # lateral separation, m
    x2_delayed: float         # lateral relative velocity at t - Delta1, m/s
    x3: float                 # pursuer normal acceleration now, m/s^2
    x4_delayed: float         # evader normal acceleration at t - Delta2, m/s^2
    t_go: float               # s
    x3_hist_t: np.ndarray = field(default_factory=lambda: np.zeros(0))
    x3_hist_v: np.ndarray = field(default_factory=lambda: np.zeros(0))
    t_now: float = 0.0


def _x3_window_integral(inputs: GuidanceInputs, delta1: float) -> float:
    """Trapezoidal integral of the stored x3 samples over [t-Delta1, t]."""
    if delta1 <= 0.0:
        return 0.0
    t0 = inputs.t_now - delta1
    t = inputs.x3_hist_t
    v = inputs.x3_hist_v
    if t.size == 0 or t[0] > t0 + 1e-12 or t[-1] < inputs.t_now - 1e-12:
        raise ValueError("x3 history does not cover the Delta1 window")
    lo = np.searchsorted(t, t0, side="left")
    hi = np.searchsorted(t, inputs.t_now, side="right")
    tt = np.concatenate(([t0], t[lo:hi], [inputs.t_now]))
    vv = np.concatenate(([np.interp(t0, t, v)], v[lo:hi],
                         [np.interp(inputs.t_now, t, v)]))
    return float(np.sum(0.5 * np.diff(tt) * (vv[1:] + vv[:-1])))


# --- normalized ZEM cores ----------------------------------------------------

def zem_cc_norm(x1b, x2b, x3b, x3_int_b, x4b, tau, d1, d2, mu, eps):
    """Normalized center of the delayed-information ZEM uncertainty set."""
    coef4 = eps * np.exp(-d2 / eps) * (
        tau * np.exp(d1 / eps) + eps * np.exp(-tau / eps) - eps)
    return (x1b + tau * x2b - mu * psi(tau) * x3b - mu * tau * x3_int_b
            + coef4 * x4b)


def zem_dgl1_norm(x1b, x2b, x3b, x4b, tau, mu, eps):
    """Normalized perfect-information ZEM."""
    return x1b + tau * x2b - mu * psi(tau) * x3b + eps ** 2 * psi(tau / eps) * x4b


# --- dimensional ZEM ---------------------------------------------------------

def zem_dgl1(inputs: GuidanceInputs, params: GameParams) -> float:
    """Perfect-information ZEM in metres (current, undelayed inputs)."""
    tp, te = params.tau_p, params.tau_e
    tau = inputs.t_go / tp
    return float(inputs.x1 + inputs.t_go * inputs.x2_delayed
                 - tp ** 2 * psi(tau) * inputs.x3
                 + te ** 2 * psi(inputs.t_go / te) * inputs.x4_delayed)


def zem_dglcc(inputs: GuidanceInputs, delta1: float, delta2: float,
              params: GameParams) -> float:
    """Two-delay ZEM in metres; delta1/delta2 are time delays in seconds."""
    if delta1 > delta2 + 1e-12:
        raise ValueError("delta1 must not exceed delta2")
    tp = params.tau_p
    scale = params.zem_scale
    x1b = inputs.x1 / scale
    x2b = inputs.x2_delayed / (params.a_e_max * tp)
    x3b = inputs.x3 / (params.mu * params.a_e_max)
    x4b = inputs.x4_delayed / params.a_e_max
    x3_int_b = _x3_window_integral(inputs, delta1) / (params.mu * params.a_e_max * tp)
    zb = zem_cc_norm(x1b, x2b, x3b, x3_int_b, x4b,
                     inputs.t_go / tp, delta1 / tp, delta2 / tp,
                     params.mu, params.epsilon)
    return float(zb * scale)


# --- commands ----------------------------------------------------------------

def saturate(x: float) -> float:
    return max(-1.0, min(1.0, x))


def command_from_zem(z_norm: float, tau: float, table: BoundaryTable,
                     k: float) -> float:
    """Sign law in the regular region, linear law inside the singular region."""
    z_star = table.z_star_at(tau)
    if tau < table.tau_s or abs(z_norm) >= z_star or z_star <= 0.0:
        return float(np.sign(z_norm))
    return saturate(z_norm / (k * z_star))


def command_dgl1(inputs: GuidanceInputs, params: GameParams,
                 table: BoundaryTable | None = None) -> float:
    if table is None:
        table = BoundaryTable(DelayModel.zero(), params)
    z = zem_dgl1(inputs, params) / params.zem_scale
    return command_from_zem(z, inputs.t_go / params.tau_p, table, params.k)


def command_dglc(inputs: GuidanceInputs, delta_t: float, params: GameParams,
                 table: BoundaryTable | None = None) -> float:
    """Constant-delay baseline: Delta1 = 0, Delta2 = delta_t.

    Documented realization: the formula coefficients assume the constant
    acceleration delay, while the inputs are the current filtered
    estimates (x2_delayed/x4_delayed slots carry current values).
    """
    if table is None:
        table = BoundaryTable(DelayModel.constant(0.0, delta_t / params.tau_p), params)
    z = zem_dglcc(inputs, 0.0, delta_t, params) / params.zem_scale
    return command_from_zem(z, inputs.t_go / params.tau_p, table, params.k)


def command_tv_dglcc(inputs: GuidanceInputs, delta1: float, delta2: float,
                     delay_model: DelayModel, params: GameParams,
                     table: BoundaryTable | None = None) -> float:
    """Time-varying two-delay command.

    delta1/delta2 are the resolved delays (seconds) used in the ZEM;
    delay_model is their normalized-time functional form, which fixes the
    singular-region boundary.
    """
    if table is None:
        table = BoundaryTable(delay_model, params)
    z = zem_dglcc(inputs, delta1, delta2, params) / params.zem_scale
    return command_from_zem(z, inputs.t_go / params.tau_p, table, params.k)


# --- stateful law wrappers (boundary-table caching) --------------------------

class Dgl1Law:
    name = "dgl1"

    def __init__(self, params: GameParams):
        self.params = params
        self.table = BoundaryTable(DelayModel.zero(), params)
        self.last_z = 0.0
        self.last_z_star = 0.0

    def command(self, inputs: GuidanceInputs, **_) -> float:
        self.last_z = zem_dgl1(inputs, self.params) / self.params.zem_scale
        self.last_z_star = self.table.z_star_at(inputs.t_go / self.params.tau_p)
        return command_from_zem(self.last_z, inputs.t_go / self.params.tau_p,
                                self.table, self.params.k)


class DglcLaw:
    name = "dglc"

    def __init__(self, params: GameParams, delta_t: float = 0.3):
        self.params = params
        self.delta_t = delta_t
        self.table = BoundaryTable(
            DelayModel.constant(0.0, delta_t / params.tau_p), params)
        self.last_z = 0.0
        self.last_z_star = 0.0

    def command(self, inputs: GuidanceInputs, **_) -> float:
        self.last_z = zem_dglcc(inputs, 0.0, self.delta_t,
                                self.params) / self.params.zem_scale
        self.last_z_star = self.table.z_star_at(inputs.t_go / self.params.tau_p)
        return command_from_zem(self.last_z, inputs.t_go / self.params.tau_p,
                                self.table, self.params.k)


class TvDglccLaw:
    """TV-DGLCC with boundary tables cached against the delay-model fit.

    Root-finding and boundary integration every guidance cycle would be
    wasted work: the fitted cube-root gain is quantized so that the
    acceleration delay moves by no more than about a millisecond within a
    bucket, and tables are reused whenever the fit returns to a known
    bucket.
    """

    name = "tv-dglcc"

    def __init__(self, params: GameParams, c: float, b_quantum: float = 1.5e-3,
                 tau_max: float = 22.0, scan_n: int = 2500, cache_max: int = 256):
        if not 0.0 <= c <= 1.0:
            raise ValueError("c must lie in [0, 1]")
        self.params = params
        self.c = c
        self.b_quantum = b_quantum
        self._tau_max = tau_max
        self._scan_n = scan_n
        self._cache: dict[int, tuple[DelayModel, BoundaryTable]] = {}
        self._cache_max = cache_max
        self._key = None
        self.table: BoundaryTable | None = None
        self.model: DelayModel | None = None
        self.rebuild_count = 0
        self.last_z = 0.0
        self.last_z_star = 0.0

    def update_delays(self, a_time: float, b_time: float,
                      theta_star: float) -> None:
        """Refresh the delay model from the time-domain fit Delta2 = a + b*t_go^(1/3)."""
        key = int(round(max(b_time, 0.0) / self.b_quantum))
        if key == self._key:
            return
        entry = self._cache.get(key)
        if entry is None:
            tp = self.params.tau_p
            b_q = key * self.b_quantum
            a_n = a_time / tp
            b_n = b_q * tp ** (1.0 / 3.0) / tp
            model = DelayModel.scaled(a_n, b_n, self.c)
            table = BoundaryTable(model, self.params, tau_max=self._tau_max,
                                  scan_n=self._scan_n)
            if len(self._cache) >= self._cache_max:
                self._cache.clear()
            entry = self._cache[key] = (model, table)
            self.rebuild_count += 1
        self.model, self.table = entry
        self._key = key

    def command(self, inputs: GuidanceInputs, delta1: float = 0.0,
                delta2: float = 0.0) -> float:
        if self.table is None:
            raise RuntimeError("update_delays must be called before command")
        self.last_z = zem_dglcc(inputs, delta1, delta2,
                                self.params) / self.params.zem_scale
        self.last_z_star = self.table.z_star_at(inputs.t_go / self.params.tau_p)
        return command_from_zem(self.last_z, inputs.t_go / self.params.tau_p,
                                self.table, self.params.k)


def make_law(name: str, params: GameParams, dglc_delta: float = 0.3,
             c: float = 0.75):
    name = name.lower()
    if name == "dgl1":
        return Dgl1Law(params)
    if name == "dglc":
        return DglcLaw(params, dglc_delta)
    if name in ("tv-dglcc", "tv_dglcc", "tvdglcc"):
        return TvDglccLaw(params, c)
    raise ValueError(f"unknown guidance law {name!r}")
