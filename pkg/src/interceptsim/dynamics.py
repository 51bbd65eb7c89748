"""Planar engagement kinematics and first-order autopilot dynamics.

State convention: polar relative state (rho, lam) from pursuer to evader,
evader path angle gamma_E measured from the -X inertial axis (positive
toward +Y), pursuer path angle gamma_P from the +X axis. Bearing angles
are delta_P = gamma_P - lam and delta_E = gamma_E + lam; both vanish on a
head-on collision course.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .kernels import propagate_states

GRAVITY = 9.80665


class SingularGeometryError(ValueError):
    """Raised when the relative range is non-positive."""


@dataclass(frozen=True)
class VehicleParams:
    """Speeds, autopilot lags, acceleration bounds and the sensor rate."""

    v_p: float = 2500.0            # m/s
    v_e: float = 2500.0            # m/s
    tau_p: float = 0.2             # s
    tau_e: float = 0.2             # s
    a_p_max: float = 45.0 * GRAVITY  # m/s^2
    a_e_max: float = 20.0 * GRAVITY  # m/s^2
    f_meas: float = 100.0          # Hz

    def __post_init__(self):
        for name in ("v_p", "v_e", "tau_p", "tau_e", "a_p_max", "a_e_max", "f_meas"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.a_p_max <= self.a_e_max:
            raise ValueError("pursuer maneuverability ratio must exceed 1")

    @property
    def mu(self) -> float:
        return self.a_p_max / self.a_e_max

    @property
    def epsilon(self) -> float:
        return self.tau_e / self.tau_p


@dataclass(frozen=True)
class EngagementState:
    """Relative polar state plus sojourn clock and pursuer own-state."""

    rho: float      # range, m
    lam: float      # LOS angle, rad
    gamma_e: float  # evader path angle, rad
    a_e: float      # evader lateral acceleration, m/s^2
    theta: float    # sojourn time since last evader mode switch, s
    gamma_p: float  # pursuer path angle, rad
    a_p: float      # pursuer lateral acceleration, m/s^2
    t: float = 0.0  # simulation time, s

    def as_row(self) -> np.ndarray:
        """Smooth-state row used by the propagation kernels."""
        return np.array(
            [[self.rho, self.lam, self.gamma_e, self.a_e, self.gamma_p, self.a_p]]
        )


@dataclass(frozen=True)
class Measurement:
    z: float    # bearing, rad
    t_k: float  # timestamp, s


def los_rates(state: EngagementState, params: VehicleParams) -> tuple[float, float]:
    """Range rate V_rho and transverse rate V_lam (= rho * lam_dot)."""
    d_p = state.gamma_p - state.lam
    d_e = state.gamma_e + state.lam
    v_rho = -(params.v_p * math.cos(d_p) + params.v_e * math.cos(d_e))
    v_lam = -params.v_p * math.sin(d_p) + params.v_e * math.sin(d_e)
    return v_rho, v_lam


def derivatives(state: EngagementState, u_cmd: float, v_cmd: float,
                params: VehicleParams) -> tuple[float, float, float, float, float, float]:
    """Time derivatives (rho, lam, gamma_E, a_E, gamma_P, a_P).

    u_cmd and v_cmd are normalized commands in [-1, 1]; the commanded
    accelerations are a_p_max*u and a_e_max*v. The sojourn clock is not a
    differential state and is handled by the caller.
    """
    if state.rho <= 0.0:
        raise SingularGeometryError(f"rho must be positive, got {state.rho}")
    v_rho, v_lam = los_rates(state, params)
    return (
        v_rho,
        v_lam / state.rho,
        state.a_e / params.v_e,
        (params.a_e_max * v_cmd - state.a_e) / params.tau_e,
        state.a_p / params.v_p,
        (params.a_p_max * u_cmd - state.a_p) / params.tau_p,
    )


def step(state: EngagementState, u_cmd: float, v_cmd: float,
         params: VehicleParams, dt: float, nsub: int = 1) -> EngagementState:
    """One RK4 integration of the smooth states over dt (nsub substeps).

    theta is carried unchanged: the truth sojourn clock is owned by the
    engagement runner (reset at the commanded switch instant), and the
    filter applies its own discrete sojourn update.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if state.rho <= 0.0:
        raise SingularGeometryError(f"rho must be positive, got {state.rho}")
    row = state.as_row()
    propagate_states(row, params.a_p_max * u_cmd,
                     np.array([params.a_e_max * v_cmd]), dt, nsub,
                     params.v_p, params.v_e, params.tau_p, params.tau_e)
    if not np.all(np.isfinite(row)) or row[0, 0] <= 0.0:
        raise SingularGeometryError("range collapsed during integration step")
    return replace(
        state, rho=row[0, 0], lam=row[0, 1], gamma_e=row[0, 2],
        a_e=row[0, 3], gamma_p=row[0, 4], a_p=row[0, 5], t=state.t + dt,
    )


def measure(state: EngagementState, sigma_lambda: float, rng: np.random.Generator,
            noise=None) -> Measurement:
    """Bearing measurement z = gamma_P - lam + nu.

    The noise law is pluggable; the default draws Gaussian nu with the
    given standard deviation.
    """
    if noise is None:
        nu = rng.normal(0.0, sigma_lambda) if sigma_lambda > 0.0 else 0.0
    else:
        nu = noise(rng)
    return Measurement(z=state.gamma_p - state.lam + nu, t_k=state.t)


def time_to_go(state: EngagementState, params: VehicleParams) -> float:
    """-rho / V_rho for closing geometry; raises on diverging geometry."""
    v_rho, _ = los_rates(state, params)
    if v_rho >= 0.0:
        raise DivergingGeometryError(v_rho)
    return -state.rho / v_rho


class DivergingGeometryError(RuntimeError):
    """Range rate became non-negative: the engagement is over."""

    def __init__(self, v_rho: float):
        super().__init__(f"V_rho = {v_rho} >= 0")
        self.v_rho = v_rho


def terminate_and_miss(trajectory) -> float:
    """Closest-approach miss distance from a sampled trajectory.

    Takes the minimum sampled range and refines it with a parabola fit
    through rho^2 at the neighbouring samples (rho^2 is exactly quadratic
    in t for straight-line relative motion, so the fit is well conditioned
    even for near-zero miss). The result never exceeds the sampled minimum.
    """
    if len(trajectory) == 0:
        raise ValueError("empty trajectory")
    rho = np.array([s.rho for s in trajectory])
    t = np.array([s.t for s in trajectory])
    i = int(np.argmin(rho))
    miss = float(rho[i])
    if 0 < i < len(rho) - 1:
        q = rho ** 2
        t0, t1, t2 = t[i - 1: i + 2]
        q0, q1, q2 = q[i - 1: i + 2]
        denom = (t0 - t1) * (t0 - t2) * (t1 - t2)
        if denom != 0.0:
            a = (t2 * (q1 - q0) + t1 * (q0 - q2) + t0 * (q2 - q1)) / denom
            b = (t2 ** 2 * (q0 - q1) + t1 ** 2 * (q2 - q0) + t0 ** 2 * (q1 - q2)) / denom
            if a > 0.0:
                tv = -b / (2.0 * a)
                if t0 <= tv <= t2:
                    c = q1 - a * t1 ** 2 - b * t1
                    qv = a * tv ** 2 + b * tv + c
                    miss = min(miss, math.sqrt(max(qv, 0.0)))
    return miss


def flythrough_miss(state: EngagementState, params: VehicleParams) -> float:
    """Closest approach of the straight-line extension of the current state.

    Used to close out an engagement once rho is small, where integrating
    the polar LOS equation through the near-zero-range point is ill posed.
    Over the final few metres the bounded accelerations move the relative
    path by micrometres, so the linear extension is exact for this purpose.
    """
    v_rho, v_lam = los_rates(state, params)
    speed2 = v_rho ** 2 + v_lam ** 2
    if speed2 == 0.0:
        return state.rho
    if v_rho >= 0.0:
        return state.rho
    return state.rho * abs(v_lam) / math.sqrt(speed2)


def trajectory_to_csv(path, trajectory, commands=None) -> None:
    """Write t, rho, lambda, gamma_E, a_E, gamma_P, a_P, u_cmd, v_cmd rows."""
    with open(path, "w") as fh:
        fh.write("t,rho,lambda,gamma_E,a_E,gamma_P,a_P,u_cmd,v_cmd\n")
        for i, s in enumerate(trajectory):
            u, v = commands[i] if commands is not None else (float("nan"), float("nan"))
            cols = (s.t, s.rho, s.lam, s.gamma_e, s.a_e, s.gamma_p, s.a_p, u, v)
            fh.write(",".join(format(c, ".17g") for c in cols) + "\n")
