"""Closed-loop engagement runner.

One measurement cycle: hold the pursuer command over the sampling
interval while the truth integrates at the fine substep; measure the
bearing; run the filter; estimate the uncertainty interval and resolve
the two delays; query the smoother at the two lags; assemble the ZEM
inputs and emit the next command. Perfect-information mode bypasses the
filter and feeds the guidance from the truth log (with optional lagged
lookups for the delay-compensated laws).
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import dynamics
from .delays import AnalyticDelayParams, DelayEstimator
from .dynamics import EngagementState, VehicleParams
from .estimation import (LAM, RHO, THETA, NoiseConfig, TransitionModel,
                         immpf_step, initialize_ensemble)
from .guidance import (GuidanceInputs, TvDglccLaw, linearized_components,
                       make_law, xi_dot_values)
from .kernels import propagate_states
from .scenario import ScenarioConfig
from .smoother import HistoryBuffer


@dataclass
class RunRecord:
    miss: float
    t_end: float
    law: str
    seed: int
    detection_time: float | None = None
    diverged: bool = False
    flags: list = field(default_factory=list)
    wall_time: float = 0.0
    diag: dict | None = None

    def to_json(self, path) -> None:
        payload = {
            "miss": self.miss, "t_end": self.t_end, "law": self.law,
            "seed": self.seed, "detection_time": self.detection_time,
            "diverged": self.diverged, "flags": list(self.flags),
            "wall_time": self.wall_time,
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")


# --- truth-side helpers -------------------------------------------------------


class _TruthLog:
    """Per-measurement-step truth samples plus the substep range history."""

    def __init__(self, max_steps: int):
        self.step_t = np.zeros(max_steps)
        self.step_state = np.zeros((max_steps, 6))
        self.n_steps = 0
        self.sub_t: list[float] = []
        self.sub_rho: list[float] = []

    def record_step(self, t: float, row: np.ndarray) -> None:
        self.step_t[self.n_steps] = t
        self.step_state[self.n_steps] = row
        self.n_steps += 1

    def record_sub(self, t: float, rho: float) -> None:
        self.sub_t.append(t)
        self.sub_rho.append(rho)


def _evader_cmd(t: float, t_sw: float, v_initial: float) -> float:
    return v_initial if t < t_sw else -v_initial


def _truth_sojourn(t: float, t_sw: float, theta0: float) -> float:
    return theta0 + t if t < t_sw else t - t_sw


def _propagate_truth(row: np.ndarray, t0: float, t1: float, u: float,
                     cfg: ScenarioConfig, vp: VehicleParams,
                     log: _TruthLog):
    """Integrate the truth over [t0, t1], splitting at the command switch.

    Returns (t_reached, status) where status is None, "passed" (range rate
    went nonnegative) or "close" (range below the fly-through threshold).
    """
    dt_target = cfg.dt_meas / cfg.truth_substeps
    bounds = [t0, t1]
    if t0 < cfg.t_sw < t1:
        bounds = [t0, cfg.t_sw, t1]
    t = t0
    for a, b in zip(bounds[:-1], bounds[1:]):
        v = _evader_cmd(0.5 * (a + b), cfg.t_sw, cfg.v_initial)
        n = max(1, round((b - a) / dt_target))
        h = (b - a) / n
        a_e_cmd = np.array([vp.a_e_max * v])
        for i in range(n):
            propagate_states(row, vp.a_p_max * u, a_e_cmd, h, 1,
                             vp.v_p, vp.v_e, vp.tau_p, vp.tau_e)
            t = a + (i + 1) * h
            rho = row[0, 0]
            log.record_sub(t, rho)
            d_p = row[0, 4] - row[0, 1]
            d_e = row[0, 2] + row[0, 1]
            v_rho = -(vp.v_p * math.cos(d_p) + vp.v_e * math.cos(d_e))
            if v_rho >= 0.0:
                return t, "passed"
            if rho < cfg.rho_close:
                return t, "close"
    return t, None


def _extract_miss(status: str | None, row: np.ndarray, vp: VehicleParams,
                  log: _TruthLog, cfg: ScenarioConfig) -> tuple[float, list]:
    flags = []
    state = _row_state(row, 0.0, 0.0)
    if status == "close":
        miss = dynamics.flythrough_miss(state, vp)
    elif status == "passed":
        tail_n = min(len(log.sub_rho), 5)
        tail = [
            EngagementState(rho=r, lam=0, gamma_e=0, a_e=0, theta=0,
                            gamma_p=0, a_p=0, t=tt)
            for tt, r in zip(log.sub_t[-tail_n:], log.sub_rho[-tail_n:])
        ]
        miss = dynamics.terminate_and_miss(tail)
    else:
        flags.append("no-termination")
        miss = float(min(log.sub_rho)) if log.sub_rho else state.rho
    return miss, flags


def _row_state(row: np.ndarray, theta: float, t: float) -> EngagementState:
    return EngagementState(rho=row[0, 0], lam=row[0, 1], gamma_e=row[0, 2],
                           a_e=row[0, 3], theta=theta, gamma_p=row[0, 4],
                           a_p=row[0, 5], t=t)


# --- guidance-input assembly --------------------------------------------------


def _particle_rates(states: np.ndarray, gamma_p: float, vp: VehicleParams):
    d_p = gamma_p - states[:, LAM]
    d_e = states[:, 2] + states[:, LAM]
    v_rho = -(vp.v_p * np.cos(d_p) + vp.v_e * np.cos(d_e))
    v_lam = -vp.v_p * np.sin(d_p) + vp.v_e * np.sin(d_e)
    return v_rho, v_lam


def _xi_dot_selector(gamma_p: float, lam_ref: float, vp: VehicleParams):
    def sel(states):
        return xi_dot_values(states, gamma_p, lam_ref, vp.v_p, vp.v_e)
    return sel


def _a_e_selector(lam_ref: float):
    return lambda states: states[:, 3] * np.cos(states[:, 2] + lam_ref)


def _v_lam_selector(gamma_p: float, vp: VehicleParams):
    def sel(states):
        return (-vp.v_p * np.sin(gamma_p - states[:, LAM])
                + vp.v_e * np.sin(states[:, 2] + states[:, LAM]))
    return sel


def _x3_window(hist_t, hist_gp, hist_ap, k: int, n1: int, lam_ref: float):
    sl = slice(k - n1, k + 1)
    t = hist_t[sl]
    x3 = hist_ap[sl] * np.cos(hist_gp[sl] - lam_ref)
    return t, x3


# --- main runner ---------------------------------------------------------------


def run_engagement(config: ScenarioConfig, xi_bias_fn=None) -> RunRecord:
    """Run one engagement and return its record.

    xi_bias_fn(t, d1, d2) -> additive bias on the fed lateral-velocity
    input; used by the delay-constant tuning study to model undetected
    post-switch estimation error. None outside that study.
    """
    t_start = time.perf_counter()
    vp = config.vehicle_params()
    gp = config.game_params()
    rng = np.random.default_rng(config.seed)
    dt = config.dt_meas
    f = config.f_meas
    max_steps = int(round(config.t_max * f)) + 2

    law = make_law(config.law, gp, dglc_delta=config.dglc_delta,
                   c=config.c_delay)
    is_tv = isinstance(law, TvDglccLaw)

    # truth
    a_e0 = config.v_initial * vp.a_e_max
    row = np.array([[config.rho0, config.lambda0, config.gamma_e0, a_e0,
                     config.lambda0, 0.0]])
    log = _TruthLog(max_steps)
    log.record_sub(0.0, config.rho0)

    # pursuer own-state history (known exactly)
    hist_t = np.zeros(max_steps)
    hist_gp = np.zeros(max_steps)
    hist_ap = np.zeros(max_steps)

    # zero-noise runs degrade the analytic delay model to its 1/f floor
    analytic = AnalyticDelayParams(
        tau_e=vp.tau_e, sigma_lambda=max(config.sigma_lambda, 1e-30),
        delta_a=2.0 * vp.a_e_max, k_xi=config.k_xi, f_meas=f)

    ensemble = None
    smoother = None
    destimator = None
    noise = None
    transition = None
    if not config.perfect_info:
        truth0 = _row_state(row, config.theta0, 0.0)
        ensemble = initialize_ensemble(
            truth0, (config.x_p0, config.y_p0), (config.x_r, config.y_r),
            config.p_r_std, config.theta_ranges(), vp,
            config.particles_per_mode, config.n_modes, rng)
        smoother = HistoryBuffer(config.smoother_lag_steps,
                                 ensemble.n_particles)
        smoother.record(ensemble.states, None)
        destimator = DelayEstimator(
            analytic=analytic, w_thres=config.w_thres, p_thres=config.p_thres,
            c=config.c_delay, ema_alpha=config.ema_alpha,
            max_stale=config.max_stale)
        # the likelihood width keeps a tiny floor so zero-noise configs
        # degenerate to nearest-particle selection instead of dividing by zero
        noise = NoiseConfig(sigma_lambda=max(config.sigma_lambda, 1e-12),
                            sigma_gamma_e=math.radians(config.proc_noise_gamma_deg),
                            sigma_a_e=config.proc_noise_a,
                            sigma_lam_rough=config.proc_noise_lam_mrad * 1e-3)
        transition = TransitionModel(config.tpm_matrix())

    post_mode = 1 if config.v_initial < 0 else 0
    detection_time = None
    diverged = False
    flags: list = []
    diag = _new_diag() if config.record_diagnostics else None

    k = 0
    t = 0.0
    status = None
    u = 0.0
    while k < max_steps:
        hist_t[k] = t
        hist_gp[k] = row[0, 4]
        hist_ap[k] = row[0, 5]
        log.record_step(t, row[0])

        if config.perfect_info:
            u, step_diag = _perfect_command(law, row, t, k, log, hist_t,
                                            hist_gp, hist_ap, config, vp, gp,
                                            analytic, xi_bias_fn)
        else:
            u, step_diag = _filtered_command(law, ensemble, destimator,
                                             smoother, row, t, k, hist_t,
                                             hist_gp, hist_ap, config, vp, gp,
                                             xi_bias_fn)
        if diag is not None:
            _append_diag(diag, t, u, step_diag, row, config, vp, ensemble,
                         smoother, hist_gp, k)

        t_next, status = _propagate_truth(row, t, t + dt, u, config, vp, log)
        t = t_next
        if status is not None:
            break
        k += 1

        if not config.perfect_info:
            gamma_p_start = hist_gp[k - 1]
            a_p_start = hist_ap[k - 1]
            meas = dynamics.measure(_row_state(row, 0.0, t),
                                    config.sigma_lambda, rng)
            res = immpf_step(ensemble, meas.z, transition, vp, noise, u,
                             gamma_p_start, a_p_start, row[0, 4], rng,
                             nsub=config.filter_substeps)
            ensemble = res.ensemble
            smoother.record(ensemble.states, res.ancestors)
            diverged = diverged or res.output.diverged
            if (detection_time is None and t > config.t_sw
                    and res.output.modal_probs[post_mode] > 0.5):
                detection_time = t

        if t > config.t_max:
            break

    miss, term_flags = _extract_miss(status, row, vp, log, config)
    flags.extend(term_flags)
    if diverged:
        flags.append("filter-divergence")

    record = RunRecord(miss=miss, t_end=t, law=config.law, seed=config.seed,
                       detection_time=detection_time, diverged=diverged,
                       flags=flags, wall_time=time.perf_counter() - t_start,
                       diag=_finalize_diag(diag))
    return record


# --- command assembly: filtered path -------------------------------------------


def _filtered_command(law, ensemble, destimator, smoother, row, t, k,
                      hist_t, hist_gp, hist_ap, config, vp, gp, xi_bias_fn):
    w = ensemble.weights
    states = ensemble.states
    mean = ensemble.mean_state()
    lam_ref = mean[LAM]
    gamma_p_now = row[0, 4]
    a_p_now = row[0, 5]

    v_rho_s, _ = _particle_rates(states, gamma_p_now, vp)
    vhat_rho = float(w @ v_rho_s)
    rho_hat = mean[RHO]
    if vhat_rho < -1e-6:
        t_go = max(-rho_hat / vhat_rho, config.dt_meas * 0.1)
    else:
        t_go = config.dt_meas * 0.1

    x1_vals, x2_vals, _, x4_vals = linearized_components(
        states[:, 0], states[:, 1], states[:, 2], states[:, 3],
        gamma_p_now, a_p_now, lam_ref, vp.v_p, vp.v_e)
    x1 = float(w @ x1_vals)
    x3 = a_p_now * math.cos(gamma_p_now - lam_ref)

    step_diag = {"t_go": t_go, "theta_star": math.nan, "d1": 0.0, "d2": 0.0,
                 "source": "", "lam_ref": lam_ref}

    if law.name == "dgl1":
        inputs = GuidanceInputs(x1=x1, x2_delayed=float(w @ x2_vals), x3=x3,
                                x4_delayed=float(w @ x4_vals), t_go=t_go,
                                t_now=t)
        u = law.command(inputs)
        step_diag.update(z=law.last_z, z_star=law.last_z_star)
        return u, step_diag

    if law.name == "dglc":
        inputs = GuidanceInputs(x1=x1, x2_delayed=float(w @ x2_vals), x3=x3,
                                x4_delayed=float(w @ x4_vals), t_go=t_go,
                                t_now=t)
        step_diag["d2"] = law.delta_t
        u = law.command(inputs)
        step_diag.update(z=law.last_z, z_star=law.last_z_star)
        return u, step_diag

    # tv-dglcc
    est = destimator.step(ensemble, t_go, min(vhat_rho, -1e-3))
    d1, d2, _, _ = destimator.resolve(est, t_go)
    law.update_delays(destimator.floor, destimator.b_fit, est.theta_star)

    n1 = min(int(round(d1 * config.f_meas)), k, smoother.available_lag)
    n2 = min(int(round(d2 * config.f_meas)), k, smoother.available_lag)
    n1 = min(n1, n2)
    d1_used = n1 * config.dt_meas
    d2_used = n2 * config.dt_meas

    gp_lag1 = hist_gp[k - n1]
    x2d = smoother.smoothed_estimate(
        w, n1, _xi_dot_selector(gp_lag1, lam_ref, vp)).value
    x4d = smoother.smoothed_estimate(w, n2, _a_e_selector(lam_ref)).value
    if xi_bias_fn is not None:
        x2d += xi_bias_fn(t, d1_used, d2_used)

    ht, hx3 = _x3_window(hist_t, hist_gp, hist_ap, k, n1, lam_ref)
    inputs = GuidanceInputs(x1=x1, x2_delayed=x2d, x3=x3, x4_delayed=x4d,
                            t_go=t_go, x3_hist_t=ht, x3_hist_v=hx3, t_now=t)
    step_diag.update(theta_star=est.theta_star, d1=d1_used, d2=d2_used,
                     source=est.source)
    u = law.command(inputs, d1_used, d2_used)
    step_diag.update(z=law.last_z, z_star=law.last_z_star)
    return u, step_diag


# --- command assembly: perfect-information path ---------------------------------


def _perfect_command(law, row, t, k, log, hist_t, hist_gp, hist_ap, config,
                     vp, gp, analytic, xi_bias_fn):
    from .delays import analytic_theta

    state = _row_state(row, 0.0, t)
    lam_ref = state.lam
    v_rho, v_lam = dynamics.los_rates(state, vp)
    if v_rho < -1e-6:
        t_go = -state.rho / v_rho
    else:
        t_go = config.dt_meas * 0.1

    x3 = state.a_p * math.cos(state.gamma_p - lam_ref)
    step_diag = {"t_go": t_go, "theta_star": math.nan, "d1": 0.0, "d2": 0.0,
                 "source": "analytic", "lam_ref": lam_ref}

    def truth_components(step_idx):
        s = log.step_state[step_idx]
        return linearized_components(s[0], s[1], s[2], s[3], s[4], s[5],
                                     lam_ref, vp.v_p, vp.v_e)

    if law.name == "dgl1":
        _, x2, _, x4 = truth_components(k)
        inputs = GuidanceInputs(x1=0.0, x2_delayed=float(x2), x3=x3,
                                x4_delayed=float(x4), t_go=t_go, t_now=t)
        return law.command(inputs), step_diag

    if law.name == "dglc":
        _, x2, _, x4 = truth_components(k)
        inputs = GuidanceInputs(x1=0.0, x2_delayed=float(x2), x3=x3,
                                x4_delayed=float(x4), t_go=t_go, t_now=t)
        step_diag["d2"] = law.delta_t
        return law.command(inputs), step_diag

    # tv-dglcc under the analytic delay model
    d2 = analytic_theta(t_go, analytic, min(v_rho, -1e-3))
    d1 = config.c_delay * d2
    b_fit = (d2 - 1.0 / config.f_meas) / max(t_go, 1e-9) ** (1.0 / 3.0)
    law.update_delays(1.0 / config.f_meas, b_fit, d2)

    n1 = min(int(round(d1 * config.f_meas)), k)
    n2 = min(int(round(d2 * config.f_meas)), k)
    n1 = min(n1, n2)
    d1_used = n1 * config.dt_meas
    d2_used = n2 * config.dt_meas

    _, x2d, _, _ = truth_components(k - n1)
    _, _, _, x4d = truth_components(k - n2)
    x2d = float(x2d)
    if xi_bias_fn is not None:
        x2d += xi_bias_fn(t, d1_used, d2_used)

    ht, hx3 = _x3_window(hist_t, hist_gp, hist_ap, k, n1, lam_ref)
    inputs = GuidanceInputs(x1=0.0, x2_delayed=x2d, x3=x3,
                            x4_delayed=float(x4d), t_go=t_go,
                            x3_hist_t=ht, x3_hist_v=hx3, t_now=t)
    step_diag.update(theta_star=d2, d1=d1_used, d2=d2_used)
    u = law.command(inputs, d1_used, d2_used)
    step_diag.update(z=law.last_z, z_star=law.last_z_star)
    return u, step_diag


# --- diagnostics ----------------------------------------------------------------


def _new_diag() -> dict:
    return {key: [] for key in (
        "t", "u", "v", "z", "z_star", "t_go", "theta_star", "d1", "d2", "source", "modal",
        "est_mean", "truth", "filtered_vlam", "truth_vlam", "smoothed_vlam",
        "smoothed_lag", "ess")}


def _append_diag(diag, t, u, step_diag, row, config, vp, ensemble, smoother,
                 hist_gp, k):
    diag["t"].append(t)
    diag["u"].append(u)
    diag["v"].append(_evader_cmd(t, config.t_sw, config.v_initial))
    diag["z"].append(step_diag.get("z", 0.0))
    diag["z_star"].append(step_diag.get("z_star", 0.0))
    diag["t_go"].append(step_diag["t_go"])
    diag["theta_star"].append(step_diag["theta_star"])
    diag["d1"].append(step_diag["d1"])
    diag["d2"].append(step_diag["d2"])
    diag["source"].append(step_diag["source"])
    diag["truth"].append(row[0].copy())
    state = _row_state(row, 0.0, t)
    _, v_lam_true = dynamics.los_rates(state, vp)
    diag["truth_vlam"].append(v_lam_true)
    if ensemble is not None:
        diag["modal"].append(ensemble.modal_probabilities())
        diag["est_mean"].append(ensemble.mean_state())
        diag["ess"].append(ensemble.ess())
        sel = _v_lam_selector(row[0, 4], vp)
        diag["filtered_vlam"].append(float(ensemble.weights @ sel(ensemble.states)))
        n1 = int(round(step_diag["d1"] * config.f_meas))
        n1 = min(n1, k, smoother.available_lag)
        sv = smoother.smoothed_estimate(ensemble.weights, n1,
                                        _v_lam_selector(hist_gp[k - n1], vp))
        diag["smoothed_vlam"].append(sv.value)
        diag["smoothed_lag"].append(sv.lag_used)
    else:
        diag["modal"].append(np.zeros(config.n_modes))
        diag["est_mean"].append(np.zeros(5))
        diag["ess"].append(0.0)
        diag["filtered_vlam"].append(v_lam_true)
        diag["smoothed_vlam"].append(v_lam_true)
        diag["smoothed_lag"].append(0)


def _finalize_diag(diag):
    if diag is None:
        return None
    out = {}
    for key, vals in diag.items():
        if key == "source":
            out[key] = list(vals)
        else:
            out[key] = np.asarray(vals)
    return out


def diagnostics_to_csv(record: RunRecord, path) -> None:
    """Per-step diagnostic CSV: delay log plus estimate/truth summary."""
    d = record.diag
    if d is None:
        raise ValueError("run was not recorded with diagnostics")
    n = len(d["t"])
    with open(path, "w") as fh:
        fh.write("t,source,theta_star,d1,d2,u,t_go,ess,"
                 + ",".join(f"modal_{i}" for i in range(d["modal"].shape[1]))
                 + ",est_rho,est_lam,est_gamma_e,est_a_e,est_theta,"
                 "truth_rho,truth_lam,truth_gamma_e,truth_a_e,truth_gamma_p,"
                 "truth_a_p,filtered_vlam,smoothed_vlam,truth_vlam\n")
        for i in range(n):
            row = [format(d["t"][i], ".17g"), d["source"][i],
                   format(d["theta_star"][i], ".17g"),
                   format(d["d1"][i], ".17g"), format(d["d2"][i], ".17g"),
                   format(d["u"][i], ".17g"), format(d["t_go"][i], ".17g"),
                   format(d["ess"][i], ".17g")]
            row += [format(x, ".17g") for x in d["modal"][i]]
            row += [format(x, ".17g") for x in d["est_mean"][i]]
            row += [format(x, ".17g") for x in d["truth"][i]]
            row += [format(d["filtered_vlam"][i], ".17g"),
                    format(d["smoothed_vlam"][i], ".17g"),
                    format(d["truth_vlam"][i], ".17g")]
            fh.write(",".join(row) + "\n")


def trajectory_csv(record: RunRecord, path) -> None:
    """t, rho, lambda, gamma_E, a_E, gamma_P, a_P, u_cmd, v_cmd per step."""
    d = record.diag
    if d is None:
        raise ValueError("run was not recorded with diagnostics")
    with open(path, "w") as fh:
        fh.write("t,rho,lambda,gamma_E,a_E,gamma_P,a_P,u_cmd,v_cmd\n")
        for i in range(len(d["t"])):
            cols = [d["t"][i], *d["truth"][i], d["u"][i], d["v"][i]]
            fh.write(",".join(format(c, ".17g") for c in cols) + "\n")
