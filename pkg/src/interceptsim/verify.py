"""Numerical property suites behind the `verify` CLI subcommand.

Each check returns a small result record with an `ok` flag and the
measured extremes, so the CLI can print one line per suite and the test
suite can assert the same numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .game import DelayModel, GameParams, a_func, psi
from .guidance import zem_cc_norm, zem_dgl1_norm
from .lineargame import (LinearGameTrajectory, PiecewiseControl,
                         evader_functional)
from .rootsweep import SweepReport, sweep_single_root
from .scenario import ScenarioConfig


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str
    values: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"[{status}] {self.name}: {self.detail}"


def _rel_err(x, y, floor):
    return np.abs(x - y) / np.maximum(np.maximum(np.abs(x), np.abs(y)), floor)


def _random_params(rng) -> GameParams:
    return GameParams(mu=float(rng.uniform(1.2, 3.0)),
                      epsilon=float(rng.uniform(0.3, 2.0)),
                      tau_p=0.2, tau_e=0.2, a_e_max=196.133)


def check_reduction_identities(seed: int = 0, n_states: int = 1000) -> CheckResult:
    """Zero delays collapse the two-delay formulas onto the delay-free game,
    and zeroed growth coefficients collapse them onto the constant-delay
    specialization."""
    rng = np.random.default_rng(seed)
    worst = 0.0

    # zero-delay ZEM identity on random states
    for _ in range(n_states):
        mu = rng.uniform(1.2, 3.0)
        eps = rng.uniform(0.3, 2.0)
        tau = rng.uniform(0.0, 15.0)
        x = rng.normal(0.0, 2.0, size=4)
        z_cc = zem_cc_norm(x[0], x[1], x[2], 0.0, x[3], tau, 0.0, 0.0, mu, eps)
        z_1 = zem_dgl1_norm(x[0], x[1], x[2], x[3], tau, mu, eps)
        worst = max(worst, float(_rel_err(z_cc, z_1, 1e-30)))

    # zero-delay A identity on a grid
    tau = np.linspace(0.0, 15.0, 400)
    for _ in range(20):
        params = _random_params(rng)
        a0 = a_func(tau, DelayModel.zero(), params)
        ref = params.epsilon * psi(tau / params.epsilon)
        worst = max(worst, float(np.max(_rel_err(a0[1:], ref[1:], 1e-30))))

    # constant-delay specialization (independent formulas, no gamma terms)
    worst_const = 0.0
    for _ in range(20):
        params = _random_params(rng)
        eps = params.epsilon
        d1 = rng.uniform(0.01, 0.4)
        d2 = d1 + rng.uniform(0.0, 0.6)
        model = DelayModel.constant(d1, d2)
        a_tv = a_func(tau, model, params)
        a_const = (d1 + tau + eps * np.exp(-(tau + d2) / eps)
                   - eps * np.exp((d1 - d2) / eps))
        worst_const = max(worst_const,
                          float(np.max(_rel_err(a_tv, a_const, 1e-30))))
        for _ in range(50):
            x = rng.normal(0.0, 2.0, size=4)
            i3 = rng.normal(0.0, 0.5)
            tt = rng.uniform(0.0, 15.0)
            z_tv = zem_cc_norm(x[0], x[1], x[2], i3, x[3], tt, d1, d2,
                               params.mu, eps)
            coef4 = eps * math.exp(-d2 / eps) * (
                tt * math.exp(d1 / eps) + eps * math.exp(-tt / eps) - eps)
            z_const = (x[0] + tt * x[1] - params.mu * psi(tt) * x[2]
                       - params.mu * tt * i3 + coef4 * x[3])
            worst_const = max(worst_const,
                              float(_rel_err(z_tv, z_const, 1e-30)))

    worst = max(worst, worst_const)
    return CheckResult(
        name="reduction-identities", ok=worst < 1e-10,
        detail=f"max relative deviation {worst:.3e} (tolerance 1e-10)",
        values={"max_rel": worst})


def check_zem_derivative(seed: int = 0, n_traj: int = 10,
                         dtau: float = 1e-4) -> CheckResult:
    """Central differences of the two-delay ZEM along exact trajectories
    match the claimed evolution rate."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_traj):
        mu = rng.uniform(1.2, 3.0)
        eps = rng.uniform(0.4, 1.6)
        model = DelayModel.power_law(
            a=rng.uniform(0.02, 0.1),
            b1=rng.uniform(0.0, 0.2),
            b2=rng.uniform(0.2, 0.5),
            omega=1.0 / 3.0)
        tau_lo, tau_hi = 0.3, 9.0
        span = tau_hi + float(model.delta2(tau_hi)) + 0.5
        u = PiecewiseControl.random(rng, tau_lo, span, 6, bang_bang=True)
        v = PiecewiseControl.random(rng, tau_lo, span, 6, bang_bang=False)
        x0 = rng.normal(0.0, 1.0, size=4)
        traj = LinearGameTrajectory(x0, tau_lo, span, u, v, mu, eps)

        kinks = traj.first_order_kinks(model)
        taus = np.linspace(tau_lo + 0.2, tau_hi - 0.2, 40)
        if kinks.size:
            dist = np.min(np.abs(taus[:, None] - kinks[None, :]), axis=1)
            taus = taus[dist > 50 * dtau]

        rates = np.array([traj.zem_cc_rate(tt, model) for tt in taus])
        scale = np.max(np.abs(rates))
        for tt, rate in zip(taus, rates):
            if abs(rate) < 1e-4 * scale:
                continue
            num = (traj.zem_cc(tt + dtau, model)
                   - traj.zem_cc(tt - dtau, model)) / (2.0 * dtau)
            worst = max(worst, abs(num - rate) / abs(rate))
    return CheckResult(
        name="zem-derivative", ok=worst < 1e-4,
        detail=f"max relative error {worst:.3e} (tolerance 1e-4)",
        values={"max_rel": worst})


def check_functional_bound(seed: int = 0, n_controls: int = 1000) -> CheckResult:
    """|F(v)| <= A(tau) for admissible controls; the constant extremes
    attain +/-A; A stays positive on the test grids."""
    rng = np.random.default_rng(seed)
    worst_excess = -np.inf
    worst_extremal = 0.0
    min_a = np.inf

    cases = []
    for _ in range(5):
        params = _random_params(rng)
        model = DelayModel.power_law(
            a=rng.uniform(0.02, 0.1), b1=rng.uniform(0.0, 0.25),
            b2=rng.uniform(0.25, 0.6), omega=rng.uniform(0.1, 0.9))
        cases.append((params, model))
    grid = np.linspace(0.0, 15.0, 600)
    for params, model in cases:
        min_a = min(min_a, float(np.min(a_func(grid, model, params))))

    for i in range(n_controls):
        params, model = cases[i % len(cases)]
        eps = params.epsilon
        tau = float(rng.uniform(0.05, 12.0))
        d2 = float(model.delta2(tau))
        a_val = a_func(tau, model, params)
        v = PiecewiseControl.random(rng, tau, tau + d2 + 1e-9,
                                    rng.integers(1, 7), bang_bang=False)
        f_val = evader_functional(v, tau, model, eps)
        worst_excess = max(worst_excess,
                           abs(f_val) - a_val * (1.0 + 1e-6) - 1e-12)
        if i % 50 == 0:
            v_min = PiecewiseControl.constant(-1.0, tau, tau + d2 + 1e-9)
            v_max = PiecewiseControl.constant(1.0, tau, tau + d2 + 1e-9)
            f_hi = evader_functional(v_min, tau, model, eps)
            f_lo = evader_functional(v_max, tau, model, eps)
            worst_extremal = max(
                worst_extremal,
                float(_rel_err(f_hi, a_val, 1e-30)),
                float(_rel_err(f_lo, -a_val, 1e-30)))

    ok = worst_excess <= 0.0 and worst_extremal < 1e-6 and min_a > 0.0
    return CheckResult(
        name="functional-bound", ok=ok,
        detail=(f"max excess {worst_excess:.3e}, extremal rel err "
                f"{worst_extremal:.3e}, min A {min_a:.3e}"),
        values={"excess": worst_excess, "extremal": worst_extremal,
                "min_a": min_a})


def check_single_root(seed: int = 0, n_cases: int = 10_000) -> CheckResult:
    report: SweepReport = sweep_single_root(n_cases=n_cases, seed=seed)
    return CheckResult(
        name="single-root-sweep", ok=report.ok,
        detail=(f"{report.n_cases} cases, {len(report.violations)} "
                "multi-root reports"),
        values={"violations": report.violations})


def check_hit_to_kill(t_sw_step: float = 0.1) -> CheckResult:
    """Perfect-information delay-free law scores a sub-0.1 m miss against
    every single-switch bang-bang maneuver on the switch grid."""
    from .engagement import run_engagement

    config = ScenarioConfig(law="dgl1", perfect_info=True, sigma_lambda=0.0)
    worst = 0.0
    worst_tsw = 0.0
    n = int(round(3.0 / t_sw_step))
    for i in range(n + 1):
        tsw = i * t_sw_step
        rec = run_engagement(config.replace(t_sw=tsw))
        if rec.miss > worst:
            worst = rec.miss
            worst_tsw = tsw
    return CheckResult(
        name="hit-to-kill", ok=worst < 0.1,
        detail=f"max miss {worst:.4g} m at t_sw={worst_tsw:.1f} (tolerance 0.1 m)",
        values={"max_miss": worst, "worst_tsw": worst_tsw})


ALL_CHECKS = (
    check_reduction_identities,
    check_zem_derivative,
    check_functional_bound,
    check_single_root,
    check_hit_to_kill,
)


def run_all(seed: int = 0) -> list[CheckResult]:
    results = []
    for fn in ALL_CHECKS:
        if fn is check_hit_to_kill:
            results.append(fn())
        else:
            results.append(fn(seed))
    return results
