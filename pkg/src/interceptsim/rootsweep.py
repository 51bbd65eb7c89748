"""Sign-structure sweep of the game function R over the delay-parameter grid.

The full reference grid has 1,197,900 cases; a seeded random subsample
gives the same evidence in seconds. Every case counts the sign changes of
R on a dense normalized-time grid and any case with more than one change
is reported with its parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import DelayModel, GameParams


def full_grid_axes() -> dict:
    """Reference sweep axes (MATLAB-style inclusive ranges)."""
    return {
        "a": np.arange(1, 11) * 0.01,
        "b2": np.arange(1, 11) * 0.06,
        "b1_frac": np.arange(0, 9) * 0.125,
        "omega": np.arange(1, 12) / 12.0,
        "mu": 1.1 + 0.19 * np.arange(11),
        "eps": 0.2 + 0.18 * np.arange(11),
    }


def grid_size() -> int:
    axes = full_grid_axes()
    n = 1
    for v in axes.values():
        n *= v.size
    return n


@dataclass
class SweepCase:
    a: float
    b1: float
    b2: float
    omega: float
    mu: float
    eps: float
    sign_changes: int
    segment_peaks: tuple = ()   # max |R| of each constant-sign segment


@dataclass
class SweepReport:
    n_cases: int
    violations: list
    tau_max: float
    grid_n: int

    @property
    def ok(self) -> bool:
        return not self.violations


def _count_sign_changes(tau, psi_tau, case) -> int:
    a, b1, b2, omega, mu, eps = case
    d1 = a + b1 * tau ** omega
    d2 = a + b2 * tau ** omega
    g1 = b1 * omega * tau ** (omega - 1.0)
    g2 = b2 * omega * tau ** (omega - 1.0)
    a_tau = (d1 + tau * (1.0 + g1)
             + eps * np.exp(-(tau + d2) / eps) * (1.0 + g2)
             - eps * np.exp(-d2 / eps) * g2
             + np.exp((d1 - d2) / eps) * (tau * (g2 - g1) - eps))
    r = mu * psi_tau - a_tau
    s = np.sign(r)
    s = s[s != 0.0]
    return int(np.count_nonzero(s[:-1] != s[1:]))


def sweep_single_root(n_cases: int | None = 10_000, seed: int = 0,
                      tau_max: float = 20.0, grid_n: int = 4000) -> SweepReport:
    """Subsampled (or, with n_cases=None, exhaustive) sign-change sweep."""
    axes = full_grid_axes()
    names = list(axes.keys())
    sizes = np.array([axes[k].size for k in names])
    total = int(sizes.prod())

    if n_cases is None or n_cases >= total:
        flat = np.arange(total)
    else:
        rng = np.random.default_rng(seed)
        flat = rng.choice(total, size=n_cases, replace=False)

    idx = np.array(np.unravel_index(flat, sizes)).T
    tau = np.linspace(tau_max / grid_n, tau_max, grid_n)
    psi_tau = np.exp(-tau) + tau - 1.0

    violations = []
    for row in idx:
        a = axes["a"][row[0]]
        b2 = axes["b2"][row[1]]
        b1 = axes["b1_frac"][row[2]] * b2
        omega = axes["omega"][row[3]]
        mu = axes["mu"][row[4]]
        eps = axes["eps"][row[5]]
        changes = _count_sign_changes(tau, psi_tau, (a, b1, b2, omega, mu, eps))
        if changes > 1:
            violations.append(SweepCase(a=a, b1=b1, b2=b2, omega=omega,
                                        mu=mu, eps=eps,
                                        sign_changes=changes))
    return SweepReport(n_cases=len(flat), violations=violations,
                       tau_max=tau_max, grid_n=grid_n)
