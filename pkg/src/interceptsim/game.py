"""Normalized game functions for the delayed-information pursuit game.

Everything here lives in normalized time tau = t_go / tau_P. Delays are
power laws of the form a + b*tau^omega (constants are the b = 0 case) and
carry analytic derivatives, so the game function A(tau) never needs to
difference noisy delay estimates.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

_TAU_TINY = 1e-300


@dataclass(frozen=True)
class GameParams:
    """Dimensionless game constants plus the scales needed to denormalize."""

    mu: float                 # a_p_max / a_e_max
    epsilon: float            # tau_e / tau_p
    tau_p: float              # s
    tau_e: float              # s
    a_e_max: float            # m/s^2, sets the ZEM normalization scale
    k: float = 0.7            # chatter-prevention fraction of the singular region

    def __post_init__(self):
        if self.mu <= 1.0:
            raise ValueError("mu must exceed 1")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if not 0.0 < self.k <= 1.0:
            raise ValueError("k must be in (0, 1]")

    @property
    def zem_scale(self) -> float:
        """Metres per unit of normalized ZEM."""
        return self.a_e_max * self.tau_p ** 2

    @classmethod
    def from_vehicle(cls, vp, k: float = 0.7) -> "GameParams":
        return cls(mu=vp.mu, epsilon=vp.epsilon, tau_p=vp.tau_p,
                   tau_e=vp.tau_e, a_e_max=vp.a_e_max, k=k)


@dataclass(frozen=True)
class DelayModel:
    """Pair of delay functions Delta_i(tau) = a_i + b_i * tau^omega.

    Normalized-time units throughout. The shared-base construction
    (a1 == a2) matches the analytic detection-delay model; the general
    form also covers the constant-delay baseline (b = 0) and the online
    fit where the velocity delay is a fixed fraction of the acceleration
    delay.
    """

    a1: float
    b1: float
    a2: float
    b2: float
    omega: float = 1.0 / 3.0

    def __post_init__(self):
        if self.a1 < 0 or self.a2 < 0 or self.b1 < 0 or self.b2 < 0:
            raise ValueError("delay coefficients must be nonnegative")
        if not 0.0 < self.omega < 1.0:
            raise ValueError("omega must lie in (0, 1)")

    @classmethod
    def power_law(cls, a: float, b1: float, b2: float, omega: float) -> "DelayModel":
        if b1 > b2:
            raise ValueError("b1 must not exceed b2")
        return cls(a1=a, b1=b1, a2=a, b2=b2, omega=omega)

    @classmethod
    def constant(cls, delta1: float, delta2: float) -> "DelayModel":
        if delta1 > delta2:
            raise ValueError("delta1 must not exceed delta2")
        return cls(a1=delta1, b1=0.0, a2=delta2, b2=0.0)

    @classmethod
    def zero(cls) -> "DelayModel":
        return cls.constant(0.0, 0.0)

    @classmethod
    def scaled(cls, a: float, b: float, c: float, omega: float = 1.0 / 3.0) -> "DelayModel":
        """Delta2 = a + b tau^omega with Delta1 = c * Delta2, c in [0, 1]."""
        if not 0.0 <= c <= 1.0:
            raise ValueError("c must lie in [0, 1]")
        return cls(a1=c * a, b1=c * b, a2=a, b2=b, omega=omega)

    @property
    def is_zero(self) -> bool:
        return self.a1 == self.a2 == self.b1 == self.b2 == 0.0

    def delta1(self, tau):
        return self.a1 + self.b1 * np.asarray(tau, dtype=float) ** self.omega

    def delta2(self, tau):
        return self.a2 + self.b2 * np.asarray(tau, dtype=float) ** self.omega

    def gamma1(self, tau):
        t = np.maximum(np.asarray(tau, dtype=float), _TAU_TINY)
        return self.b1 * self.omega * t ** (self.omega - 1.0)

    def gamma2(self, tau):
        t = np.maximum(np.asarray(tau, dtype=float), _TAU_TINY)
        return self.b2 * self.omega * t ** (self.omega - 1.0)


def psi(tau):
    """Psi(tau) = exp(-tau) + tau - 1; nonnegative and convex, Psi(0) = 0.

    Written via expm1 so the small-tau cancellation cannot round negative.
    """
    t = np.asarray(tau, dtype=float)
    out = np.expm1(-t) + t
    return out if out.ndim else float(out)


def a_func(tau, delays: DelayModel, params: GameParams):
    """Evader influence envelope A(tau); strictly positive for tau >= 0.

    At tau = 0 the tau*gamma terms vanish and the gamma2 terms cancel,
    leaving the analytic limit a1 + eps*exp(-a2/eps) - eps*exp((a1-a2)/eps);
    the formula itself is evaluated for every tau > 0.
    """
    eps = params.epsilon
    t = np.asarray(tau, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    ts = np.maximum(t, _TAU_TINY)

    d1 = delays.delta1(ts)
    d2 = delays.delta2(ts)
    g1 = delays.gamma1(ts)
    g2 = delays.gamma2(ts)

    out = (
        d1
        + ts * (1.0 + g1)
        + eps * np.exp(-(ts + d2) / eps) * (1.0 + g2)
        - eps * np.exp(-d2 / eps) * g2
        + np.exp((d1 - d2) / eps) * (ts * (g2 - g1) - eps)
    )

    at_zero = t <= 0.0
    if np.any(at_zero):
        lim = (delays.a1 + eps * np.exp(-delays.a2 / eps)
               - eps * np.exp((delays.a1 - delays.a2) / eps))
        out = np.where(at_zero, lim, out)
    return float(out[0]) if scalar else out


def r_func(tau, delays: DelayModel, params: GameParams):
    """R(tau) = mu * Psi(tau) - A(tau); its sign structure decomposes the game."""
    return params.mu * psi(tau) - a_func(tau, delays, params)


class RootScanError(RuntimeError):
    """No positive root of R was bracketed on the scan grid."""


class SingleRootViolation(Warning):
    """R changed sign more than once: the single-root conjecture failed."""


def scan_sign_changes(delays: DelayModel, params: GameParams,
                      tau_max: float = 20.0, n: int = 10_000) -> list[tuple[float, float]]:
    """Brackets of every sign change of R on a dense grid over (0, tau_max]."""
    grid = np.linspace(tau_max / n, tau_max, n)
    r = r_func(grid, delays, params)
    sign = np.sign(r)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0.0)[0]
    return [(float(grid[i]), float(grid[i + 1])) for i in flips]


def find_tau_s(delays: DelayModel, params: GameParams, tau_max: float = 20.0,
               n: int = 10_000, rtol: float = 1e-10,
               allow_no_root: bool = False) -> float:
    """Smallest positive root of R, bisected to relative tolerance rtol.

    R(0) = -A(0) <= 0 always; when R is positive on the whole grid (the
    zero-delay game with an agility advantage) the root sits at tau = 0 and
    the singular region opens immediately. With allow_no_root, delays so
    large that R stays negative up to tau_max yield +inf (the singular
    region never opens below the horizon and the sign law applies
    everywhere). More than one sign change is a conjecture violation and
    is reported loudly, never swallowed.
    """
    brackets = scan_sign_changes(delays, params, tau_max, n)
    r0 = r_func(0.0, delays, params)
    head = tau_max / n
    r_head = r_func(head, delays, params)
    if r0 < -1e-300 and r_head > 0.0:
        # crossing inside the first grid cell
        brackets.insert(0, (0.0, head))
    if not brackets:
        if r0 >= -1e-14 and r_head > 0.0:
            return 0.0
        if allow_no_root:
            return math.inf
        raise RootScanError(
            f"R has no sign change on (0, {tau_max}]; R(0) = {r0}")
    if len(brackets) > 1:
        warnings.warn(
            f"R(tau) has {len(brackets)} sign changes for {delays}: {brackets}",
            SingleRootViolation, stacklevel=2)
    lo, hi = brackets[0]
    return float(brentq(lambda x: r_func(x, delays, params), lo, hi,
                        rtol=rtol, xtol=1e-300))


def singular_boundary(tau: float, tau_s: float, delays: DelayModel,
                      params: GameParams) -> float:
    """Singular-region boundary: integral of R from tau_s to tau (0 below tau_s).

    Adaptive quadrature at 1e-8 relative tolerance.
    """
    if tau <= tau_s:
        return 0.0
    val, _ = quad(lambda x: r_func(x, delays, params), tau_s, tau,
                  epsabs=1e-12, epsrel=1e-8, limit=200)
    return float(val)


def guaranteed_miss(tau_s: float, delays: DelayModel, params: GameParams) -> float:
    """Normalized guaranteed miss inside the singular region, >= 0."""
    if tau_s <= 0.0:
        return 0.0
    val, _ = quad(lambda x: -r_func(x, delays, params), 0.0, tau_s,
                  epsabs=1e-12, epsrel=1e-8, limit=200)
    return float(val)


class BoundaryTable:
    """Precomputed singular-region boundary for fast in-loop lookups.

    Cumulative Simpson integration of R on a uniform grid; queries
    interpolate linearly. Immutable once built, safe to share.
    """

    def __init__(self, delays: DelayModel, params: GameParams,
                 tau_max: float = 25.0, n: int = 4001, scan_n: int = 10_000):
        if n % 2 == 0:
            n += 1
        self.delays = delays
        self.params = params
        self.tau_s = find_tau_s(delays, params, tau_max=tau_max, n=scan_n,
                                allow_no_root=True)
        grid = np.linspace(0.0, tau_max, n)
        self.grid = grid
        if not math.isfinite(self.tau_s):
            # singular region never opens below the horizon: pure sign law
            self.z_star = np.zeros(n)
            return
        r = r_func(grid, delays, params)
        h = grid[1] - grid[0]
        # cumulative Simpson with a trapezoid patch on odd prefixes
        cum = np.zeros(n)
        pair = (h / 6.0) * (r[:-2:2] + 4.0 * r[1:-1:2] + r[2::2]) * 2.0
        cum[2::2] = np.cumsum(pair)
        cum[1::2] = cum[:-1:2] + (h / 2.0) * (r[:-1:2] + r[1::2])
        base = np.interp(self.tau_s, grid, cum)
        self.z_star = np.where(grid >= self.tau_s, cum - base, 0.0)
        self.z_star = np.maximum(self.z_star, 0.0)

    def z_star_at(self, tau: float) -> float:
        """Boundary value at tau; 0 below tau_s, clamped to the table range."""
        if tau <= self.tau_s:
            return 0.0
        return float(np.interp(tau, self.grid, self.z_star))

    def export_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("tau,z_star\n")
            for tt, zz in zip(self.grid, self.z_star):
                fh.write(f"{tt:.17g},{zz:.17g}\n")
