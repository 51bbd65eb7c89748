"""Closed-form solutions of the normalized linear game under piecewise-constant controls.

The linear model with first-order lags admits exact exponential solutions
on every interval where both controls are constant. That makes it the
right reference machinery for the appendix-style consistency checks: the
ZEM evolution identity and the functional bound can be verified without
any ODE-solver error floor.
"""

from __future__ import annotations

import math

import numpy as np

from .game import DelayModel, GameParams, psi


class PiecewiseControl:
    """Piecewise-constant control: values[i] on [breaks[i], breaks[i+1])."""

    def __init__(self, breaks, values):
        self.breaks = np.asarray(breaks, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.breaks.size != self.values.size + 1:
            raise ValueError("need len(breaks) == len(values) + 1")
        if np.any(np.diff(self.breaks) <= 0.0):
            raise ValueError("breaks must be strictly increasing")

    @classmethod
    def constant(cls, value, lo, hi):
        return cls([lo, hi], [value])

    @classmethod
    def random(cls, rng, lo, hi, n_segments, bang_bang=False):
        cuts = np.sort(rng.uniform(lo, hi, size=n_segments - 1))
        breaks = np.concatenate(([lo], cuts, [hi]))
        if bang_bang:
            vals = rng.choice([-1.0, 1.0], size=n_segments)
        else:
            vals = rng.uniform(-1.0, 1.0, size=n_segments)
        return cls(breaks, vals)

    def __call__(self, tau: float) -> float:
        i = int(np.searchsorted(self.breaks, tau, side="right")) - 1
        i = min(max(i, 0), self.values.size - 1)
        return float(self.values[i])

    def segments_in(self, lo: float, hi: float):
        """Yield (a, b, value) pieces covering [lo, hi]."""
        if hi <= lo:
            return
        i = int(np.searchsorted(self.breaks, lo, side="right")) - 1
        i = min(max(i, 0), self.values.size - 1)
        a = lo
        while a < hi - 1e-300:
            b = min(hi, self.breaks[i + 1]) if i + 1 < self.breaks.size else hi
            if i == self.values.size - 1:
                b = hi
            yield a, min(b, hi), float(self.values[i])
            a = b
            i = min(i + 1, self.values.size - 1)

    def interior_breaks(self):
        return self.breaks[1:-1]


def exp_weighted_integral(control: PiecewiseControl, tau: float,
                          lo: float, hi: float, eps: float) -> float:
    """Exact integral of exp((tau - s)/eps) * v(s) over [lo, hi]."""
    total = 0.0
    for a, b, c in control.segments_in(lo, hi):
        total += c * eps * (math.exp((tau - a) / eps) - math.exp((tau - b) / eps))
    return total


def plain_integral(control: PiecewiseControl, lo: float, hi: float) -> float:
    return sum(c * (b - a) for a, b, c in control.segments_in(lo, hi))


class LinearGameTrajectory:
    """Exact normalized linear-game states for piecewise-constant controls.

    The model is
        x1' = -x2,  x2' = -x4 + mu*x3,  x3' = x3 - u,  x4' = (x4 - v)/eps
    with tau increasing toward earlier real time. The boundary state x_top
    anchors the trajectory at tau_hi and node states are filled downward,
    which is the stable direction for the lag states (anchoring at the
    bottom and growing upward amplifies like exp(tau) and destroys the
    conditioning of any finite-difference check run on the result).
    """

    def __init__(self, x_top, tau_lo: float, tau_hi: float,
                 u: PiecewiseControl, v: PiecewiseControl,
                 mu: float, eps: float):
        self.u = u
        self.v = v
        self.mu = mu
        self.eps = eps
        self.tau_lo = tau_lo
        self.tau_hi = tau_hi
        breaks = np.unique(np.concatenate(
            ([tau_lo, tau_hi],
             u.breaks[(u.breaks > tau_lo) & (u.breaks < tau_hi)],
             v.breaks[(v.breaks > tau_lo) & (v.breaks < tau_hi)])))
        self._nodes = breaks
        states = [None] * breaks.size
        states[-1] = np.asarray(x_top, dtype=float)
        for i in range(breaks.size - 2, -1, -1):
            a, b = breaks[i], breaks[i + 1]
            mid = 0.5 * (a + b)
            states[i] = self._advance(states[i + 1], b, a, u(mid), v(mid))
        self._node_states = states

    def _advance(self, x, a, b, uc, vc):
        mu, eps = self.mu, self.eps
        d = b - a
        x1, x2, x3, x4 = x
        e3 = math.exp(d)
        e4 = math.exp(d / eps)
        int3 = uc * d + (x3 - uc) * (e3 - 1.0)
        int4 = vc * d + eps * (x4 - vc) * (e4 - 1.0)
        dint3 = uc * d * d / 2.0 + (x3 - uc) * (e3 - 1.0 - d)
        dint4 = vc * d * d / 2.0 + eps * (x4 - vc) * (eps * (e4 - 1.0) - d)
        return np.array([
            x1 - (x2 * d + mu * dint3 - dint4),
            x2 + mu * int3 - int4,
            uc + (x3 - uc) * e3,
            vc + (x4 - vc) * e4,
        ])

    def _locate(self, tau):
        if not self.tau_lo - 1e-12 <= tau <= self.tau_hi + 1e-12:
            raise ValueError(f"tau={tau} outside [{self.tau_lo}, {self.tau_hi}]")
        i = int(np.searchsorted(self._nodes, tau, side="right")) - 1
        i = min(max(i, 0), len(self._nodes) - 2)
        return i

    def state(self, tau: float) -> np.ndarray:
        i = self._locate(tau)
        b = self._nodes[i + 1]
        if tau >= b:
            return self._node_states[i + 1].copy()
        mid = 0.5 * (tau + b)
        return self._advance(self._node_states[i + 1], b, tau,
                             self.u(mid), self.v(mid))

    def x3_integral(self, lo: float, hi: float) -> float:
        """Exact integral of x3 over [lo, hi], anchored at each piece top."""
        total = 0.0
        b = hi
        while b > lo + 1e-300:
            i = int(np.searchsorted(self._nodes, b, side="left")) - 1
            i = min(max(i, 0), len(self._nodes) - 2)
            a = max(lo, self._nodes[i])
            if a >= b:
                a = lo
            xb = self.state(b)
            uc = self.u(0.5 * (a + b))
            d = b - a
            total += uc * d + (xb[2] - uc) * (1.0 - math.exp(-d))
            b = a
        return total

    def zem_cc(self, tau: float, delays: DelayModel) -> float:
        """Normalized two-delay ZEM evaluated exactly on this trajectory."""
        d1 = float(delays.delta1(tau))
        d2 = float(delays.delta2(tau))
        x_now = self.state(tau)
        x2_d = self.state(tau + d1)[1]
        x4_d = self.state(tau + d2)[3]
        i3 = self.x3_integral(tau, tau + d1)
        coef4 = self.eps * math.exp(-d2 / self.eps) * (
            tau * math.exp(d1 / self.eps)
            + self.eps * math.exp(-tau / self.eps) - self.eps)
        return (x_now[0] + tau * x2_d - self.mu * psi(tau) * x_now[2]
                - self.mu * tau * i3 + coef4 * x4_d)

    def zem_cc_rate(self, tau: float, delays: DelayModel) -> float:
        """Claimed evolution rate d(zem_cc)/d tau at tau."""
        return (self.mu * psi(tau) * self.u(tau)
                + evader_functional(self.v, tau, delays, self.eps))

    def first_order_kinks(self, delays: DelayModel) -> np.ndarray:
        """tau values where d(zem_cc)/d tau jumps (control-break pullbacks)."""
        kinks = list(self.u.interior_breaks())
        for br in self.v.interior_breaks():
            # solve tau + delta2(tau) = br; monotone increasing in tau
            lo, hi = self.tau_lo, min(self.tau_hi, br)
            if lo + float(delays.delta2(lo)) <= br <= hi + float(delays.delta2(hi)):
                for _ in range(200):
                    mid = 0.5 * (lo + hi)
                    if mid + float(delays.delta2(mid)) < br:
                        lo = mid
                    else:
                        hi = mid
                kinks.append(0.5 * (lo + hi))
        return np.asarray(sorted(kinks))


def evader_functional(v: PiecewiseControl, tau: float, delays: DelayModel,
                      eps: float) -> float:
    """Delayed-control functional driving the ZEM evolution (exact quadrature)."""
    d1 = float(delays.delta1(tau))
    d2 = float(delays.delta2(tau))
    g1 = float(delays.gamma1(tau))
    g2 = float(delays.gamma2(tau))
    t1 = -plain_integral(v, tau, tau + d1)
    t2 = exp_weighted_integral(v, tau, tau, tau + d2, eps)
    t3 = -math.exp(d1 / eps) * (tau * (1.0 + g1) / eps + 1.0) * \
        exp_weighted_integral(v, tau, tau + d1, tau + d2, eps)
    t4 = -math.exp(-d2 / eps) * (
        tau * math.exp(d1 / eps) + eps * math.exp(-tau / eps) - eps) * \
        v(tau + d2) * (1.0 + g2)
    return t1 + t2 + t3 + t4
