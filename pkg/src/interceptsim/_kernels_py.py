"""Pure-numpy propagation kernel (fallback when the Cython build is absent)."""

import numpy as np


def _deriv(y, a_e_cmd, a_p_cmd, v_p, v_e, tau_p, tau_e):
    rho, lam, g_e, a_e, g_p, a_p = (y[:, m] for m in range(6))
    d_p = g_p - lam
    d_e = g_e + lam
    v_rho = -(v_p * np.cos(d_p) + v_e * np.cos(d_e))
    v_lam = -v_p * np.sin(d_p) + v_e * np.sin(d_e)
    out = np.empty_like(y)
    out[:, 0] = v_rho
    out[:, 1] = v_lam / rho
    out[:, 2] = a_e / v_e
    out[:, 3] = (a_e_cmd - a_e) / tau_e
    out[:, 4] = a_p / v_p
    out[:, 5] = (a_p_cmd - a_p) / tau_p
    return out


def propagate_states(states, a_p_cmd, a_e_cmd, dt, nsub, v_p, v_e, tau_p, tau_e):
    """Advance rows of [rho, lam, gamma_E, a_E, gamma_P, a_P] by dt, in place.

    Fixed-step RK4 with nsub substeps. a_e_cmd is per-row, a_p_cmd shared.
    """
    h = dt / nsub
    y = states
    for _ in range(nsub):
        k1 = _deriv(y, a_e_cmd, a_p_cmd, v_p, v_e, tau_p, tau_e)
        k2 = _deriv(y + 0.5 * h * k1, a_e_cmd, a_p_cmd, v_p, v_e, tau_p, tau_e)
        k3 = _deriv(y + 0.5 * h * k2, a_e_cmd, a_p_cmd, v_p, v_e, tau_p, tau_e)
        k4 = _deriv(y + h * k3, a_e_cmd, a_p_cmd, v_p, v_e, tau_p, tau_e)
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
