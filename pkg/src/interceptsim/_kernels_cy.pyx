# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled propagation kernel for the planar engagement dynamics.

Same contract as interceptsim._kernels_py.propagate_states; this version
fuses the RK4 stages into one loop over rows so the per-mode particle
banks propagate without numpy temporaries.
"""

from libc.math cimport sin, cos


cdef inline void _deriv(double rho, double lam, double g_e, double a_e,
                        double g_p, double a_p,
                        double a_e_cmd, double a_p_cmd,
                        double v_p, double v_e, double tau_p, double tau_e,
                        double* out) nogil:
    cdef double d_p = g_p - lam
    cdef double d_e = g_e + lam
    cdef double v_rho = -(v_p * cos(d_p) + v_e * cos(d_e))
    cdef double v_lam = -v_p * sin(d_p) + v_e * sin(d_e)
    out[0] = v_rho
    out[1] = v_lam / rho
    out[2] = a_e / v_e
    out[3] = (a_e_cmd - a_e) / tau_e
    out[4] = a_p / v_p
    out[5] = (a_p_cmd - a_p) / tau_p


def propagate_states(double[:, ::1] states, double a_p_cmd, double[::1] a_e_cmd,
                     double dt, int nsub, double v_p, double v_e,
                     double tau_p, double tau_e):
    """Advance rows of [rho, lam, gamma_E, a_E, gamma_P, a_P] by dt, in place.

    Fixed-step RK4 with nsub substeps. a_e_cmd is per-row, a_p_cmd shared.
    """
    cdef Py_ssize_t n = states.shape[0]
    cdef Py_ssize_t i
    cdef int j, m
    cdef double h = dt / nsub
    cdef double y[6]
    cdef double k1[6]
    cdef double k2[6]
    cdef double k3[6]
    cdef double k4[6]
    cdef double tmp[6]
    cdef double ae_c

    with nogil:
        for i in range(n):
            for m in range(6):
                y[m] = states[i, m]
            ae_c = a_e_cmd[i]
            for j in range(nsub):
                _deriv(y[0], y[1], y[2], y[3], y[4], y[5],
                       ae_c, a_p_cmd, v_p, v_e, tau_p, tau_e, k1)
                for m in range(6):
                    tmp[m] = y[m] + 0.5 * h * k1[m]
                _deriv(tmp[0], tmp[1], tmp[2], tmp[3], tmp[4], tmp[5],
                       ae_c, a_p_cmd, v_p, v_e, tau_p, tau_e, k2)
                for m in range(6):
                    tmp[m] = y[m] + 0.5 * h * k2[m]
                _deriv(tmp[0], tmp[1], tmp[2], tmp[3], tmp[4], tmp[5],
                       ae_c, a_p_cmd, v_p, v_e, tau_p, tau_e, k3)
                for m in range(6):
                    tmp[m] = y[m] + h * k3[m]
                _deriv(tmp[0], tmp[1], tmp[2], tmp[3], tmp[4], tmp[5],
                       ae_c, a_p_cmd, v_p, v_e, tau_p, tau_e, k4)
                for m in range(6):
                    y[m] += (h / 6.0) * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m])
            for m in range(6):
                states[i, m] = y[m]
