import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq

from interceptsim.game import (BoundaryTable, DelayModel, GameParams,
                               RootScanError, a_func, find_tau_s,
                               guaranteed_miss, psi, r_func,
                               scan_sign_changes, singular_boundary)

SCEN = DelayModel.power_law(a=0.05, b1=0.15, b2=0.3, omega=1.0 / 3.0)


def test_psi_values():
    assert psi(0.0) == 0.0
    assert psi(1.0) == pytest.approx(math.exp(-1) + 0.0, abs=1e-15)


@given(st.floats(min_value=0.0, max_value=20.0))
def test_psi_nonnegative(tau):
    assert psi(tau) >= 0.0


def test_psi_convex_grid():
    tau = np.linspace(0.0, 20.0, 1000)
    vals = psi(tau)
    assert np.all(vals >= 0.0)
    assert np.all(np.diff(vals, 2) >= -1e-12)


def test_a_zero_delay_reduction(gp):
    tau = np.linspace(0.0, 15.0, 500)
    got = a_func(tau, DelayModel.zero(), gp)
    ref = gp.epsilon * psi(tau / gp.epsilon)
    assert np.allclose(got, ref, rtol=1e-12, atol=1e-15)


def test_a_constant_delay_specialization(gp):
    # independent constant-delay expression with the slope terms dropped
    tau = np.linspace(0.0, 15.0, 300)
    d1, d2 = 0.12, 0.4
    got = a_func(tau, DelayModel.constant(d1, d2), gp)
    eps = gp.epsilon
    ref = d1 + tau + eps * np.exp(-(tau + d2) / eps) - eps * np.exp((d1 - d2) / eps)
    assert np.allclose(got, ref, rtol=1e-12)


def test_a_positive_on_scenario_grid(gp):
    tau = np.linspace(0.0, 15.0, 2000)
    assert np.all(a_func(tau, SCEN, gp) > 0.0)


def test_a_at_zero_limit(gp):
    a0 = a_func(0.0, SCEN, gp)
    eps = gp.epsilon
    ref = 0.05 + eps * math.exp(-0.05 / eps) - eps
    assert a0 == pytest.approx(ref, rel=1e-12)
    # continuity from above (slow, like tau^omega)
    assert a_func(1e-12, SCEN, gp) == pytest.approx(a0, abs=1e-3)


def test_r_sign_structure(gp):
    assert r_func(0.0, SCEN, gp) == pytest.approx(-a_func(0.0, SCEN, gp))
    assert r_func(0.0, SCEN, gp) < 0.0
    # large tau: R ~ (mu - 1) tau
    assert r_func(200.0, SCEN, gp) == pytest.approx((gp.mu - 1.0) * 200.0,
                                                    rel=0.05)


def test_zero_delay_root_matches_reduced_expression():
    # agility-deficient game: root of mu*Psi(tau) = eps*Psi(tau/eps)
    params = GameParams(mu=2.25, epsilon=0.2, tau_p=0.2, tau_e=0.04,
                        a_e_max=196.133)
    tau_s = find_tau_s(DelayModel.zero(), params)
    ref = brentq(lambda t: 2.25 * psi(t) - 0.2 * psi(t / 0.2), 1e-6, 10.0,
                 rtol=1e-12)
    assert tau_s == pytest.approx(ref, rel=1e-8)


def test_zero_delay_agile_game_root_at_zero(gp):
    # mu*eps > 1: R > 0 for all tau > 0, singular region opens at once
    assert find_tau_s(DelayModel.zero(), gp) == 0.0


def test_tau_s_grows_as_mu_drops():
    taus = []
    for mu in (2.5, 2.0, 1.6, 1.3):
        params = GameParams(mu=mu, epsilon=1.0, tau_p=0.2, tau_e=0.2,
                            a_e_max=196.133)
        taus.append(find_tau_s(SCEN, params))
    assert all(a < b for a, b in zip(taus, taus[1:]))


def test_paper_grid_point_single_root():
    params = GameParams(mu=1.1, epsilon=0.2, tau_p=0.2, tau_e=0.04,
                        a_e_max=196.133)
    model = DelayModel.power_law(a=0.01, b1=0.0, b2=0.06, omega=1.0 / 12.0)
    assert len(scan_sign_changes(model, params)) == 1
    assert find_tau_s(model, params) > 0.0


def test_no_root_error(gp):
    # enormous constant delays push the root beyond the horizon
    model = DelayModel.constant(3.0, 6.0)
    with pytest.raises(RootScanError):
        find_tau_s(model, gp, tau_max=1.0)
    assert find_tau_s(model, gp, tau_max=1.0, allow_no_root=True) == math.inf


def test_singular_boundary_properties(gp):
    tau_s = find_tau_s(SCEN, gp)
    assert singular_boundary(tau_s, tau_s, SCEN, gp) == 0.0
    assert singular_boundary(tau_s * 0.5, tau_s, SCEN, gp) == 0.0
    grid = np.linspace(tau_s, 12.0, 50)
    vals = [singular_boundary(t, tau_s, SCEN, gp) for t in grid]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_guaranteed_miss_positive(gp):
    tau_s = find_tau_s(SCEN, gp)
    m_s = guaranteed_miss(tau_s, SCEN, gp)
    ref, _ = quad(lambda t: -r_func(t, SCEN, gp), 0.0, tau_s)
    assert m_s == pytest.approx(ref, rel=1e-9)
    assert m_s > 0.0


def test_boundary_table_matches_quadrature(gp):
    table = BoundaryTable(SCEN, gp, tau_max=15.0)
    for tau in (table.tau_s + 0.3, 5.0, 9.7, 14.0):
        ref = singular_boundary(tau, table.tau_s, SCEN, gp)
        # the table is the fast in-loop path; near tau_s its interpolation
        # granularity dominates
        assert table.z_star_at(tau) == pytest.approx(ref, rel=1e-4, abs=1e-8)
    assert table.z_star_at(table.tau_s * 0.5) == 0.0


def test_r_monotone_in_delay_coefficients(gp):
    # growing any delay coefficient cannot increase R pointwise
    tau = np.linspace(0.05, 12.0, 300)
    base = r_func(tau, SCEN, gp)
    for kw in ({"a": 0.08}, {"b1": 0.25}, {"b2": 0.45}):
        args = dict(a=0.05, b1=0.15, b2=0.3, omega=1.0 / 3.0)
        args.update(kw)
        bigger = r_func(tau, DelayModel.power_law(**args), gp)
        assert np.all(bigger <= base + 1e-12)


def test_delay_model_validation():
    with pytest.raises(ValueError):
        DelayModel.power_law(a=0.05, b1=0.4, b2=0.3, omega=0.5)
    with pytest.raises(ValueError):
        DelayModel(a1=0.1, b1=0.0, a2=0.1, b2=0.0, omega=1.5)
    with pytest.raises(ValueError):
        DelayModel.constant(0.5, 0.4)


def test_game_params_validation():
    with pytest.raises(ValueError):
        GameParams(mu=0.9, epsilon=1.0, tau_p=0.2, tau_e=0.2, a_e_max=196.0)
    with pytest.raises(ValueError):
        GameParams(mu=2.0, epsilon=1.0, tau_p=0.2, tau_e=0.2, a_e_max=196.0,
                   k=1.5)
