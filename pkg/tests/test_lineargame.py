import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

from interceptsim.game import DelayModel, a_func
from interceptsim.lineargame import (LinearGameTrajectory, PiecewiseControl,
                                     evader_functional, exp_weighted_integral,
                                     plain_integral)


def _random_setup(seed):
    rng = np.random.default_rng(seed)
    mu = rng.uniform(1.3, 2.8)
    eps = rng.uniform(0.5, 1.5)
    u = PiecewiseControl.random(rng, 0.0, 10.0, 5, bang_bang=True)
    v = PiecewiseControl.random(rng, 0.0, 10.0, 5)
    x_top = rng.normal(size=4)
    return LinearGameTrajectory(x_top, 0.0, 10.0, u, v, mu, eps), rng


def test_states_match_ode(vp):
    traj, _ = _random_setup(5)
    mu, eps, u, v = traj.mu, traj.eps, traj.u, traj.v

    def rhs(t, y):  # downward integration in tau
        tau = -t
        return [y[1], y[3] - mu * y[2], -(y[2] - u(tau)), -(y[3] - v(tau)) / eps]

    sol = solve_ivp(rhs, (-10.0, -0.1), traj.state(10.0), rtol=1e-12,
                    atol=1e-13, dense_output=True, max_step=0.01)
    for tau in (0.1, 1.7, 4.2, 8.8):
        assert np.allclose(traj.state(tau), sol.sol(-tau), rtol=1e-8,
                           atol=1e-9)


def test_x3_integral_matches_quadrature():
    traj, _ = _random_setup(6)
    for lo, hi in ((0.2, 0.9), (1.0, 6.3), (7.9, 9.9)):
        ref, _ = quad(lambda s: traj.state(s)[2], lo, hi, limit=400)
        # reference accuracy is quad-limited across the piece boundaries
        assert traj.x3_integral(lo, hi) == pytest.approx(ref, rel=1e-7,
                                                         abs=1e-9)


def test_piecewise_integrals():
    v = PiecewiseControl([0.0, 1.0, 2.0], [0.5, -1.0])
    assert plain_integral(v, 0.0, 2.0) == pytest.approx(-0.5)
    assert plain_integral(v, 0.5, 1.5) == pytest.approx(0.25 - 0.5)
    ref, _ = quad(lambda s: np.exp((0.3 - s) / 0.7) * v(s), 0.3, 1.9,
                  points=[1.0], limit=200)
    assert exp_weighted_integral(v, 0.3, 0.3, 1.9, 0.7) == pytest.approx(
        ref, rel=1e-10)


def test_functional_extremes_hit_envelope(gp):
    model = DelayModel.power_law(a=0.05, b1=0.15, b2=0.3, omega=1.0 / 3.0)
    for tau in (0.2, 1.0, 4.0, 9.0):
        d2 = float(model.delta2(tau))
        lo = PiecewiseControl.constant(-1.0, tau, tau + d2 + 1e-9)
        hi = PiecewiseControl.constant(1.0, tau, tau + d2 + 1e-9)
        a_val = a_func(tau, model, gp)
        assert evader_functional(lo, tau, model, gp.epsilon) == pytest.approx(
            a_val, rel=1e-12)
        assert evader_functional(hi, tau, model, gp.epsilon) == pytest.approx(
            -a_val, rel=1e-12)


def test_control_validation():
    with pytest.raises(ValueError):
        PiecewiseControl([0.0, 1.0], [0.1, 0.2])
    with pytest.raises(ValueError):
        PiecewiseControl([1.0, 0.5], [0.1])
