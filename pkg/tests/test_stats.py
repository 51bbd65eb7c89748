import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from interceptsim.stats import (empirical_cdf, quantile_radius,
                                weighted_mean_std, weighted_quantile)


def test_weighted_quantile_point_mass():
    v = np.full(50, 0.37)
    w = np.random.default_rng(0).random(50)
    for p in (0.01, 0.5, 0.99, 1.0):
        assert weighted_quantile(v, w, p) == 0.37


def test_weighted_quantile_step_semantics():
    v = np.array([1.0, 2.0, 3.0])
    w = np.array([0.5, 0.4, 0.1])
    assert weighted_quantile(v, w, 0.5) == 1.0
    assert weighted_quantile(v, w, 0.6) == 2.0
    assert weighted_quantile(v, w, 0.9) == 2.0
    assert weighted_quantile(v, w, 0.95) == 3.0
    assert weighted_quantile(v, w, 1.0) == 3.0


@given(st.lists(st.floats(min_value=0.0, max_value=10.0), min_size=2,
                max_size=40),
       st.floats(min_value=0.05, max_value=0.95))
def test_weighted_quantile_monotone_in_p(values, p):
    v = np.asarray(values)
    w = np.ones_like(v)
    lo = weighted_quantile(v, w, p)
    hi = weighted_quantile(v, w, min(p + 0.04, 1.0))
    assert lo <= hi


def test_weighted_quantile_never_exceeds_max(rng):
    for _ in range(50):
        v = rng.normal(size=30)
        w = rng.random(30)
        assert weighted_quantile(v, w, 0.99) <= v.max()


def test_empirical_cdf_reaches_one(rng):
    xs, ps = empirical_cdf(rng.normal(size=101))
    assert ps[-1] == 1.0
    assert np.all(np.diff(xs) >= 0)
    assert np.all(np.diff(ps) > 0)


def test_quantile_radius_sort_oracle(rng):
    vals = rng.exponential(10.0, size=997)
    for p in (0.5, 0.9, 0.95, 0.99):
        # independent oracle: scan the sorted sample for the first index
        # whose empirical CDF reaches p
        srt = np.sort(vals)
        idx = next(i for i in range(srt.size) if (i + 1) / srt.size >= p)
        assert quantile_radius(vals, p) == srt[idx]


def test_quantile_radius_monotone_in_p(rng):
    vals = rng.random(200)
    radii = [quantile_radius(vals, p) for p in (0.5, 0.8, 0.9, 0.95, 0.999)]
    assert all(a <= b for a, b in zip(radii, radii[1:]))


def test_weighted_mean_std():
    mean, std = weighted_mean_std([1.0, 3.0], [0.5, 0.5])
    assert mean == pytest.approx(2.0)
    assert std == pytest.approx(1.0)


def test_weighted_quantile_validation():
    with pytest.raises(ValueError):
        weighted_quantile([1.0], [1.0], 0.0)
    with pytest.raises(ValueError):
        weighted_quantile([], [], 0.5)
    with pytest.raises(ValueError):
        weighted_quantile([1.0], [0.0], 0.5)
