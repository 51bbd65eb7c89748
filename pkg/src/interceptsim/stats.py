"""Weighted and empirical distribution helpers."""

from __future__ import annotations

import numpy as np


def weighted_quantile(values, weights, p: float) -> float:
    """Smallest value at which the weighted step-CDF reaches p.

    Weights are renormalized internally; ties are resolved toward the
    smaller value, matching the step-function empirical CDF.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if v.size == 0:
        raise ValueError("empty sample")
    total = w.sum()
    if total <= 0.0:
        raise ValueError("total weight must be positive")
    order = np.argsort(v, kind="stable")
    cdf = np.cumsum(w[order]) / total
    idx = int(np.searchsorted(cdf, p - 1e-15, side="left"))
    idx = min(idx, v.size - 1)
    return float(v[order][idx])


def empirical_cdf(values) -> tuple[np.ndarray, np.ndarray]:
    """Sorted support and step-CDF heights; the last height is exactly 1."""
    v = np.sort(np.asarray(values, dtype=float))
    n = v.size
    return v, np.arange(1, n + 1) / n


def quantile_radius(values, p: float) -> float:
    """p-quantile of a pooled sample via the step-CDF convention."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise ValueError("empty sample")
    idx = int(np.ceil(p * v.size)) - 1
    return float(v[max(idx, 0)])


def weighted_mean_std(values, weights) -> tuple[float, float]:
    w = np.asarray(weights, dtype=float)
    v = np.asarray(values, dtype=float)
    mean = float(np.sum(w * v))
    var = float(np.sum(w * (v - mean) ** 2))
    return mean, float(np.sqrt(max(var, 0.0)))
