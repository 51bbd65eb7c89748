"""Fixed-lag approximation smoother over particle genealogies.

Snapshots of the ensemble are kept for the last L steps together with the
ancestor permutations produced by resampling. A lag-j query walks each
current particle's lineage back j steps and averages the ancestor states
with the CURRENT weights; weights are never re-normalized per lag.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np


@dataclass
class SmoothedValue:
    value: float
    dispersion: float
    lag_used: int
    clamped: bool


class HistoryBuffer:
    """Ring buffer of ensemble snapshots with ancestor bookkeeping.

    max_lag steps of history are queryable; memory is bounded at
    (max_lag + 1) snapshots regardless of run length.
    """

    def __init__(self, max_lag: int, n_particles: int):
        if max_lag < 0:
            raise ValueError("max_lag must be nonnegative")
        self.max_lag = max_lag
        self.n_particles = n_particles
        self._states = deque(maxlen=max_lag + 1)
        self._ancestors = deque(maxlen=max_lag + 1)

    def __len__(self) -> int:
        return len(self._states)

    @property
    def available_lag(self) -> int:
        return max(len(self._states) - 1, 0)

    def record(self, states: np.ndarray, ancestors: np.ndarray | None) -> None:
        """Store one post-resampling snapshot; pass None ancestors at init."""
        if states.shape[0] != self.n_particles:
            raise ValueError("snapshot size mismatch")
        if ancestors is None:
            ancestors = np.arange(self.n_particles, dtype=np.int64)
        self._states.append(states.copy())
        self._ancestors.append(np.asarray(ancestors, dtype=np.int64))

    def lineage_states(self, lag: int) -> tuple[np.ndarray, int, bool]:
        """Ancestor states of the current particles at the given lag.

        Returns (states, lag_used, clamped); lags beyond the stored history
        clamp to the oldest snapshot.
        """
        if lag < 0:
            raise ValueError("lag must be nonnegative")
        if len(self._states) == 0:
            raise RuntimeError("empty history buffer")
        clamped = lag > self.available_lag
        lag_used = min(lag, self.available_lag)
        idx = np.arange(self.n_particles)
        last = len(self._states) - 1
        for j in range(lag_used):
            idx = self._ancestors[last - j][idx]
        return self._states[last - lag_used][idx], lag_used, clamped

    def smoothed_estimate(self, weights: np.ndarray, lag: int,
                          selector) -> SmoothedValue:
        """Current-weight average of selector(states) at the requested lag."""
        states, lag_used, clamped = self.lineage_states(lag)
        vals = np.asarray(selector(states), dtype=float)
        mean = float(weights @ vals)
        disp = float(np.sqrt(max(weights @ (vals - mean) ** 2, 0.0)))
        return SmoothedValue(value=mean, dispersion=disp,
                             lag_used=lag_used, clamped=clamped)
