"""Monte Carlo campaigns over switch times and seeds.

Runs are embarrassingly parallel; every run's RNG stream is keyed by
(base seed, switch-time index, run index), so results are identical
regardless of worker count or completion order.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .engagement import run_engagement
from .scenario import ScenarioConfig
from .stats import empirical_cdf, quantile_radius


@dataclass
class CampaignSummary:
    law: str
    t_sw_values: np.ndarray       # (P,)
    mean_miss: np.ndarray         # (P,)
    std_miss: np.ndarray          # (P,)
    misses: np.ndarray            # (P, R) per-point raw misses
    runs_per_point: int

    @property
    def pooled(self) -> np.ndarray:
        return np.sort(self.misses.ravel())

    def cdf(self) -> tuple[np.ndarray, np.ndarray]:
        return empirical_cdf(self.pooled)

    def lethality_radius(self, p: float = 0.95) -> float:
        return quantile_radius(self.pooled, p)

    def to_json(self, path) -> None:
        payload = {
            "law": self.law,
            "runs_per_point": self.runs_per_point,
            "t_sw": [float(x) for x in self.t_sw_values],
            "mean_miss": [float(x) for x in self.mean_miss],
            "std_miss": [float(x) for x in self.std_miss],
            "lethality_radius_p95": self.lethality_radius(0.95),
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")

    def stats_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("t_sw,mean_miss,std_miss\n")
            for tsw, m, s in zip(self.t_sw_values, self.mean_miss,
                                 self.std_miss):
                fh.write(f"{tsw:.17g},{m:.17g},{s:.17g}\n")

    def cdf_csv(self, path) -> None:
        miss, prob = self.cdf()
        with open(path, "w") as fh:
            fh.write("miss,cum_prob\n")
            for m, p in zip(miss, prob):
                fh.write(f"{m:.17g},{p:.17g}\n")


def run_seed(base_seed: int, i_tsw: int, i_run: int) -> int:
    """Deterministic per-run seed; independent of execution order."""
    ss = np.random.SeedSequence((int(base_seed), int(i_tsw), int(i_run)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _one_run(args) -> tuple[int, int, float]:
    config, i_tsw, i_run = args
    rec = run_engagement(config)
    return i_tsw, i_run, rec.miss


def run_campaign(config: ScenarioConfig, t_sw_values, runs_per_point: int,
                 jobs: int = 1) -> CampaignSummary:
    """Seeded MC sweep of a single law across the switch-time grid."""
    t_sw_values = np.asarray(t_sw_values, dtype=float)
    tasks = []
    for i, tsw in enumerate(t_sw_values):
        for r in range(runs_per_point):
            run_cfg = config.replace(
                t_sw=float(tsw), seed=run_seed(config.seed, i, r),
                record_diagnostics=False)
            tasks.append((run_cfg, i, r))

    misses = np.zeros((t_sw_values.size, runs_per_point))
    if jobs <= 1:
        results = map(_one_run, tasks)
        for i, r, miss in results:
            misses[i, r] = miss
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for i, r, miss in pool.map(_one_run, tasks, chunksize=8):
                misses[i, r] = miss

    return CampaignSummary(
        law=config.law, t_sw_values=t_sw_values,
        mean_miss=misses.mean(axis=1), std_miss=misses.std(axis=1, ddof=1),
        misses=misses, runs_per_point=runs_per_point)
