"""Benchmark the compiled propagation kernel against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [n_particles] [steps]
"""

import sys
import time

import numpy as np

from interceptsim import _kernels_py

try:
    from interceptsim import _kernels_cy
except ImportError:
    _kernels_cy = None


def bench_propagation(n, steps):
    rng = np.random.default_rng(0)
    states = np.empty((n, 6))
    states[:, 0] = rng.uniform(2000, 15000, n)
    states[:, 1] = rng.uniform(1.0, 2.0, n)
    states[:, 2] = rng.uniform(-2.0, -1.0, n)
    states[:, 3] = rng.uniform(-196, 196, n)
    states[:, 4] = rng.uniform(1.0, 2.0, n)
    states[:, 5] = rng.uniform(-441, 441, n)
    a_e = rng.choice([-196.133, 196.133], n)

    results = {}
    for name, mod in (("numpy", _kernels_py),
                      ("cython", _kernels_cy)):
        if mod is None:
            continue
        work = states.copy()
        t0 = time.perf_counter()
        for _ in range(steps):
            mod.propagate_states(work, 300.0, a_e, 0.01, 1,
                                 2500.0, 2500.0, 0.2, 0.2)
        dt = time.perf_counter() - t0
        results[name] = dt
        print(f"  {name:7s} {steps} steps x {n} particles: {dt:7.3f} s "
              f"({1e6 * dt / steps:8.1f} us/step)")
    if len(results) == 2:
        print(f"  speedup: {results['numpy'] / results['cython']:.2f}x")

    if _kernels_cy is not None:
        a = states.copy()
        b = states.copy()
        _kernels_py.propagate_states(a, 300.0, a_e, 0.01, 10, 2500, 2500, 0.2, 0.2)
        _kernels_cy.propagate_states(b, 300.0, a_e, 0.01, 10, 2500, 2500, 0.2, 0.2)
        print(f"  backend agreement: max|diff| = {np.max(np.abs(a - b)):.3e}")


_CHILD_SNIPPET = """
import time
from interceptsim.engagement import run_engagement
from interceptsim.kernels import BACKEND
from interceptsim.scenario import ScenarioConfig
config = ScenarioConfig(law="tv-dglcc", t_sw=2.0, seed=7)
t0 = time.perf_counter()
rec = run_engagement(config)
print(f"  full engagement [{BACKEND}]: "
      f"{time.perf_counter() - t0:.2f} s, miss {rec.miss:.3f} m")
"""


def bench_engagement():
    # backend selection happens at import, so each run gets a fresh process
    import os
    import subprocess
    backends = ("numpy", "cython") if _kernels_cy is not None else ("numpy",)
    for backend in backends:
        env = dict(os.environ, INTERCEPTSIM_KERNELS=backend)
        subprocess.run([sys.executable, "-c", _CHILD_SNIPPET], env=env,
                       check=True)


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 4000
    steps = int(sys.argv[2]) if len(sys.argv) > 2 else 300
    print(f"propagation kernel ({n} particles, {steps} steps):")
    bench_propagation(n, steps)
    print("closed-loop engagement:")
    bench_engagement()


if __name__ == "__main__":
    main()
