"""Time the transmit kernels on both backends and print the speedup.

The backend is fixed at import time by the ``COSYNC_BACKEND`` environment
variable, so this script re-launches itself once per backend and compares
the results:

    python3 benchmarks/transport_backends.py

Each worker times two workloads:

* ``kernel``   - one huge retry batch straight through ``run_transmit``
                 (100k packets, 6 attempts, 30% per-attempt drop rate);
* ``scenario`` - a full co-simulation cell (TCP, NLOS, 100 m, 3 seeds)
                 through the orchestrator, which mixes kernel time with
                 event-queue bookkeeping.

Timings are best-of-N wall clock; the JIT warm-up pass is excluded.
"""

import argparse
import json
import os
import subprocess
import sys
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]

KERNEL_PACKETS = 100_000
KERNEL_REPEATS = 5
SCENARIO_REPEATS = 3


def _time_best(repeats, fn):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def run_worker():
    import numpy as np

    from cosync._kernels import ACTIVE_BACKEND, lane_seed, run_transmit
    from cosync.gridrun import run_cell
    from cosync.scenario import load_config

    seqs = np.arange(KERNEL_PACKETS, dtype=np.int64)
    sizes = np.full(KERNEL_PACKETS, 502, dtype=np.int64)
    seed64 = lane_seed(7, 0)

    def kernel_pass():
        run_transmit(seed64, seqs, sizes, 0.3, 6, 1e-3, 1.0 / 54e6, 3e-7,
                     1e-3)

    kernel_pass()  # warm up (compiles under numba, caches allocators on numpy)
    kernel_s = _time_best(KERNEL_REPEATS, kernel_pass)

    config = load_config(ROOT / "configs" / "ugv_uav.cfg")

    def scenario_pass():
        run_cell(config, 100.0, "nlos", seeds=(1, 2, 3))

    scenario_pass()
    scenario_s = _time_best(SCENARIO_REPEATS, scenario_pass)

    print(json.dumps({"backend": ACTIVE_BACKEND,
                      "kernel_s": kernel_s,
                      "scenario_s": scenario_s}))


def launch(backend):
    env = dict(os.environ, COSYNC_BACKEND=backend)
    proc = subprocess.run([sys.executable, __file__, "--worker"],
                          env=env, capture_output=True, text=True, check=True)
    result = json.loads(proc.stdout.strip().splitlines()[-1])
    if result["backend"] != backend:
        raise RuntimeError("asked for backend %r but worker used %r"
                           % (backend, result["backend"]))
    return result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--worker", action="store_true",
                        help=argparse.SUPPRESS)
    args = parser.parse_args()
    if args.worker:
        run_worker()
        return

    results = {backend: launch(backend) for backend in ("numpy", "numba")}
    print("workload                      numpy        numba      speedup")
    for key, label in (("kernel_s",
                        "kernel (%dk pkts x 6 tries)" % (KERNEL_PACKETS // 1000)),
                       ("scenario_s", "scenario (tcp nlos 100m x3)")):
        base = results["numpy"][key]
        jit = results["numba"][key]
        print("%-27s %9.4fs   %9.4fs   %6.2fx"
              % (label, base, jit, base / jit))


if __name__ == "__main__":
    main()
