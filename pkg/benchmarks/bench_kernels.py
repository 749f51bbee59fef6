"""Compare the compiled kernels against the pure NumPy fallback.

Times the two hot paths end to end: full energy-LP solves on sampled mesh
instances, and batched pattern-SINR admission checks. Run after an
editable install:

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

import seamesh
from seamesh import _kernels
from seamesh.channel import gain_matrix
from seamesh.topology import sample_instance, solve_topology


def bench_solves(n_instances=8):
    insts = []
    seed = 0
    while len(insts) < n_instances:
        inst = sample_instance(seed)
        seed += 1
        if inst is not None:
            insts.append(inst)
    t0 = time.perf_counter()
    total = 0.0
    for inst in insts:
        alloc = solve_topology(inst.scenario, inst.flows, inst.patterns,
                               inst.links)
        total += alloc.total_energy_rate_w
    return time.perf_counter() - t0, total


def bench_sinr(n_batches=20000, k=6, seed=1):
    rng = np.random.default_rng(seed)
    pos = rng.uniform(0, 2000, size=(12, 2))
    gain = gain_matrix(pos, seamesh.MESH_3P5GHZ)
    noise = seamesh.MESH_3P5GHZ.noise_power_w()
    out = np.empty(k)
    pairs = [rng.choice(12, size=2, replace=False) for _ in range(k)]
    tx = np.array([p[0] for p in pairs], dtype=np.int64)
    rx = np.array([p[1] for p in pairs], dtype=np.int64)
    pw = rng.choice([0.5, 2.0], size=k)
    t0 = time.perf_counter()
    acc = 0.0
    for _ in range(n_batches):
        _kernels.pattern_sinr(gain, noise, tx, rx, pw, out)
        acc += out[0]
    return time.perf_counter() - t0, acc


def main():
    backends = _kernels.available_backends()
    print(f"available backends: {', '.join(backends)}")
    results = {}
    for name in backends:
        _kernels.set_backend(name)
        t_lp, chk_lp = bench_solves()
        t_s, chk_s = bench_sinr()
        results[name] = (t_lp, t_s)
        print(f"{name:>9}: energy-LP suite {t_lp * 1e3:8.1f} ms"
              f"   sinr batches {t_s * 1e3:8.1f} ms"
              f"   (checksums {chk_lp:.6f} / {chk_s:.3e})")
    if len(results) == 2:
        c, p = results["compiled"], results["pure"]
        print(f"speedup: energy-LP x{p[0] / c[0]:.2f}, sinr x{p[1] / c[1]:.2f}")


if __name__ == "__main__":
    main()
