#!/usr/bin/env python3
"""Compare the numba and pure-numpy kernel implementations.

Micro-benchmarks time the three hot kernels on both implementations
in-process; the end-to-end section re-runs a full tensor-network Lipschitz
computation in subprocesses with QFAIR_KERNELS pinned, since the backend is
frozen at import time.

Usage: python benchmarks/kernel_benchmark.py [--qubits N] [--reps R]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from qfair.kernels import numpy_impl

try:
    from qfair.kernels import numba_impl
except ImportError:
    numba_impl = None


def _rand_state(rng, n):
    v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return v / np.linalg.norm(v)


def _rand_unitary(rng, d):
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return np.linalg.qr(a)[0]


def _time(fn, reps):
    fn()  # warm-up (and jit compile)
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def micro(n, reps):
    rng = np.random.default_rng(0)
    v = _rand_state(rng, n)
    u2 = _rand_unitary(rng, 2)
    u4 = _rand_unitary(rng, 4)
    t3 = rng.standard_normal((2 ** (n - 4), 32, 8)) + 1j * rng.standard_normal((2 ** (n - 4), 32, 8))
    wm = rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32))

    impls = [("numpy", numpy_impl)]
    if numba_impl is not None:
        impls.append(("numba", numba_impl))

    rows = []
    for label, mod in impls:
        rows.append((
            label,
            _time(lambda: mod.apply_1q(v, u2, n, n // 2), reps),
            _time(lambda: mod.apply_2q(v, u4, n, n // 2, n // 2 + 1), reps),
            _time(lambda: mod.mpo_step(t3, wm), reps),
        ))
    print(f"\nmicro-kernels at n = {n} ({reps} reps, seconds per call)")
    print(f"{'impl':8} {'apply_1q':>12} {'apply_2q':>12} {'mpo_step':>12}")
    for label, a, b, c in rows:
        print(f"{label:8} {a:12.3e} {b:12.3e} {c:12.3e}")
    if len(rows) == 2:
        print(f"{'speedup':8} {rows[0][1] / rows[1][1]:12.2f} "
              f"{rows[0][2] / rows[1][2]:12.2f} {rows[0][3] / rows[1][3]:12.2f}")


END_TO_END = """
import time
from qfair import build_qcnn, lipschitz_tn
model = build_qcnn({n}, rng_seed=7, noise=("depolarizing", 1e-2))
lipschitz_tn(build_qcnn(4, rng_seed=0, noise=("bit-flip", 1e-2)))  # warm-up
t0 = time.perf_counter()
rep = lipschitz_tn(model)
print(f"{{time.perf_counter() - t0:.3f}} {{rep.k_star:.9f}}")
"""


def end_to_end(n):
    print(f"\nend-to-end lipschitz_tn on a {n}-qubit noisy model")
    for backend in ("numpy", "numba"):
        env = dict(os.environ, QFAIR_KERNELS=backend)
        out = subprocess.run(
            [sys.executable, "-c", END_TO_END.format(n=n)],
            capture_output=True, text=True, env=env,
        )
        if out.returncode != 0:
            print(f"{backend:8} failed: {out.stderr.strip().splitlines()[-1]}")
            continue
        seconds, k_star = out.stdout.split()
        print(f"{backend:8} {float(seconds):8.3f}s   K* = {k_star}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--qubits", type=int, default=14)
    ap.add_argument("--reps", type=int, default=30)
    args = ap.parse_args()
    micro(args.qubits, args.reps)
    end_to_end(args.qubits)


if __name__ == "__main__":
    main()
