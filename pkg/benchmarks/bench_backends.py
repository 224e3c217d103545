"""Compiled versus pure-Python kernel timings.

Usage: python3 benchmarks/bench_backends.py [--repeat 5]
"""

import argparse
import time
import timeit

import numpy as np

from huckel_vqd import _pykernels, molgraph as G, pauli as P, solver as S
from huckel_vqd import simulator as sim
from huckel_vqd._backend import compiled_kernels


def _time(fn, repeat):
    n, _ = timeit.Timer(fn).autorange()
    return min(timeit.repeat(fn, number=n, repeat=repeat)) / n


def kernel_cases():
    rng = np.random.default_rng(0)
    for n, reps in ((2, 4), (3, 6), (6, 9)):
        a = sim.AnsatzSpec(n, reps)
        m = rng.normal(size=(a.dim, a.dim))
        m = (m + m.T) / 2
        th = rng.uniform(-3, 3, a.n_params)
        yield f"energy_grad n={n} reps={reps}", lambda k, a=a, th=th, m=m: k.energy_grad(
            a.n_qubits, a.reps, th, a.signs, m)
    a = sim.AnsatzSpec(2, 1)
    ops, ang = sim.ansatz_ops(a, rng.uniform(-3, 3, a.n_params))
    rops, rang, mask = sim.basis_rotation("XX")
    ops, ang = np.concatenate([ops, rops]), np.concatenate([ang, rang])
    yield "sample_circuit n=2 8192 shots", lambda k: k.sample_circuit(
        2, ops, ang, mask, 0.001, 0.01, 0.02, 8192, 1, 0, 0)


def solve_case(kernels, name="C6H6"):
    """Full ideal VQD spectrum with the given kernel module swapped in."""
    saved = S.kernels
    S.kernels = kernels
    try:
        hm = G.padded_solver_matrix(G.lookup(name))
        cfg = S.SolverConfig.default(hm.n_qubits, "ideal", 0, restarts=1)
        t0 = time.perf_counter()
        res = S.solve_matrix(hm, cfg)
        return time.perf_counter() - t0, res
    finally:
        S.kernels = saved


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if compiled_kernels is None:
        raise SystemExit("compiled kernels are not built; run pip install -e . --no-build-isolation")
    print(f"{'case':<32} {'compiled':>12} {'python':>12} {'speedup':>8}")
    for label, fn in kernel_cases():
        tc = _time(lambda: fn(compiled_kernels), args.repeat)
        tp = _time(lambda: fn(_pykernels), args.repeat)
        print(f"{label:<32} {tc * 1e6:10.1f}us {tp * 1e6:10.1f}us {tp / tc:7.1f}x")
    tc, rc = solve_case(compiled_kernels)
    tp, rp = solve_case(_pykernels)
    assert np.allclose(rc.energies, rp.energies, atol=1e-8)
    print(f"{'C6H6 ideal VQD, 1 restart':<32} {tc:11.2f}s {tp:11.2f}s {tp / tc:7.1f}x")
    h = P.frobenius_decompose(G.padded_solver_matrix(G.lookup("C60")))
    print(f"(C60: {len(h)} Pauli terms; ideal solves run on the dense deflated matrix)")


if __name__ == "__main__":
    main()
