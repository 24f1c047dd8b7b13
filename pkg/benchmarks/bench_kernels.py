"""Timing comparison of the compiled and pure-numpy kernel paths.

Runs the operator-assembly and RDM-contraction kernels through both
implementations on identical inputs and prints a table of per-call times.
The compiled path is warmed first so jit compilation does not pollute the
numbers.  Agreement between the two paths is asserted on every case; a
benchmark that silently compares different answers is worthless.

Usage:
    python3 benchmarks/bench_kernels.py [--repeats 5] [--heavy]
"""

import argparse
import time

import numpy as np

from bosonlab import HAS_NUMBA, enumerate_basis
from bosonlab._kernels import (
    _mbody_matrix_jit,
    _mbody_matrix_py,
    _rdm_matrix_jit,
    _rdm_matrix_py,
    decode_digits,
)

CASES = [
    # (d, N, order) for the m-body assembly kernel
    (2, 24, 2),
    (2, 48, 2),
    (2, 24, 3),
    (3, 12, 2),
]

HEAVY_CASES = [
    (2, 96, 2),
    (2, 48, 3),
    (3, 16, 3),
    (4, 10, 2),
]


def _random_hermitian(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return np.ascontiguousarray((g + g.conj().T) / 2)


def _time(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def bench_case(d, n, order, repeats, rng):
    basis = enumerate_basis(d, n)
    shared = (
        basis.vectors,
        basis.keys_ascending,
        basis.positions_ascending,
        np.int64(n + 1),
    )
    rows = []

    vmat = _random_hermitian(rng, d**order)
    args = shared + (vmat, decode_digits(d, order), 1.0)
    t_py, out_py = _time(_mbody_matrix_py, args, repeats)
    t_jit, out_jit = _time(_mbody_matrix_jit, args, repeats)
    np.testing.assert_allclose(out_jit, out_py, atol=1e-12)
    rows.append((f"mbody d={d} N={n} m={order} (dim {basis.size})", t_py, t_jit))

    amps = rng.standard_normal(basis.size) + 1j * rng.standard_normal(basis.size)
    amps /= np.linalg.norm(amps)
    digits = np.ascontiguousarray(np.sort(decode_digits(d, order), axis=1))
    args = shared + (np.ascontiguousarray(amps), digits, 1.0)
    t_py, out_py = _time(_rdm_matrix_py, args, repeats)
    t_jit, out_jit = _time(_rdm_matrix_jit, args, repeats)
    np.testing.assert_allclose(out_jit, out_py, atol=1e-12)
    rows.append((f"rdm   d={d} N={n} k={order} (dim {basis.size})", t_py, t_jit))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="timed repeats, best-of")
    parser.add_argument("--heavy", action="store_true", help="add larger cases")
    args = parser.parse_args()

    if not HAS_NUMBA:
        print("numba is not installed; both columns would time the same code")
        return

    rng = np.random.default_rng(0)
    cases = CASES + (HEAVY_CASES if args.heavy else [])

    # trigger compilation outside the timed region
    bench_case(2, 6, 2, 1, rng)

    print(f"{'case':<34} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for d, n, order in cases:
        for label, t_py, t_jit in bench_case(d, n, order, args.repeats, rng):
            print(f"{label:<34} {t_py * 1e3:>8.2f}ms {t_jit * 1e3:>8.2f}ms {t_py / t_jit:>7.1f}x")


if __name__ == "__main__":
    main()
