"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--samples 90000] [--repeat 5]

Numba timings exclude the first (compiling) call. Results are checked for
agreement before anything is timed.
"""
import argparse
import time

import numpy as np

from pimcancel._accel import HAVE_NUMBA
from pimcancel.basis import ModelKind, ModelSpec, delay_arrays, enumerate_basis, lookahead, history
from pimcancel.kernels import get_backend
from pimcancel.rng import SplitMix64


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(mod, n, s1, s2, y, arrays, theta, terms):
    da, db, dc = arrays
    a = mod.data_matrix(s1, s2, da, db, dc, 0, n)
    a8 = np.ascontiguousarray(a[:, :8])
    lat = lookahead(terms)
    width = lat + history(terms) + 1

    def stream():
        b1, b2, yb = np.zeros(width, complex), np.zeros(width, complex), np.zeros(lat + 1, complex)
        count = 0
        for lo in range(0, n, 4096):
            _, count = mod.stream_cancel(s1[lo:lo + 4096], s2[lo:lo + 4096], y[lo:lo + 4096], da, db, dc, theta,
                                         b1, b2, yb, count, lat)

    z8 = np.zeros(8, complex)
    return {
        f"data_matrix ({n} x {len(terms)})": lambda: mod.data_matrix(s1, s2, da, db, dc, 0, n),
        f"rls ({n} x 8)": lambda: mod.rls(a8, y, 0.999, 1e-6, z8, 1e6, False),
        f"lms ({n} x 8)": lambda: mod.lms(a8, y, 1e-3, z8, 1e6, False),
        f"stream_cancel ({n}, {len(terms)} terms)": stream,
    }


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--samples", type=int, default=90000)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    n = args.samples
    r = SplitMix64(1)
    s1, s2, y = r.complex_normal(n), r.complex_normal(n), r.complex_normal(n)
    terms = enumerate_basis(ModelSpec(ModelKind.TX_MEMORY, 3, 4, 1, 1))
    arrays = delay_arrays(terms)
    theta = r.complex_normal(len(terms)) * 0.01

    np_cases = cases(get_backend("numpy"), n, s1, s2, y, arrays, theta, terms)
    nb_cases = cases(get_backend("numba"), n, s1, s2, y, arrays, theta, terms)
    ref = np_cases[next(iter(np_cases))]()
    got = nb_cases[next(iter(nb_cases))]()
    assert np.allclose(ref, got, rtol=1e-14, atol=0), "backends disagree"

    print(f"{'kernel':40s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s}")
    for name in np_cases:
        nb_cases[name]()  # compile
        t_np = best_of(np_cases[name], args.repeat)
        t_nb = best_of(nb_cases[name], args.repeat)
        print(f"{name:40s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
