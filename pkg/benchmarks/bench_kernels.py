"""Compare the numba and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel runs on a random complex matrix over a few region layouts.  The
numba kernels are compiled before timing starts.
"""

import argparse
import time

import numpy as np

from condstate import _kernels

CASES = [
    ((2, 2, 2), (False, True, False), (2, 0, 1)),
    ((2, 3, 2, 3), (True, False, True, False), (3, 1, 0, 2)),
    ((4, 4, 4), (False, False, True), (1, 2, 0)),
    ((2,) * 7, (True, False) * 3 + (True,), (6, 5, 4, 3, 2, 1, 0)),
]


def _time(fn, repeat):
    fn()
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    _kernels.warmup()
    g = np.random.default_rng(args.seed)
    print(f"{'kernel':<11}{'dims':<18}{'numpy (us)':>12}{'numba (us)':>12}{'speedup':>9}")
    for dims, mask, perm in CASES:
        n = int(np.prod(dims))
        m = g.standard_normal((n, n)) + 1j * g.standard_normal((n, n))
        calls = {
            "ptrace": lambda: _kernels.ptrace(m, dims, mask),
            "ptranspose": lambda: _kernels.ptranspose(m, dims, mask),
            "permute": lambda: _kernels.permute(m, dims, perm),
        }
        for name, fn in calls.items():
            times = {}
            for be in ("numpy", "numba"):
                prev = _kernels.set_backend(be)
                try:
                    times[be] = _time(fn, args.repeat)
                finally:
                    _kernels.set_backend(prev)
            _kernels.set_backend("numpy")
            ref = fn()
            _kernels.set_backend("numba")
            assert np.allclose(ref, fn()), f"{name} backends disagree on {dims}"
            print(
                f"{name:<11}{str(dims):<18}{times['numpy'] * 1e6:>12.1f}{times['numba'] * 1e6:>12.1f}"
                f"{times['numpy'] / times['numba']:>8.2f}x"
            )


if __name__ == "__main__":
    main()
