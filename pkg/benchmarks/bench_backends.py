"""Time the compiled core against the numpy fallback on the hot kernels.

Run with ``python3 benchmarks/bench_backends.py [--repeat R]``. Both backends
are imported directly, so the script works whichever one is active.
"""

import argparse
import timeit

import numpy as np

from finrank_krr import _fallback
from finrank_krr.spectral import make_legendre, make_tntk

try:
    from finrank_krr import _core
except ImportError:  # extension not built
    _core = None


def cases(rng):
    tntk = make_tntk(7)
    freqs = np.array([m[0] for m in tntk.modes], dtype=np.int64)
    kinds = np.array([m[1] for m in tntk.modes], dtype=np.int32)
    theta = rng.uniform(0, 2 * np.pi, 2000)
    x = rng.uniform(-1, 1, 2000)
    feats = make_legendre(5).features(x[:400])
    eig = make_legendre(5).eigenvalues
    return {
        "fourier_features n=2000 M=7": lambda m: m.fourier_features(theta, freqs, kinds),
        "legendre_features n=2000 deg<16": lambda m: m.legendre_features(x, 16),
        "mercer_gram 400x400 M=5": lambda m: m.mercer_gram(feats, feats, eig),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'case':<36}{'numpy ms':>12}{'cython ms':>12}{'speedup':>10}")
    for name, fn in cases(rng).items():
        t_py = min(timeit.repeat(lambda: fn(_fallback), number=1, repeat=args.repeat)) * 1e3
        if _core is None:
            print(f"{name:<36}{t_py:>12.3f}{'n/a':>12}{'':>10}")
            continue
        np.testing.assert_allclose(fn(_core), fn(_fallback), rtol=1e-12, atol=1e-12)
        t_cy = min(timeit.repeat(lambda: fn(_core), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<36}{t_py:>12.3f}{t_cy:>12.3f}{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
