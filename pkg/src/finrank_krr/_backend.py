"""Select the compiled core when it is importable, else the numpy fallback.

Set ``FINRANK_KRR_BACKEND=python`` to force the fallback.
"""

import os

import numpy as np

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("FINRANK_KRR_BACKEND", "").lower() != "python":
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback


def fourier_features(theta, freqs, kinds):
    theta = np.ascontiguousarray(theta, dtype=np.float64).ravel()
    freqs = np.ascontiguousarray(freqs, dtype=np.int64)
    kinds = np.ascontiguousarray(kinds, dtype=np.int32)
    return _impl.fourier_features(theta, freqs, kinds)


def legendre_features(x, n_degrees):
    x = np.ascontiguousarray(x, dtype=np.float64).ravel()
    return _impl.legendre_features(x, int(n_degrees))


def mercer_gram(feats_a, feats_b, eigenvalues):
    return _impl.mercer_gram(
        np.ascontiguousarray(feats_a, dtype=np.float64),
        np.ascontiguousarray(feats_b, dtype=np.float64),
        np.ascontiguousarray(eigenvalues, dtype=np.float64),
    )
