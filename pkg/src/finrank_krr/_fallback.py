"""Pure-numpy versions of the kernels in ``_core.pyx``."""

import numpy as np

_SQRT2 = np.sqrt(2.0)


def fourier_features(theta, freqs, kinds):
    theta = np.asarray(theta, dtype=np.float64)
    freqs = np.asarray(freqs, dtype=np.float64)
    kinds = np.asarray(kinds)
    arg = np.outer(freqs, theta)
    out = np.where((kinds == 1)[:, None], _SQRT2 * np.cos(arg), _SQRT2 * np.sin(arg))
    out[kinds == 0] = 1.0
    return out


def legendre_features(x, n_degrees):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty((n_degrees, x.size))
    if n_degrees == 0:
        return out
    p_prev = np.ones_like(x)
    out[0] = p_prev
    if n_degrees == 1:
        return out
    p_cur = x.copy()
    out[1] = np.sqrt(3.0) * p_cur
    for k in range(1, n_degrees - 1):
        p_next = ((2 * k + 1) * x * p_cur - k * p_prev) / (k + 1)
        out[k + 1] = np.sqrt(2.0 * (k + 1) + 1.0) * p_next
        p_prev, p_cur = p_cur, p_next
    return out


def mercer_gram(feats_a, feats_b, eigenvalues):
    return np.einsum("k,ki,kj->ij", eigenvalues, feats_a, feats_b, optimize=False)
