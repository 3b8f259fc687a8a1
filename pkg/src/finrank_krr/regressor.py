"""Kernel ridge regression through the N x N dual system.

fit solves (K + lam N I) alpha = y; the fitted function is
f(x) = alpha^T K_x and, because K has rank M, also f(x) = c^T psi(x) with
c = Lambda Psi alpha.
"""

from __future__ import annotations

import dataclasses
import warnings

import numpy as np
from scipy import linalg

from .errors import ConditioningWarning, IllPosedError

MAX_N = 4096
COND_WARN = 1e12


@dataclasses.dataclass(frozen=True, eq=False)
class FittedKRR:
    ridge: float
    dual_weights: np.ndarray
    basis_coeffs: np.ndarray
    kernel: object
    dataset: object
    condition: float
    min_norm: bool = False

    def predict(self, x):
        return predict(self, x)


def dual_condition_number(kernel, X, lam):
    """Exact 2-norm condition number of K + lam N I.

    The nonzero spectrum of K = Psi^T Lambda Psi equals that of the M x M
    matrix Lambda^1/2 Psi Psi^T Lambda^1/2, so this costs O(N M^2).
    """
    psi = kernel.features(X)
    N = psi.shape[1]
    s = np.sqrt(kernel.eigenvalues)
    small = (s[:, None] * psi) @ (psi.T * s[None, :])
    mu = np.linalg.eigvalsh(small)
    mu = np.clip(mu, 0.0, None)[::-1]
    shift = lam * N
    top = mu[0] + shift
    # K has N - M zero eigenvalues when N > M, else its spectrum is mu[:N]
    bottom = shift if N > mu.size else mu[N - 1] + shift
    if bottom <= 1e-14 * top:
        return np.inf
    return float(top / bottom)


def fit(kernel, dataset, lam, min_norm=False):
    """Fit KRR with ridge ``lam``.

    Parameters
    ----------
    kernel : SpectralKernel
    dataset : Dataset
    lam : float
        Ridge, >= 0. At ``lam == 0`` the system is only solvable when K is
        nonsingular; otherwise pass ``min_norm=True`` for the minimum-norm
        interpolant (least squares via pseudo-inverse).
    min_norm : bool

    Returns
    -------
    FittedKRR
    """
    lam = float(lam)
    if not lam >= 0.0:
        raise ValueError(f"ridge must be non-negative, got {lam}")
    X, y = dataset.inputs, np.asarray(dataset.labels, dtype=np.float64)
    N = X.size
    if N > MAX_N:
        raise ValueError(f"N={N} exceeds the dense budget of {MAX_N}")
    K = kernel.gram_matrix(X)
    cond = dual_condition_number(kernel, X, lam)
    used_min_norm = False
    if lam == 0.0 and not np.isfinite(cond):
        if not min_norm:
            raise IllPosedError(
                f"lam=0 with rank-deficient K (N={N} > rank); pass min_norm=True"
            )
        alpha, *_ = linalg.lstsq(K, y, cond=1e-12)
        used_min_norm = True
    else:
        if cond > COND_WARN:
            warnings.warn(f"dual system condition number {cond:.3g} > 1e12", ConditioningWarning,
                          stacklevel=2)
        A = K + lam * N * np.eye(N)
        try:
            alpha = linalg.solve(A, y, assume_a="pos", check_finite=False)
        except linalg.LinAlgError:
            alpha = linalg.solve(A, y, assume_a="sym", check_finite=False)
    coeffs = kernel.eigenvalues * (kernel.features(X) @ alpha)
    alpha.setflags(write=False)
    coeffs.setflags(write=False)
    return FittedKRR(lam, alpha, coeffs, kernel, dataset, cond, used_min_norm)


def predict(fitted, x):
    """Dual-path prediction alpha^T K_x."""
    scalar = np.ndim(x) == 0
    kx = fitted.kernel.cross_gram(fitted.dataset.inputs, np.atleast_1d(x))
    out = fitted.dual_weights @ kx
    return float(out[0]) if scalar else out


def predict_basis(fitted, x):
    """Basis-coefficient prediction c^T psi(x)."""
    scalar = np.ndim(x) == 0
    out = fitted.basis_coeffs @ fitted.kernel.features(np.atleast_1d(x))
    return float(out[0]) if scalar else out


def train_error(fitted):
    """Mean squared residual on the training sample."""
    ds = fitted.dataset
    resid = predict(fitted, ds.inputs) - ds.labels
    return float(np.mean(resid**2))


def dual_residual(fitted):
    """||(K + lam N I) alpha - y|| / ||y||, for checking the solve."""
    ds = fitted.dataset
    K = fitted.kernel.gram_matrix(ds.inputs)
    r = K @ fitted.dual_weights + fitted.ridge * ds.n * fitted.dual_weights - ds.labels
    ny = np.linalg.norm(ds.labels)
    return float(np.linalg.norm(r) / ny) if ny > 0 else float(np.linalg.norm(r))


def primal_coeffs(kernel, dataset, lam):
    """Minimise the KRR objective directly over basis coefficients.

    With f = c^T psi, ||f||_H^2 = c^T Lambda^-1 c and the objective
    (1/N) ||Psi^T c - y||^2 + lam c^T Lambda^-1 c has normal equations
    (Psi Psi^T / N + lam Lambda^-1) c = Psi y / N. Independent of the dual
    solve; used as a test oracle.
    """
    psi = kernel.features(dataset.inputs)
    N = psi.shape[1]
    H = psi @ psi.T / N + lam * np.diag(1.0 / kernel.eigenvalues)
    return linalg.solve(H, psi @ dataset.labels / N, assume_a="sym")
