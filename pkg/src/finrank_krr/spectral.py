"""Finite-rank Mercer kernels given by a spectrum and an orthonormal basis.

A rank-M kernel is stored as its eigenvalues together with a description of
the eigenfunctions psi_1..psi_M, which are orthonormal in L2(rho), plus one
extra unit-norm function orthogonal to all of them (the complement) that
carries the part of a target lying outside the RKHS.

Two families are built in:

* ``tntk``: the closed-form NTK on the circle, K(t, t') =
  cos(t - t') (pi - |t - t'|) / (2 pi), truncated to its first M Fourier
  modes, with rho uniform on [0, 2 pi).
* ``legendre``: sum_k lam_k sqrt(2k+1) P_k(x) sqrt(2k+1) P_k(z) with
  lam_k = (3 / pi^2) (k + 1)^-2, rho uniform on [-1, 1].

Feature matrices follow the ``Psi`` convention: shape (M, n_points).
"""

from __future__ import annotations

import dataclasses
from functools import lru_cache

import numpy as np
from scipy.integrate import simpson

from . import _backend
from .errors import DomainError, RankBudgetError

TWO_PI = 2.0 * np.pi
PI2 = np.pi**2

# (frequency, kind) in table order; kind 0 = constant, 1 = cos, 2 = sin.
# Odd frequencies >= 3 have zero NTK eigenvalue and are skipped.
NTK_TABLE_EIGENVALUES = (
    1.0 / PI2,
    1.0 / 8.0,
    1.0 / 8.0,
    5.0 / (9.0 * PI2),
    5.0 / (9.0 * PI2),
    17.0 / (225.0 * PI2),
    17.0 / (225.0 * PI2),
)
TNTK_MAX_RANK = 64
NTK_QUADRATURE_NODES = 20_001
LEGENDRE_SCALE = 3.0 / PI2


def ntk_closed_form(theta, theta2):
    """Infinite-rank NTK on the circle, cos(d) (pi - d) / (2 pi).

    ``d`` is the geodesic distance between the angles, folded into [0, pi].
    """
    d = np.mod(np.asarray(theta, dtype=float) - np.asarray(theta2, dtype=float), TWO_PI)
    d = np.minimum(d, TWO_PI - d)
    out = np.cos(d) * (np.pi - d) / TWO_PI
    return float(out) if np.ndim(out) == 0 else out


def ntk_fourier_coefficient(freq, n_nodes=NTK_QUADRATURE_NODES):
    """Eigenvalue of the NTK for the (sqrt 2) cos / sin mode of ``freq``.

    Computed as (1/pi) int_0^pi K(d) cos(freq d) dd with composite Simpson on
    ``n_nodes`` points; K is smooth on [0, pi] so the rule converges at h^4.
    """
    d = np.linspace(0.0, np.pi, n_nodes)
    integrand = ntk_closed_form(d, 0.0) * np.cos(freq * d)
    return float(simpson(integrand, x=d) / np.pi)


def _tntk_modes(rank):
    modes = [(0, 0)]
    freq = 1
    while len(modes) < rank:
        modes.append((freq, 1))
        modes.append((freq, 2))
        freq = 2 if freq == 1 else freq + 2
    return modes[:rank]


@lru_cache(maxsize=None)
def _tntk_spectrum(rank):
    modes = _tntk_modes(rank + 1)
    quad = np.array([ntk_fourier_coefficient(f) for f, _ in modes[:rank]])
    n_table = min(rank, len(NTK_TABLE_EIGENVALUES))
    table = np.array(NTK_TABLE_EIGENVALUES[:n_table])
    if np.max(np.abs(quad[:n_table] - table)) > 1e-8:
        raise RuntimeError("NTK quadrature disagrees with the tabulated eigenvalues")
    eig = np.concatenate([table, quad[n_table:]])
    if np.any(np.diff(eig[1:]) > 1e-15) or np.any(eig <= 0):
        raise RuntimeError("NTK eigenvalues beyond the table are not positive and monotone")
    return eig, tuple(modes)


@dataclasses.dataclass(frozen=True, eq=False)
class SpectralKernel:
    """Rank-M Mercer kernel.

    Parameters
    ----------
    family : {"tntk", "legendre", "custom"}
    domain : {"circle", "interval"}
        ``circle`` is [0, 2 pi] with uniform rho; ``interval`` is [-1, 1]
        with uniform rho.
    eigenvalues : ndarray, shape (M,)
        Strictly positive.
    modes : tuple
        M + 1 basis descriptors; the last one is the complement. For the
        circle each entry is ``(frequency, kind)``; for the interval it is
        the Legendre degree.
    """

    family: str
    domain: str
    eigenvalues: np.ndarray
    modes: tuple

    def __post_init__(self):
        eig = np.array(self.eigenvalues, dtype=np.float64)
        if eig.ndim != 1 or eig.size == 0:
            raise ValueError("eigenvalues must be a non-empty vector")
        if not np.all(np.isfinite(eig)) or np.any(eig <= 0):
            raise ValueError("eigenvalues must be finite and strictly positive")
        if len(self.modes) != eig.size + 1:
            raise ValueError("need one basis mode per eigenvalue plus the complement")
        if self.domain not in ("circle", "interval"):
            raise ValueError(f"unknown domain {self.domain!r}")
        eig.setflags(write=False)
        object.__setattr__(self, "eigenvalues", eig)
        object.__setattr__(self, "modes", tuple(self.modes))

    @property
    def rank(self):
        return self.eigenvalues.size

    @property
    def trace(self):
        """Sum of eigenvalues, i.e. the average of K(x, x) under rho."""
        return float(self.eigenvalues.sum())

    @property
    def lam_max(self):
        return float(self.eigenvalues.max())

    @property
    def lam_min(self):
        return float(self.eigenvalues.min())

    @property
    def sup_basis(self):
        """sup_x max_k |psi_k(x)| over the M eigenfunctions."""
        if self.domain == "circle":
            return 1.0 if self.rank == 1 else float(np.sqrt(2.0))
        return float(np.sqrt(2.0 * max(self.modes[:-1]) + 1.0))

    def check_domain(self, x):
        x = np.asarray(x, dtype=np.float64)
        lo, hi = (0.0, TWO_PI) if self.domain == "circle" else (-1.0, 1.0)
        if not np.all(np.isfinite(x)) or np.any(x < lo) or np.any(x > hi):
            raise DomainError(f"points outside [{lo:g}, {hi:g}] for {self.domain} domain")
        return x

    def _basis(self, x):
        x = np.atleast_1d(self.check_domain(x)).ravel()
        if self.domain == "circle":
            freqs = [m[0] for m in self.modes]
            kinds = [m[1] for m in self.modes]
            return _backend.fourier_features(x, freqs, kinds)
        degrees = np.asarray(self.modes)
        full = _backend.legendre_features(x, int(degrees.max()) + 1)
        return full[degrees]

    def features(self, x):
        """Psi = [psi_k(x_i)], shape (M, n)."""
        return self._basis(x)[:-1]

    def complement(self, x):
        """psi_{>M}(x_i), shape (n,)."""
        return self._basis(x)[-1]

    def features_with_complement(self, x):
        """Stacked (M + 1, n) matrix; last row is the complement."""
        return self._basis(x)

    def eval_features(self, x):
        """psi(x) for a single point, shape (M,)."""
        if np.ndim(x) != 0:
            raise ValueError("eval_features takes a single point")
        return self.features(x)[:, 0]

    def eval_kernel(self, x, x2):
        fa = self.features(x)
        fb = self.features(x2)
        return float(np.dot(self.eigenvalues * fa[:, 0], fb[:, 0]))

    def gram_matrix(self, X):
        """K = Psi^T Lambda Psi, shape (n, n)."""
        psi = self.features(X)
        K = (psi.T * self.eigenvalues) @ psi
        return 0.5 * (K + K.T)

    def cross_gram(self, X, Z):
        """K[i, j] = K(x_i, z_j)."""
        return (self.features(X).T * self.eigenvalues) @ self.features(Z)

    def mercer_gram(self, X, Z=None):
        """Gram matrix by explicit Mercer sums (compiled core when available)."""
        fa = self.features(X)
        fb = fa if Z is None else self.features(Z)
        return _backend.mercer_gram(fa, fb, self.eigenvalues)

    def to_dict(self):
        out = {"family": self.family, "rank": self.rank,
               "eigenvalues": [float(v) for v in self.eigenvalues]}
        if self.family == "custom":
            out["basis"] = "fourier" if self.domain == "circle" else "legendre"
        return out

    @classmethod
    def from_dict(cls, spec):
        family = spec["family"]
        if family == "tntk":
            kernel = make_tntk(int(spec["rank"]))
        elif family == "legendre":
            kernel = make_legendre(int(spec["rank"]))
        elif family == "custom":
            return make_custom(spec["eigenvalues"], spec.get("basis", "fourier"))
        else:
            raise ValueError(f"unknown kernel family {family!r}")
        if "eigenvalues" in spec and not np.allclose(
            spec["eigenvalues"], kernel.eigenvalues, rtol=1e-12, atol=0.0
        ):
            raise ValueError(f"eigenvalues in descriptor do not match the {family} family")
        return kernel


def make_tntk(M):
    """Rank-M truncation of the circle NTK.

    The first seven eigenvalues are the exact tabulated values; later ones
    come from Fourier quadrature of the closed form. Equal eigenvalues list
    the cos mode before the sin mode.
    """
    M = int(M)
    if M < 1:
        raise ValueError("rank must be at least 1")
    if M > TNTK_MAX_RANK:
        raise RankBudgetError(f"tNTK implemented up to rank {TNTK_MAX_RANK}, got {M}")
    eig, modes = _tntk_spectrum(M)
    return SpectralKernel("tntk", "circle", eig, modes)


def make_legendre(M):
    """Legendre kernel of rank M (degrees 0..M-1); complement is degree M."""
    M = int(M)
    if M < 1:
        raise ValueError("rank must be at least 1")
    k = np.arange(M)
    eig = LEGENDRE_SCALE / (k + 1.0) ** 2
    return SpectralKernel("legendre", "interval", eig, tuple(range(M + 1)))


def make_custom(eigenvalues, basis="fourier"):
    """User spectrum over the standard Fourier or Legendre basis.

    The Fourier basis is 1, cos t, sin t, cos 2t, sin 2t, ... in that order.
    """
    eig = np.asarray(eigenvalues, dtype=np.float64)
    M = eig.size
    if basis == "fourier":
        modes = [(0, 0)]
        freq = 1
        while len(modes) < M + 1:
            modes += [(freq, 1), (freq, 2)]
            freq += 1
        return SpectralKernel("custom", "circle", eig, tuple(modes[: M + 1]))
    if basis == "legendre":
        return SpectralKernel("custom", "interval", eig, tuple(range(M + 1)))
    raise ValueError(f"unknown basis {basis!r}")
