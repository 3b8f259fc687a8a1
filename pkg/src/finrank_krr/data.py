"""Targets in the eigenbasis, noisy label synthesis and target functionals.

Random draws use numpy's ``default_rng`` (PCG64 bit generator seeded through
``SeedSequence``). Inputs are drawn first, then the noise, so a dataset is a
pure function of (target, n, sigma2, seed). Trials derive their seed as
``seed + trial_index``.
"""

from __future__ import annotations

import dataclasses
import io
import math

import numpy as np

from .spectral import TWO_PI, SpectralKernel


@dataclasses.dataclass(frozen=True, eq=False)
class TargetSpec:
    """f(x) = gamma . psi(x) + gamma_plus * psi_{>M}(x)."""

    gamma: np.ndarray
    gamma_plus: float
    kernel: SpectralKernel
    note: str = ""

    def __post_init__(self):
        gamma = np.array(self.gamma, dtype=np.float64)
        if gamma.shape != (self.kernel.rank,):
            raise ValueError(f"gamma must have length {self.kernel.rank}, got {gamma.shape}")
        gamma.setflags(write=False)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "gamma_plus", float(self.gamma_plus))

    @property
    def consistent(self):
        """True when the target lies in the RKHS."""
        return self.gamma_plus == 0.0

    def __call__(self, x):
        return eval_target(self, x)

    def to_dict(self):
        return {"gamma": [float(g) for g in self.gamma], "gamma_plus": self.gamma_plus}

    @classmethod
    def from_dict(cls, spec, kernel):
        """Build from ``{"gamma": [...], "gamma_plus": v}`` or a named preset."""
        if "preset" in spec:
            return PRESETS[spec["preset"]](kernel)
        return cls(spec["gamma"], spec.get("gamma_plus", 0.0), kernel)

    @classmethod
    def from_legendre_coefficients(cls, kernel, raw):
        """Convert coefficients on raw P_k to the orthonormal basis.

        Degree M (one past the kernel's top degree) goes to the complement;
        anything higher is rejected.
        """
        if kernel.domain != "interval":
            raise ValueError("Legendre coefficients need an interval-domain kernel")
        raw = np.asarray(raw, dtype=np.float64)
        M = kernel.rank
        if raw.size > M + 1 and np.any(raw[M + 1:] != 0):
            raise ValueError(f"target has Legendre degree above {M}, not representable")
        padded = np.zeros(M + 1)
        padded[: min(raw.size, M + 1)] = raw[: M + 1]
        ortho = padded / np.sqrt(2.0 * np.arange(M + 1) + 1.0)
        note = "raw P_k coefficients c_k mapped to c_k / sqrt(2k+1)"
        return cls(ortho[:M], ortho[M], kernel, note=note)


def eval_target(target, x):
    basis = target.kernel.features_with_complement(x)
    out = target.gamma @ basis[:-1] + target.gamma_plus * basis[-1]
    return float(out[0]) if np.ndim(x) == 0 else out


def cos_target(kernel):
    """cos(t) = (1/sqrt 2) psi_2 on the circle."""
    if kernel.domain != "circle" or kernel.modes[1] != (1, 1):
        raise ValueError("cos target needs a circle kernel whose second mode is cos t")
    gamma = np.zeros(kernel.rank)
    if kernel.rank >= 2:
        return TargetSpec(_with(gamma, 1, 1 / np.sqrt(2)), 0.0, kernel)
    return TargetSpec(gamma, 1 / np.sqrt(2), kernel)


def square_target(kernel):
    """x^2 = P_0 / 3 + 2 P_2 / 3 on [-1, 1]."""
    return TargetSpec.from_legendre_coefficients(kernel, [1 / 3, 0.0, 2 / 3])


def _with(vec, i, value):
    vec = vec.copy()
    vec[i] = value
    return vec


PRESETS = {"cos": cos_target, "square": square_target}


@dataclasses.dataclass(frozen=True)
class TargetFunctionals:
    l2_norm_sq: float
    rkhs_norm_sq: float
    r_over: float
    r_under: float


def target_functionals(target):
    """L2 norm^2 of f, RKHS norm^2 of its in-span part, and max/min |gamma_k / lam_k|."""
    lam = target.kernel.eigenvalues
    g = target.gamma
    ratio = np.abs(g / lam)
    return TargetFunctionals(
        l2_norm_sq=float(g @ g + target.gamma_plus**2),
        rkhs_norm_sq=float(np.sum(g**2 / lam)),
        r_over=float(ratio.max()),
        r_under=float(ratio.min()),
    )


@dataclasses.dataclass(frozen=True, eq=False)
class Dataset:
    inputs: np.ndarray
    labels: np.ndarray
    noise_var: float
    seed: int

    @property
    def n(self):
        return self.inputs.size

    def to_csv(self, path=None):
        """x,y CSV with a comment header carrying seed and noise variance."""
        buf = io.StringIO()
        buf.write(f"# seed={self.seed}\n# noise_var={self.noise_var!r}\n")
        buf.write("x,y\n")
        for x, y in zip(self.inputs, self.labels):
            buf.write(f"{float(x)!r},{float(y)!r}\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def sample_inputs(kernel, n, rng):
    if kernel.domain == "circle":
        return rng.uniform(0.0, TWO_PI, size=n)
    return rng.uniform(-1.0, 1.0, size=n)


def sample_dataset(target, n, sigma2, seed):
    """Draw n inputs from rho and labels y = f(x) + eps, eps ~ N(0, sigma2)."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be at least 1")
    if sigma2 < 0 or not math.isfinite(sigma2):
        raise ValueError("sigma2 must be a finite non-negative number")
    rng = np.random.default_rng(int(seed))
    x = sample_inputs(target.kernel, n, rng)
    noise = math.sqrt(sigma2) * rng.standard_normal(n)
    y = eval_target(target, x) + noise
    for arr in (x, y):
        arr.setflags(write=False)
    return Dataset(x, y, float(sigma2), int(seed))
