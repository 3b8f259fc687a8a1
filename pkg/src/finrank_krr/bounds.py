"""High-probability bounds on KRR bias, variance and test error.

All bounds hold with probability at least 1 - 2/N over the sample. ``ell``
below is log(N)/N; ``sq`` is its square root. Residue terms carry the
constants C1 (bias) and C2 = 12 (variance) and can be switched off to match
the figure-style comparisons.

The eigenvalue playing the role of "lam_M" is the smallest eigenvalue and
"lam_1" the largest, so the formulas do not depend on how a kernel lists its
spectrum.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .data import target_functionals
from .errors import DivergenceError
from .exact import effective_dimensions

C2 = 12.0
C1_HEADROOM = 1.01
GENERAL, RIDGELESS, CONSISTENT = "general", "ridgeless", "consistent"


def _rates(n):
    n = int(n)
    if n < 3:
        raise ValueError(f"bounds need N >= 3, got {n}")
    ell = math.log(n) / n
    return ell, math.sqrt(ell)


def select_regime(target, lam):
    if target.consistent:
        return CONSISTENT
    if lam == 0.0:
        return RIDGELESS
    return GENERAL


def c1_constant(target, lam):
    """1.01 x [8 (lam r_over sqrt(M) + |gamma_+| / 2)^2 + 2.5 ||f||_L2^2]."""
    tf = target_functionals(target)
    M = target.kernel.rank
    core = 8.0 * (lam * tf.r_over * math.sqrt(M) + 0.5 * abs(target.gamma_plus)) ** 2
    return C1_HEADROOM * (core + 2.5 * tf.l2_norm_sq)


def refined_bias_bounds(target, n, lam, residue=True, regime=None):
    """(lower, upper) bias bounds.

    ``regime`` defaults to :func:`select_regime`: the consistent-case form
    when gamma_+ = 0, the ridgeless limit when lam = 0, otherwise the
    general form.
    """
    lam = float(lam)
    if lam < 0:
        raise ValueError("ridge must be non-negative")
    ell, sq = _rates(n)
    regime = regime or select_regime(target, lam)
    tf = target_functionals(target)
    eig = target.kernel.eigenvalues
    lam_min, lam_max = float(eig.min()), float(eig.max())
    g2 = target.gamma_plus**2
    h = tf.rkhs_norm_sq
    c1 = c1_constant(target, lam) if residue else 0.0
    low_factor = lam**2 * lam_min / (lam_min + lam) ** 2

    if regime == RIDGELESS:
        upper = g2 * (1 + ell) + 6 * g2 * ell**1.5
        lower = g2 * (1 - ell) - 6 * g2 * ell**1.5
    elif regime == CONSISTENT:
        upper = lam * h * (1 + 2 * sq) + c1 * ell
        lower = low_factor * h * (1 - 2 * sq) - c1 * ell
    elif regime == GENERAL:
        upper = g2 + lam * h + (0.25 * tf.l2_norm_sq + 2 * lam * h) * sq + c1 * ell
        lower = (
            g2
            + low_factor * h
            - (0.25 * tf.l2_norm_sq + 2 * lam**2 / (lam_max + lam) * h) * sq
            - c1 * ell
        )
    else:
        raise ValueError(f"unknown regime {regime!r}")
    return lower, upper


def refined_variance_bounds(kernel, n, lam, sigma2, residue=True, sharpen=False):
    """(lower, upper) variance bounds with C2 = 12.

    ``sharpen`` replaces M by N2(lam) in the upper bound's leading factor.
    """
    ell, sq = _rates(n)
    M = kernel.rank
    lam_min = kernel.lam_min
    c2 = C2 if residue else 0.0
    scale = sigma2 * M / n
    lead = sigma2 * effective_dimensions(kernel, lam).n_eff_sq / n if sharpen else scale
    upper = lead * (1 + sq) + c2 * scale * ell
    lower = (lam_min / (lam_min + lam)) ** 2 * scale * (1 - sq) - c2 * scale * ell
    return lower, upper


def test_error_bounds(target, n, lam, sigma2, residue=True, regime=None, sharpen=False):
    """Sum of the bias and variance bounds."""
    bl, bu = refined_bias_bounds(target, n, lam, residue, regime)
    vl, vu = refined_variance_bounds(target.kernel, n, lam, sigma2, residue, sharpen)
    return bl + vl, bu + vu


def enclosure_bounds(target, n, lam, sigma2):
    """Residue-free test-error bracket using exact spectral sums.

    Uses I = lam^2 sum gamma_k^2 / (lam_k + lam)^2 and N2(lam) in place of
    their RKHS-norm and M bounds:
        gamma_+^2 + I (1 +/- 2 sq) + (sigma^2 / N) N2(lam) (1 +/- sq),
    with the -/+ ||f||^2 sq / 4 term added when the target is inconsistent.
    """
    _, sq = _rates(n)
    eig = target.kernel.eigenvalues
    I = float(lam**2 * np.sum(target.gamma**2 / (eig + lam) ** 2))
    var = sigma2 / n * effective_dimensions(target.kernel, lam).n_eff_sq
    g2 = target.gamma_plus**2
    spread = 0.0 if target.consistent else 0.25 * target_functionals(target).l2_norm_sq * sq
    upper = g2 + I * (1 + 2 * sq) + spread + var * (1 + sq)
    lower = g2 + I * (1 - 2 * sq) - spread + var * (1 - sq)
    return lower, upper


@dataclasses.dataclass(frozen=True)
class BachBounds:
    bias_upper: float
    variance_upper: float
    min_n: float


def bach_bounds(target, n, lam, sigma2, tau=None):
    """Baseline bounds with R^2 = sum of eigenvalues; tau defaults to 2/N.

    Only stated for targets inside the RKHS; inconsistent targets get NaN.
    """
    lam = float(lam)
    if lam == 0.0:
        raise DivergenceError("Bach's bounds diverge at lam = 0")
    if lam < 0:
        raise ValueError("ridge must be non-negative")
    tau = 2.0 / n if tau is None else float(tau)
    if not 0 < tau < 1:
        raise ValueError("tau must lie in (0, 1)")
    if not target.consistent:
        return BachBounds(math.nan, math.nan, math.nan)
    r2 = target.kernel.trace
    h = target_functionals(target).rkhs_norm_sq
    bias = 4 * lam * h
    var = 8 * sigma2 * r2 / (lam * n) * (1 + 2 * math.log(2 / tau))
    min_n = 4 / 3 + r2 / (8 * lam) * math.log(14 * r2 / (lam * tau))
    return BachBounds(bias, var, min_n)


def rademacher_gap(n, tau, c):
    """(c / sqrt N) (1 + sqrt(log(1/tau) / 2) / 2)."""
    if c <= 0:
        raise ValueError("c must be positive")
    if not 0 < tau <= 1:
        raise ValueError("tau must lie in (0, 1]")
    return c / math.sqrt(n) * (1 + 0.5 * math.sqrt(math.log(1 / tau) / 2))


@dataclasses.dataclass(frozen=True)
class MinNRequirement:
    g: float
    bias_threshold: float
    bias_threshold_log: float
    variance_threshold: float
    relaxed_note: str


RELAXED_NOTE = (
    "desk-scale runs sit below the exponential sample-size threshold; replacing "
    "t = log(N)/2 by t = N^s, s in (0, 1/2), makes the requirement polynomial in M "
    "at the cost of an O(N^(s - 1/2)) rate"
)


def min_n_requirement(kernel, g=None):
    """Sample sizes above which the concentration step is guaranteed.

    ``g`` defaults to sup |psi_k|, a conservative sub-Gaussian constant for
    bounded eigenfunctions. The bias threshold exp(4 (12 G^2)^2 (M + 1)) is
    reported as +inf when it overflows; its natural log is always finite.
    """
    g = kernel.sup_basis if g is None else float(g)
    if g <= 0:
        raise ValueError("g must be positive")
    M = kernel.rank
    log_bias = 4 * (12 * g**2) ** 2 * (M + 1)
    bias_n = max(math.exp(log_bias) if log_bias < 700 else math.inf, 9.0)
    var_n = max((12 * g) ** 4 * (M + 1) ** 2, 9.0)
    return MinNRequirement(g, bias_n, max(log_bias, math.log(9.0)), var_n, RELAXED_NOTE)


@dataclasses.dataclass(frozen=True)
class BoundsReport:
    bias_upper: float
    bias_lower: float
    variance_upper: float
    variance_lower: float
    test_upper: float
    test_lower: float
    c1: float
    c2: float
    include_residue: bool
    bach_bias_upper: float
    bach_variance_upper: float
    bach_min_n: float
    rademacher_gap: float | None
    confidence: float
    regime: str
    clamped: tuple = ()

    def to_dict(self):
        out = dataclasses.asdict(self)
        out["clamped"] = list(self.clamped)
        return out


def bounds_report(target, n, lam, sigma2, residue=True, regime=None, sharpen=False,
                  rademacher_c=None, clamp=False):
    """Evaluate every bound for one (target, N, lam, sigma2).

    With ``clamp=True`` negative lower bounds are raised to 0 and the clamped
    field names are listed in ``clamped``.
    """
    regime = regime or select_regime(target, lam)
    bl, bu = refined_bias_bounds(target, n, lam, residue, regime)
    vl, vu = refined_variance_bounds(target.kernel, n, lam, sigma2, residue, sharpen)
    clamped = []
    if clamp:
        if bl < 0:
            bl = 0.0
            clamped.append("bias_lower")
        if vl < 0:
            vl = 0.0
            clamped.append("variance_lower")
    if lam > 0:
        bach = bach_bounds(target, n, lam, sigma2)
    else:
        bach = BachBounds(math.inf, math.inf, math.inf)
    rad = None if rademacher_c is None else rademacher_gap(n, 2.0 / n, rademacher_c)
    return BoundsReport(
        bias_upper=bu,
        bias_lower=bl,
        variance_upper=vu,
        variance_lower=vl,
        test_upper=bu + vu,
        test_lower=bl + vl,
        c1=c1_constant(target, lam) if residue else 0.0,
        c2=C2 if residue else 0.0,
        include_residue=residue,
        bach_bias_upper=bach.bias_upper,
        bach_variance_upper=bach.variance_upper,
        bach_min_n=bach.min_n,
        rademacher_gap=rad,
        confidence=1.0 - 2.0 / n,
        regime=regime,
        clamped=tuple(clamped),
    )


# keep pytest from collecting the public function when it is imported by name
test_error_bounds.__test__ = False
