"""Self-check suite behind ``finrank-krr validate``.

Each check records a name, a tolerance, the worst observed value and a pass
flag. The helpers here are also what the acceptance tests drive, so the CLI
and the test-suite exercise the same code.
"""

from __future__ import annotations

import dataclasses
import json

import numpy as np

from . import __version__, _backend
from .data import TargetSpec, sample_dataset
from .exact import (
    bias_approximation,
    bias_parseval_oracle,
    exact_bias,
    exact_variance,
    fluctuation_state,
    neumann_tail_norms,
    projection_matrices,
    projection_matrices_direct,
    quadrature_test_error_oracle,
    variance_approximation,
    variance_direct_oracle,
)
from .quadrature import domain_rule
from .regressor import fit, primal_coeffs
from .spectral import LEGENDRE_SCALE, make_legendre, make_tntk, ntk_fourier_coefficient

N_CHOICES = (20, 50, 100, 200)
LAMBDA_CHOICES = (1e-6, 1e-3, 1e-1)
SIGMA2_CHOICES = (0.0, 0.05)
NEUMANN_ORDERS = 6


@dataclasses.dataclass
class Check:
    name: str
    tolerance: float
    observed: float
    passed: bool
    detail: str = ""

    def to_dict(self):
        return dataclasses.asdict(self)


def default_kernels():
    return [make_tntk(7), make_legendre(5)]


def random_target(kernel, rng):
    gamma = rng.standard_normal(kernel.rank)
    gamma_plus = 0.0 if rng.random() < 0.5 else float(rng.standard_normal())
    return TargetSpec(gamma, gamma_plus, kernel)


@dataclasses.dataclass(frozen=True)
class OracleComparison:
    kernel: str
    n: int
    lam: float
    sigma2: float
    bias: float
    bias_oracle: float
    variance: float
    variance_oracle: float
    test_error: float
    quadrature: float | None
    proj_le_err: float
    proj_gt_err: float
    primal_err: float

    @property
    def bias_err(self):
        return abs(self.bias - self.bias_oracle) / max(1.0, self.bias)

    @property
    def variance_err(self):
        return abs(self.variance - self.variance_oracle) / max(1.0, self.variance)

    @property
    def quadrature_err(self):
        if self.quadrature is None:
            return 0.0
        return abs(self.quadrature - self.test_error) / max(self.test_error, 1e-300)


def compare_paths(kernel, target, n, lam, sigma2, seed, quadrature=True, n_nodes=100_000):
    """Run every exact-error path on one noiseless sample."""
    ds = sample_dataset(target, n, 0.0, seed)
    state = fluctuation_state(kernel, ds.inputs, lam)
    fitted = fit(kernel, ds, lam)
    bias = exact_bias(state, target)
    var = exact_variance(state, sigma2)
    quad = quadrature_test_error_oracle(fitted, target, sigma2, n_nodes) if quadrature else None
    le, gt = projection_matrices(state)
    le_d, gt_d = projection_matrices_direct(kernel, ds.inputs, lam)
    primal = primal_coeffs(kernel, ds, lam)
    scale = max(1.0, float(np.abs(primal).max()))
    return OracleComparison(
        kernel=kernel.family,
        n=n,
        lam=lam,
        sigma2=sigma2,
        bias=bias,
        bias_oracle=bias_parseval_oracle(fitted, target),
        variance=var,
        variance_oracle=variance_direct_oracle(kernel, ds.inputs, lam, sigma2),
        test_error=bias + var,
        quadrature=quad,
        proj_le_err=float(np.abs(le - le_d).max()),
        proj_gt_err=float(np.abs(gt - gt_d).max()),
        primal_err=float(np.abs(primal - fitted.basis_coeffs).max() / scale),
    )


def random_comparisons(seed, count, kernels=None, quadrature=True, n_nodes=100_000):
    kernels = kernels or default_kernels()
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        kernel = kernels[i % len(kernels)]
        n = int(rng.choice(N_CHOICES))
        lam = float(rng.choice(LAMBDA_CHOICES))
        sigma2 = float(rng.choice(SIGMA2_CHOICES))
        target = random_target(kernel, rng)
        out.append(compare_paths(kernel, target, n, lam, sigma2, int(rng.integers(2**32)),
                                 quadrature=quadrature, n_nodes=n_nodes))
    return out


@dataclasses.dataclass(frozen=True)
class DeltaDraw:
    delta: float
    tail_norms: np.ndarray
    bias: float
    bias_centre: float
    bias_radius: float
    variance: float
    variance_centre: float
    variance_radius: float

    def neumann_violations(self):
        bound = 2.0 * self.delta ** (np.arange(self.tail_norms.size) + 1.0)
        return int(np.sum(self.tail_norms > bound))

    def bias_ok(self):
        return abs(self.bias - self.bias_centre) <= self.bias_radius * (1 + 1e-12) + 1e-15

    def variance_ok(self):
        return abs(self.variance - self.variance_centre) <= (
            self.variance_radius * (1 + 1e-12) + 1e-15)


def small_delta_draws(seed, count, kernels=None, n=200, sigma2=0.05, max_attempts=None):
    """Collect ``count`` samples whose fluctuation norm is below 1/2.

    Draws with delta >= 1/2 are skipped (the inequalities only apply below
    it); the number attempted is capped at ``max_attempts``.
    """
    kernels = kernels or default_kernels()
    rng = np.random.default_rng(seed)
    max_attempts = max_attempts or 10 * count
    draws = []
    attempts = 0
    while len(draws) < count and attempts < max_attempts:
        kernel = kernels[attempts % len(kernels)]
        attempts += 1
        lam = float(rng.choice(LAMBDA_CHOICES))
        target = random_target(kernel, rng)
        X = sample_dataset(target, n, 0.0, int(rng.integers(2**32))).inputs
        state = fluctuation_state(kernel, X, lam)
        if state.delta_norm >= 0.5:
            continue
        bc, br = bias_approximation(state, target)
        vc, vr = variance_approximation(state, sigma2)
        draws.append(DeltaDraw(
            delta=state.delta_norm,
            tail_norms=neumann_tail_norms(state, NEUMANN_ORDERS - 1),
            bias=exact_bias(state, target),
            bias_centre=bc,
            bias_radius=br,
            variance=exact_variance(state, sigma2),
            variance_centre=vc,
            variance_radius=vr,
        ))
    return draws


def spectrum_error(kernel):
    """Largest gap between stored eigenvalues and an independent derivation."""
    if kernel.family == "tntk":
        ref = np.array([ntk_fourier_coefficient(f) for f, _ in kernel.modes[:-1]])
    elif kernel.family == "legendre":
        ref = LEGENDRE_SCALE / (np.asarray(kernel.modes[:-1], dtype=float) + 1.0) ** 2
    else:
        return 0.0
    return float(np.abs(kernel.eigenvalues - ref).max())


def orthonormality_error(kernel, n_nodes=20_000):
    nodes, w = domain_rule(kernel.domain, n_nodes)
    phi = kernel.features_with_complement(nodes)
    gram = (phi * w) @ phi.T
    return float(np.abs(gram - np.eye(gram.shape[0])).max())


def _check(name, tol, observed, detail=""):
    return Check(name, tol, float(observed), bool(observed <= tol), detail)


def run_validation(seed=0, kernels=None, n_configs=40, n_draws=100):
    """Run the full suite; returns {"passed": bool, "checks": [...]}."""
    kernels = kernels or default_kernels()
    rng = np.random.default_rng(seed)
    checks = []
    for k in kernels:
        tag = f"{k.family}({k.rank})"
        checks.append(_check(f"orthonormality[{tag}]", 1e-8, orthonormality_error(k)))
        checks.append(_check(f"spectrum[{tag}]", 1e-8, spectrum_error(k)))
        X = np.sort(sample_dataset(TargetSpec(np.zeros(k.rank), 0.0, k), 64, 0.0,
                                   int(rng.integers(2**32))).inputs)
        G = k.gram_matrix(X)
        checks.append(_check(f"mercer_gram[{tag}]", 1e-12, np.abs(G - k.mercer_gram(X)).max(),
                             f"backend={_backend.BACKEND}"))
        checks.append(_check(f"psd[{tag}]", 1e-10, max(0.0, -np.linalg.eigvalsh(G)[0])))

    comps = random_comparisons(int(rng.integers(2**32)), n_configs, kernels)
    checks += [
        _check("oracle_bias", 1e-9, max(c.bias_err for c in comps)),
        _check("oracle_variance", 1e-10, max(c.variance_err for c in comps)),
        _check("oracle_quadrature", 1e-6, max(c.quadrature_err for c in comps)),
        _check("projection_le", 1e-10, max(c.proj_le_err for c in comps)),
        _check("projection_gt", 1e-10, max(c.proj_gt_err for c in comps)),
        _check("primal_dual_coeffs", 1e-8, max(c.primal_err for c in comps)),
    ]

    draws = small_delta_draws(int(rng.integers(2**32)), n_draws, kernels)
    checks.append(_check("small_delta_draws", 0, n_draws - len(draws),
                         f"{len(draws)} draws with delta < 1/2"))
    for order in range(NEUMANN_ORDERS):
        worst = max((d.tail_norms[order] / (2 * d.delta ** (order + 1)) for d in draws),
                    default=0.0)
        # observed is the worst ratio ||B - B^(n)|| / (2 delta^(n+1)); must stay below 1
        checks.append(_check(f"neumann_tail[n={order}]", 1.0, worst))
    checks.append(_check("bias_approximation_violations", 0,
                         sum(not d.bias_ok() for d in draws)))
    checks.append(_check("variance_approximation_violations", 0,
                         sum(not d.variance_ok() for d in draws)))
    return {
        "passed": all(c.passed for c in checks),
        "seed": int(seed),
        "backend": _backend.BACKEND,
        "version": __version__,
        "checks": [c.to_dict() for c in checks],
    }


def write_report(report, path):
    try:
        fh = open(path, "w", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write validation report {path}: {exc.strerror or exc}") from exc
    with fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
