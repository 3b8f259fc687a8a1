"""Exact bias / variance of finite-rank KRR and the random matrices behind it.

For inputs X with feature matrix Psi (M x N) and complement row psi_+(X):

    Delta = Psi Psi^T / N - I            (fluctuation matrix, delta = ||Delta||_op)
    E     = Psi psi_+(X) / N             (error vector)
    B     = (I + Delta + lam Lambda^-1)^-1
    Pbar  = diag(lam_k / (lam_k + lam))

and, with w = lam Lambda^-1 gamma - gamma_+ E,

    bias     = gamma_+^2 + ||B w||^2
    variance = (sigma^2 / N) tr(B^2 (I + Delta)).

The oracles at the bottom recompute the same quantities along unrelated
paths. Bias comes from Parseval on the fitted coefficients or from dense
quadrature of (f - f_target)^2; variance from the N x N trace sigma^2 tr(R M R).
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy import linalg

from . import regressor
from .errors import OracleMisuseError, SingularityError
from .quadrature import domain_rule

RIDGELESS_SURROGATE = 1e-12


def opnorm(A):
    """Largest singular value."""
    A = np.atleast_2d(A)
    return float(np.linalg.norm(A, 2))


@dataclasses.dataclass(frozen=True, eq=False)
class FluctuationState:
    delta_matrix: np.ndarray
    delta_norm: float
    error_vector: np.ndarray
    b_matrix: np.ndarray
    pbar: np.ndarray
    eigenvalues: np.ndarray
    ridge: float
    n: int
    ridgeless_limit: bool = False

    @property
    def rank(self):
        return self.eigenvalues.size


def fluctuation_state(kernel, X, lam, ridgeless_limit=False):
    """Build Delta, E, B and Pbar for a sample.

    At ``lam == 0`` the matrix I + Delta must be invertible. With
    ``ridgeless_limit=True`` a near-singular I + Delta is handled by
    evaluating at lam = 1e-12 instead, flagged on the returned state.
    """
    lam = float(lam)
    if not lam >= 0:
        raise ValueError(f"ridge must be non-negative, got {lam}")
    basis = kernel.features_with_complement(X)
    psi, psi_plus = basis[:-1], basis[-1]
    N = psi.shape[1]
    M = psi.shape[0]
    eig = kernel.eigenvalues
    delta = psi @ psi.T / N - np.eye(M)
    delta = 0.5 * (delta + delta.T)
    E = psi @ psi_plus / N
    used_surrogate = False

    def _solve(ridge):
        A = np.eye(M) + delta + np.diag(ridge / eig)
        try:
            return linalg.solve(A, np.eye(M), assume_a="pos", check_finite=False)
        except linalg.LinAlgError:
            raise SingularityError("I + Delta + lam Lambda^-1 is singular") from None

    if lam == 0.0:
        smallest = np.linalg.eigvalsh(np.eye(M) + delta)[0]
        if smallest <= 1e-12:
            if not ridgeless_limit:
                raise SingularityError(
                    f"I + Delta is singular at lam=0 (min eigenvalue {smallest:.3g})"
                )
            lam = RIDGELESS_SURROGATE
            used_surrogate = True
    B = _solve(lam)
    B = 0.5 * (B + B.T)
    pbar = eig / (eig + lam)
    return FluctuationState(delta, opnorm(delta), E, B, pbar, eig, lam, N, used_surrogate)


def _w(state, target):
    return state.ridge * target.gamma / state.eigenvalues - target.gamma_plus * state.error_vector


def exact_bias(state, target):
    """gamma_+^2 + ||B (lam Lambda^-1 gamma - gamma_+ E)||^2."""
    Bw = state.b_matrix @ _w(state, target)
    return float(target.gamma_plus**2 + Bw @ Bw)


def exact_variance(state, sigma2):
    """(sigma^2 / N) tr(B^2 (I + Delta))."""
    B = state.b_matrix
    M = state.rank
    return float(sigma2 / state.n * np.trace(B @ B @ (np.eye(M) + state.delta_matrix)))


@dataclasses.dataclass(frozen=True)
class ErrorReport:
    bias: float
    variance: float
    test_error: float
    finite_rank_error: float
    fitting_error: float
    delta_norm: float
    error_vector_norm: float
    ridgeless_limit: bool = False

    def to_dict(self):
        return dataclasses.asdict(self)


def error_report(kernel, target, X, lam, sigma2, ridgeless_limit=False):
    state = fluctuation_state(kernel, X, lam, ridgeless_limit=ridgeless_limit)
    return report_from_state(state, target, sigma2)


def report_from_state(state, target, sigma2):
    bias = exact_bias(state, target)
    var = exact_variance(state, sigma2)
    finite = target.gamma_plus**2
    return ErrorReport(
        bias=bias,
        variance=var,
        test_error=bias + var,
        finite_rank_error=finite,
        fitting_error=bias - finite,
        delta_norm=state.delta_norm,
        error_vector_norm=float(np.linalg.norm(state.error_vector)),
        ridgeless_limit=state.ridgeless_limit,
    )


def b_neumann(state, order):
    """Truncated series sum_{s=0}^{order} (-Pbar Delta)^s Pbar."""
    order = int(order)
    if order < 0:
        raise ValueError("order must be >= 0")
    P = np.diag(state.pbar)
    step = -P @ state.delta_matrix
    term = P.copy()
    total = P.copy()
    for _ in range(order):
        term = step @ term
        total += term
    return total


def neumann_tail_norms(state, max_order=5):
    """||B - B^(n)||_op for n = 0..max_order."""
    return np.array([opnorm(state.b_matrix - b_neumann(state, n)) for n in range(max_order + 1)])


@dataclasses.dataclass(frozen=True)
class EffectiveDimensions:
    n_eff: float
    n_eff_sq: float


def effective_dimensions(kernel, lam):
    """N(lam) = tr Pbar and N2(lam) = tr Pbar^2."""
    eig = kernel.eigenvalues
    p = eig / (eig + lam)
    n_eff, n_eff_sq = float(p.sum()), float(p @ p)
    M = eig.size
    assert n_eff_sq <= n_eff * (1 + 1e-12) and n_eff <= M * (1 + 1e-12)
    return EffectiveDimensions(n_eff, n_eff_sq)


def p_delta(delta):
    return 5.0 + 4.0 * delta + 4.0 * delta**2


def bias_approximation(state, target):
    """Centre ||Pbar w||^2 + gamma_+^2 and radius of the deterministic bias bracket.

    Valid when delta < 1/2:
    |bias - centre| <= 2 delta ||Pbar w||^2 + ||w||^2 delta^2 p(delta).
    """
    w = _w(state, target)
    pw = state.pbar * w
    d = state.delta_norm
    centre = float(pw @ pw + target.gamma_plus**2)
    radius = float(2 * d * (pw @ pw) + (w @ w) * d**2 * p_delta(d))
    return centre, radius


def variance_approximation(state, sigma2):
    """Centre (sigma^2/N) N2(lam) and radius of the deterministic variance bracket."""
    n2 = float(state.pbar @ state.pbar)
    d = state.delta_norm
    scale = sigma2 / state.n
    centre = scale * n2
    radius = d * centre + state.rank * scale * (1 + d) * d**2 * p_delta(d)
    return centre, radius


def projection_matrices(state):
    """(P_{<=M}, P_{>M}) from B: I - lam B Lambda^-1 and B E."""
    M = state.rank
    p_le = np.eye(M) - state.ridge * state.b_matrix / state.eigenvalues[None, :]
    p_gt = state.b_matrix @ state.error_vector
    return p_le, p_gt


def projection_matrices_direct(kernel, X, lam):
    """(Lambda Psi R Psi^T, Lambda Psi R psi_+^T) with R = (K + lam N I)^-1."""
    basis = kernel.features_with_complement(X)
    psi = basis[:-1]
    N = psi.shape[1]
    A = kernel.gram_matrix(X) + lam * N * np.eye(N)
    # Lambda Psi R = (R Psi^T Lambda)^T, R symmetric
    lpr = linalg.solve(A, psi.T * kernel.eigenvalues[None, :], assume_a="pos").T
    return lpr @ psi.T, lpr @ basis[-1]


def _require_noiseless(fitted, target):
    ds = fitted.dataset
    clean = target(ds.inputs)
    if ds.noise_var != 0.0 or not np.allclose(ds.labels, clean, rtol=1e-12, atol=1e-14):
        raise OracleMisuseError("oracle needs a fit on noiseless labels y = f(X)")


def bias_parseval_oracle(fitted, target):
    """gamma_+^2 + ||c - gamma||^2 from the fitted basis coefficients."""
    _require_noiseless(fitted, target)
    diff = fitted.basis_coeffs - target.gamma
    return float(target.gamma_plus**2 + diff @ diff)


def variance_direct_oracle(kernel, X, lam, sigma2):
    """sigma^2 tr(R M R) with R = (K + lam N I)^-1 and M = Psi^T Lambda^2 Psi.

    Evaluated as sigma^2 ||R G||_F^2 with G = Psi^T Lambda (M = G G^T); a
    single solve keeps rounding in the null space of K from being amplified
    by 1 / (lam N) twice.
    """
    psi = kernel.features(X)
    N = psi.shape[1]
    A = kernel.gram_matrix(X) + lam * N * np.eye(N)
    G = psi.T * kernel.eigenvalues[None, :]
    RG = linalg.solve(A, G, assume_a="pos")
    return float(sigma2 * np.sum(RG * RG))


def quadrature_bias(fitted, target, n_nodes=100_000, chunk=10_000):
    """int (f_fit - f_target)^2 d rho by dense quadrature, dual-path predictions."""
    _require_noiseless(fitted, target)
    nodes, weights = domain_rule(fitted.kernel.domain, n_nodes)
    total = 0.0
    for start in range(0, nodes.size, chunk):
        z = nodes[start:start + chunk]
        diff = regressor.predict(fitted, z) - target(z)
        total += float(weights[start:start + chunk] @ diff**2)
    return total


def quadrature_test_error_oracle(fitted, target, sigma2, n_nodes=100_000):
    """Quadrature bias plus sigma^2 tr(R M R)."""
    bias = quadrature_bias(fitted, target, n_nodes)
    ds = fitted.dataset
    return bias + variance_direct_oracle(fitted.kernel, ds.inputs, fitted.ridge, sigma2)
