"""Quadrature rules normalised to the sampling distribution (weights sum to 1)."""

import numpy as np

TWO_PI = 2.0 * np.pi


def circle_rule(n_nodes=100_000):
    """Periodic trapezoid rule for the uniform distribution on [0, 2 pi).

    Exact for trigonometric polynomials of degree below ``n_nodes``.
    """
    nodes = TWO_PI * np.arange(n_nodes) / n_nodes
    weights = np.full(n_nodes, 1.0 / n_nodes)
    return nodes, weights


def interval_rule(n_nodes=100_000, order=50):
    """Composite Gauss-Legendre rule for the uniform distribution on [-1, 1].

    ``n_nodes`` is rounded up to a multiple of ``order``; each panel is exact
    for polynomials of degree ``2 * order - 1``.
    """
    n_panels = max(1, -(-n_nodes // order))
    ref_x, ref_w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(-1.0, 1.0, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * ref_x[None, :]).ravel()
    # rho = dx / 2 on [-1, 1]
    weights = (0.5 * half[:, None] * ref_w[None, :]).ravel()
    return nodes, weights


def domain_rule(domain, n_nodes=100_000):
    if domain == "circle":
        return circle_rule(n_nodes)
    if domain == "interval":
        return interval_rule(n_nodes)
    raise ValueError(f"no quadrature rule for domain {domain!r}")
