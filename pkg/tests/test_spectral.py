import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finrank_krr import DomainError, RankBudgetError, SpectralKernel, make_custom, make_legendre, make_tntk
from finrank_krr.quadrature import circle_rule, domain_rule, interval_rule
from finrank_krr.spectral import ntk_closed_form, ntk_fourier_coefficient
from finrank_krr.validation import orthonormality_error

PI2 = math.pi**2


class TestNTKSpectrum:
    def test_leading_values(self, tntk7):
        eig = tntk7.eigenvalues
        assert eig[0] == pytest.approx(1 / PI2, rel=1e-15)
        assert eig[0] == pytest.approx(0.10132, abs=5e-6)
        assert eig[1] == eig[2] == 0.125

    def test_table_reproduced_by_quadrature(self, tntk7):
        quad = [ntk_fourier_coefficient(f) for f, _ in tntk7.modes[:-1]]
        np.testing.assert_allclose(quad, tntk7.eigenvalues, rtol=0, atol=1e-8)
        assert ntk_fourier_coefficient(4) == pytest.approx(17 / (225 * PI2), abs=1e-8)

    def test_cumulative_sums(self, tntk7):
        expected = [0.1013, 0.2263, 0.3513, 0.4076, 0.4639, 0.4716, 0.4792]
        np.testing.assert_allclose(np.round(np.cumsum(tntk7.eigenvalues), 4), expected, atol=0)

    def test_odd_frequencies_vanish(self):
        for f in (3, 5, 7):
            assert abs(ntk_fourier_coefficient(f)) < 1e-12

    def test_beyond_table_closed_form(self):
        # even frequency m: (1/(m-1)^2 + 1/(m+1)^2) / (2 pi^2)
        k = make_tntk(9)
        assert k.modes[7] == (6, 1) and k.modes[8] == (6, 2)
        assert k.eigenvalues[7] == pytest.approx(37 / (1225 * PI2), abs=1e-10)

    def test_rank_budget(self):
        make_tntk(64)
        with pytest.raises(RankBudgetError):
            make_tntk(65)

    def test_trace_average_of_diagonal(self, tntk7):
        nodes, w = circle_rule(4096)
        diag = np.einsum("ij,ij->j", tntk7.features(nodes) * tntk7.eigenvalues[:, None],
                         tntk7.features(nodes))
        assert float(w @ diag) == pytest.approx(0.4792, abs=5e-5)
        assert float(w @ diag) == pytest.approx(tntk7.trace, rel=1e-12)


class TestClosedForm:
    def test_special_angles(self):
        assert ntk_closed_form(1.3, 1.3) == pytest.approx(0.5)
        assert ntk_closed_form(math.pi, 0.0) == pytest.approx(0.0, abs=1e-16)
        assert ntk_closed_form(math.pi / 2, 0.0) == pytest.approx(0.0, abs=1e-16)

    @given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
    def test_symmetric_and_periodic(self, a, b):
        assert ntk_closed_form(a, b) == pytest.approx(ntk_closed_form(b, a), abs=1e-15)
        assert ntk_closed_form(a, b) == pytest.approx(
            ntk_closed_form(a + 2 * math.pi, b), abs=1e-12)


class TestLegendre:
    def test_eigenvalues(self, leg5):
        assert leg5.eigenvalues[0] == pytest.approx(3 / PI2)
        assert leg5.eigenvalues[0] == pytest.approx(0.30396, abs=5e-6)
        assert leg5.eigenvalues[1] == pytest.approx(3 / PI2 / 4)

    def test_trace_approaches_half(self):
        k = np.arange(1, 6)
        assert make_legendre(5).trace == pytest.approx(3 / PI2 * np.sum(k**-2.0))
        assert make_legendre(4000).trace == pytest.approx(0.5, abs=1e-4)

    def test_constant_basis(self, leg5):
        assert leg5.eval_features(0.0)[0] == 1.0

    def test_basis_matches_numpy_legendre(self, leg5):
        x = np.linspace(-1, 1, 11)
        for k in range(6):
            ref = np.polynomial.legendre.Legendre.basis(k)(x) * math.sqrt(2 * k + 1)
            row = leg5.features_with_complement(x)[k]
            np.testing.assert_allclose(row, ref, atol=1e-13)


class TestFeatures:
    def test_tntk_at_zero(self, tntk7):
        f = tntk7.eval_features(0.0)
        assert f[0] == 1.0
        assert f[1] == pytest.approx(math.sqrt(2))
        assert f[2] == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("kernel", [make_tntk(7), make_legendre(5), make_tntk(20),
                                        make_custom([1.0, 0.5, 0.2], basis="legendre")])
    def test_orthonormal_including_complement(self, kernel):
        assert orthonormality_error(kernel) <= 1e-8

    def test_shapes(self, tntk7):
        x = np.linspace(0, 6, 9)
        assert tntk7.features(x).shape == (7, 9)
        assert tntk7.complement(x).shape == (9,)
        assert tntk7.features_with_complement(x).shape == (8, 9)

    @pytest.mark.parametrize("bad", [-0.1, 7.0, float("nan")])
    def test_circle_domain(self, tntk7, bad):
        with pytest.raises(DomainError):
            tntk7.features(np.array([0.0, bad]))

    def test_interval_domain(self, leg5):
        with pytest.raises(DomainError):
            leg5.eval_kernel(1.5, 0.0)

    def test_eval_features_rejects_arrays(self, tntk7):
        with pytest.raises(ValueError):
            tntk7.eval_features(np.zeros(2))


class TestGram:
    def test_single_point(self, tntk7):
        G = tntk7.gram_matrix(np.array([0.7]))
        assert G.shape == (1, 1)
        assert G[0, 0] == pytest.approx(tntk7.eval_kernel(0.7, 0.7))

    def test_three_points_against_mercer_sum(self, tntk7):
        X = np.array([0.0, 1.0, 4.0])
        G = tntk7.gram_matrix(X)
        direct = np.array([[tntk7.eval_kernel(a, b) for b in X] for a in X])
        np.testing.assert_allclose(G, direct, atol=1e-15)
        np.testing.assert_allclose(tntk7.mercer_gram(X), direct, atol=1e-15)

    def test_rank_at_most_M(self, leg5, rng):
        G = leg5.gram_matrix(rng.uniform(-1, 1, 30))
        assert np.linalg.matrix_rank(G, tol=1e-10) <= 5

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 40), st.integers(0, 2**32 - 1), st.sampled_from(["tntk", "legendre"]))
    def test_symmetric_psd(self, n, seed, family):
        kernel = make_tntk(7) if family == "tntk" else make_legendre(5)
        rng = np.random.default_rng(seed)
        lo, hi = (0, 2 * math.pi) if family == "tntk" else (-1, 1)
        G = kernel.gram_matrix(rng.uniform(lo, hi, n))
        assert np.array_equal(G, G.T)
        assert np.linalg.eigvalsh(G)[0] >= -1e-10
        assert np.all(np.diag(G) >= 0)

    def test_cross_gram(self, leg5, rng):
        X, Z = rng.uniform(-1, 1, 5), rng.uniform(-1, 1, 3)
        C = leg5.cross_gram(X, Z)
        assert C.shape == (5, 3)
        assert C[4, 2] == pytest.approx(leg5.eval_kernel(X[4], Z[2]))


class TestDescriptor:
    def test_roundtrip(self, tntk7, leg5):
        for k in (tntk7, leg5, make_custom([2.0, 1.0])):
            back = SpectralKernel.from_dict(k.to_dict())
            np.testing.assert_array_equal(back.eigenvalues, k.eigenvalues)
            assert back.modes == k.modes

    def test_mismatched_eigenvalues(self):
        with pytest.raises(ValueError):
            SpectralKernel.from_dict({"family": "legendre", "rank": 2, "eigenvalues": [1, 1]})

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            make_custom([1.0, 0.0])

    def test_immutable(self, tntk7):
        with pytest.raises(ValueError):
            tntk7.eigenvalues[0] = 1.0


class TestQuadrature:
    def test_weights_sum_to_one(self):
        for dom in ("circle", "interval"):
            _, w = domain_rule(dom, 1000)
            assert w.sum() == pytest.approx(1.0, abs=1e-14)

    def test_interval_moments(self):
        x, w = interval_rule(1000)
        assert w @ x**2 == pytest.approx(1 / 3, abs=1e-15)
        assert w @ x**10 == pytest.approx(1 / 11, abs=1e-15)
