from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import sph_harm_y

from cmcfol.errors import ConfigError, ShapeError
from cmcfol.sphere import ScalarField, build_grid, integrate, lm_index, sphere_laplacian


def test_node_count_and_ordering():
    g = build_grid(8)
    assert g.size == 9 * 18
    assert g.ncoef == 81
    th = g.theta_nodes.reshape(9, 18)
    assert np.all(np.diff(th[:, 0]) > 0)  # north first
    assert np.allclose(th, th[:, :1])


def test_weights_sum_to_area():
    g = build_grid(12)
    assert abs(g.weights.sum() - 4 * np.pi) < 1e-13


@pytest.mark.parametrize("L", [4, 9, 16])
def test_quadrature_exact_for_degree_2L(L):
    g = build_grid(L)
    rng = np.random.default_rng(L)
    # random polynomial of degree 2L in (x, y, z): product of two degree-L harmonics
    a = ScalarField(g, coeffs=rng.standard_normal(g.ncoef))
    b = ScalarField(g, coeffs=rng.standard_normal(g.ncoef))
    exact = float(a.coeffs @ b.coeffs)  # orthonormal basis
    assert abs(integrate(a.values * b.values, g.weights) - exact) <= 1e-12 * max(1.0, abs(exact)) * 10
    z = g.omega[:, 2]
    assert abs(integrate(z ** (2 * L), g.weights) - 4 * np.pi / (2 * L + 1)) < 1e-12


def test_matches_scipy_harmonics():
    g = build_grid(6)
    th, ph = g.theta_nodes, g.phi_nodes
    for l in range(7):
        for m in range(-l, l + 1):
            y = sph_harm_y(l, abs(m), th, ph)
            # real basis without Condon-Shortley phase
            if m > 0:
                ref = np.sqrt(2) * (-1) ** m * y.real
            elif m < 0:
                ref = np.sqrt(2) * (-1) ** m * y.imag
            else:
                ref = y.real
            ours = ScalarField.harmonic(g, l, m).values
            assert np.abs(ours - ref).max() < 1e-12, (l, m)


def test_omega_components():
    g = build_grid(5)
    c = np.sqrt(4 * np.pi / 3)
    assert np.allclose(g.omega[:, 0], c * ScalarField.harmonic(g, 1, 1).values, atol=1e-14)
    assert np.allclose(g.omega[:, 1], c * ScalarField.harmonic(g, 1, -1).values, atol=1e-14)
    assert np.allclose(g.omega[:, 2], c * ScalarField.harmonic(g, 1, 0).values, atol=1e-14)
    assert np.allclose(np.linalg.norm(g.omega, axis=1), 1.0)


@settings(max_examples=25, deadline=None)
@given(L=st.integers(4, 20), seed=st.integers(0, 2**31 - 1))
def test_roundtrip_random_bandlimited(L, seed):
    g = build_grid(L)
    c = np.random.default_rng(seed).standard_normal(g.ncoef)
    assert np.abs(g.analyze(g.synthesize(c)) - c).max() <= 1e-12


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_analyze_trailing_axes(seed):
    g = build_grid(7)
    c = np.random.default_rng(seed).standard_normal((g.ncoef, 3, 2))
    v = g.synthesize(c)
    assert v.shape == (g.size, 3, 2)
    assert np.abs(g.analyze(v) - c).max() < 1e-12


def test_theta_derivatives_against_closed_form():
    g = build_grid(10)
    th, ph = g.theta_nodes, g.phi_nodes
    s, c = np.sin(th), np.cos(th)
    # (x^2 - y^2) z = sin^2 cos cos(2 phi)
    F = ScalarField(g, values=s**2 * c * np.cos(2 * ph))
    assert np.abs(F.derivative(1, 0) - (2 * s * c**2 - s**3) * np.cos(2 * ph)).max() < 1e-12
    assert np.abs(F.derivative(0, 1) + 2 * s**2 * c * np.sin(2 * ph)).max() < 1e-12
    assert np.abs(F.derivative(2, 0) - (2 * c**3 - 7 * s**2 * c) * np.cos(2 * ph)).max() < 1e-12
    assert np.abs(F.derivative(3, 0) - (-6 * c**2 * s - 14 * s * c**2 + 7 * s**3) * np.cos(2 * ph)).max() < 1e-11
    assert np.abs(F.derivative(1, 1) + 2 * (2 * s * c**2 - s**3) * np.sin(2 * ph)).max() < 1e-12


def test_basis_matrix_matches_synthesis():
    g = build_grid(6)
    c = np.random.default_rng(0).standard_normal(g.ncoef)
    for a, b in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]:
        assert np.allclose(g.basis_matrix(a, b) @ c, g.synthesize(c, a, b), atol=1e-12)


def test_laplacian_eigenvalues():
    g = build_grid(9)
    for l in range(10):
        f = ScalarField.harmonic(g, l, -l // 2)
        assert np.allclose(sphere_laplacian(f).values, -l * (l + 1) * f.values, atol=1e-11)


def test_antipodal_parity():
    g = build_grid(8)
    idx = g.antipodal_index()
    assert np.allclose(g.omega[idx], -g.omega, atol=1e-14)
    for l in range(9):
        f = ScalarField.harmonic(g, l, l).values
        assert np.allclose(f[idx], (-1) ** l * f, atol=1e-12)


def test_lm_index():
    assert [lm_index(l, m) for l in range(3) for m in range(-l, l + 1)] == list(range(9))
    with pytest.raises(ConfigError):
        lm_index(2, 3)


def test_integrate_errors():
    g = build_grid(4)
    with pytest.raises(ShapeError):
        integrate(np.ones(g.size), np.ones(g.size - 1))
    w = g.weights.copy()
    w[3] = 0.0
    with pytest.raises(ConfigError):
        integrate(np.ones(g.size), w)


def test_bad_bandlimit():
    with pytest.raises(ConfigError):
        build_grid(0)
