from __future__ import annotations

import warnings

import numpy as np
import pytest

from cmcfol import metric as M
from cmcfol.checks import lemma_eigen_residuals
from cmcfol.errors import ConfigError, DegeneracyWarning, NearSingularWarning, OperatorError
from cmcfol.operators import (
    SpectrumResult,
    SurfaceOperator,
    laplace_beltrami,
    lapse_rhs,
    solve,
    spectrum,
    split_translational,
    stability_operator,
)
from cmcfol.solver import cmc_jacobian, solve_leaf
from cmcfol.sphere import ScalarField, build_grid, lm_index
from cmcfol.surface import GraphSurface, surface_geometry


def round_cache(grid, sigma, model=None):
    return surface_geometry(GraphSurface.round(grid, sigma), model or M.euclidean())


def y(grid, l, m, a=1.0):
    c = np.zeros(grid.ncoef)
    c[lm_index(l, m)] = a
    return ScalarField(grid, coeffs=c)


@pytest.fixture(scope="module")
def cmc50():
    out = {}
    for name in ("schwarzschild", "schwarzschild_negative"):
        model = M.builtin_model(name)
        surf, _ = solve_leaf(model, 50.0, 16)
        out[name] = surface_geometry(surf, model)
    return out


# -- Laplace-Beltrami --------------------------------------------------------------------

@pytest.mark.parametrize("sigma", [1.0, 4.0])
def test_laplacian_round_spectrum(grid16, sigma):
    sp = spectrum(laplace_beltrami(round_cache(grid16, sigma)), 16)
    expect = np.repeat([l * (l + 1) for l in range(4)], [1, 3, 5, 7]) / sigma**2
    assert np.allclose(sp.values, expect, atol=1e-10)
    assert sp.multiplicities == [1, 3, 5, 7]
    assert list(sp.bands) == list(np.repeat(range(4), [1, 3, 5, 7]))
    assert np.all(sp.residuals <= 1e-8 * np.abs(sp.values) + 1e-12)
    assert sp.orthonormality_defect <= 1e-10


def test_laplacian_y20(grid16):
    out = (-laplace_beltrami(round_cache(grid16, 1.0))).apply(y(grid16, 2, 0))
    assert np.allclose(out.coeffs, 6 * y(grid16, 2, 0).coeffs, atol=1e-11)


def test_laplacian_count4(grid16):
    sigma = 3.0
    sp = spectrum(laplace_beltrami(round_cache(grid16, sigma)), 4)
    assert np.allclose(sp.values, [0, 2 / sigma**2, 2 / sigma**2, 2 / sigma**2], atol=1e-12)


def test_laplacian_perturbation_is_first_order(grid16):
    sigma = 5.0
    base = np.repeat([l * (l + 1) for l in range(4)], [1, 3, 5, 7]) / sigma**2
    dev = []
    for a in (0.1, 0.01):
        c = np.zeros(grid16.ncoef)
        c[lm_index(2, 1)] = a
        c[lm_index(3, -2)] = 0.5 * a
        cache = surface_geometry(GraphSurface.from_coefficients(grid16, sigma, c), M.euclidean())
        dev.append(np.abs(spectrum(laplace_beltrami(cache), 16).values - base).max())
    assert dev[0] / dev[1] == pytest.approx(10.0, rel=0.2)


def test_operators_symmetric(grid16):
    rng = np.random.default_rng(5)
    c = np.zeros(grid16.ncoef)
    c[1:16] = 0.05 * rng.standard_normal(15)
    cache = surface_geometry(GraphSurface.from_coefficients(grid16, 9.0, c), M.builtin_model("perturbed"))
    assert laplace_beltrami(cache).asymmetry <= 1e-9
    assert stability_operator(cache).asymmetry <= 1e-9


def test_spectrum_rejects_asymmetric(grid16):
    op = laplace_beltrami(round_cache(grid16, 2.0))
    bad = SurfaceOperator(op.matrix, op.mass, op.cache, "bad", None, 1e-3)
    with pytest.raises(OperatorError):
        spectrum(bad, 4)
    with pytest.raises(ConfigError):
        spectrum(op, 0)


# -- stability operator -------------------------------------------------------------------

def test_stability_euclidean_round(grid16):
    sigma = 2.0
    sp = spectrum(stability_operator(round_cache(grid16, sigma)), 9)
    expect = np.r_[-2.0, 0, 0, 0, 4, 4, 4, 4, 4] / sigma**2
    assert np.allclose(sp.values, expect, atol=1e-10)
    assert np.abs(sp.values[1:4]).max() < 1e-12


def test_stability_schwarzschild_translation_band(cmc50):
    sigma, m = 50.0, 1.0
    vals = spectrum(stability_operator(cmc50["schwarzschild"]), 8).values
    order = np.argsort(np.abs(vals))
    small = vals[order[:3]]
    assert np.allclose(small, 6 * m / sigma**3, rtol=0.1)
    assert np.all(np.abs(vals[order[3:]]) >= 3 / (2 * sigma**2))


def test_stability_negative_mass_unstable(cmc50):
    sigma = 50.0
    vals = spectrum(stability_operator(cmc50["schwarzschild_negative"]), 8).values
    small = vals[np.argsort(np.abs(vals))[:3]]
    assert np.all(small < 0)
    assert np.allclose(small, -6 / sigma**3, rtol=0.1)


def test_potential_shift(grid16):
    cache = surface_geometry(GraphSurface.round(grid16, 10.0), M.schwarzschild(1.0))
    op = stability_operator(cache)
    a = spectrum(op, 10).values
    b = spectrum(op.shifted(0.01), 10).values
    assert np.allclose(b, a - 0.01, atol=1e-10)


def test_jacobian_equals_stability_on_round_spheres():
    grid = build_grid(10)
    for sigma in (1.0, 3.0):
        s = GraphSurface.round(grid, sigma)
        J, _ = cmc_jacobian(s, M.euclidean())
        C = stability_operator(surface_geometry(s, M.euclidean())).coefficient_matrix()
        assert np.abs(J - C).max() <= 1e-8


def test_eigenvalue_identity_with_positive_sign():
    r = lemma_eigen_residuals(25.0, 32, 1.0, 1.0)
    assert r.max() <= 0.2 * 6 / 25.0**3


@pytest.mark.parametrize("name", ["schwarzschild", "schwarzschild_negative", "translated_schwarzschild"])
@pytest.mark.parametrize("sigma", [25.0, 60.0])
def test_fifth_laplacian_eigenvalue_gap(name, sigma):
    model = M.builtin_model(name)
    surf, _ = solve_leaf(model, sigma, 16)
    vals = spectrum(laplace_beltrami(surface_geometry(surf, model)), 5).values
    assert vals[4] > 5 / sigma**2


# -- translational split --------------------------------------------------------------------

@pytest.fixture(scope="module")
def round_split():
    grid = build_grid(12)
    sigma = 1.0
    cache = round_cache(grid, sigma)
    return grid, sigma, cache, spectrum(laplace_beltrami(cache), 9)


def test_split_nu1(round_split):
    grid, sigma, _, sp = round_split
    nu1 = ScalarField(grid, values=grid.omega[:, 0])
    t, d = split_translational(nu1, sp, sigma)
    assert np.allclose(t.coeffs, nu1.coeffs, atol=1e-10)
    assert np.abs(d.coeffs).max() < 1e-10


def test_split_constant(round_split):
    grid, sigma, _, sp = round_split
    one = ScalarField(grid, values=np.ones(grid.size))
    t, d = split_translational(one, sp, sigma)
    assert np.abs(t.coeffs).max() < 1e-12
    assert np.allclose(d.values, 1.0)


def test_split_mixed(round_split):
    grid, sigma, _, sp = round_split
    nu1 = grid.omega[:, 0]
    y20 = y(grid, 2, 0).values
    t, d = split_translational(ScalarField(grid, values=nu1 + y20), sp, sigma)
    assert np.abs(t.values - nu1).max() < 1e-10
    assert np.abs(d.values - y20).max() < 1e-10


def test_split_is_projection_on_near_round(grid16):
    rng = np.random.default_rng(2)
    c = np.zeros(grid16.ncoef)
    c[4:16] = 0.02 * rng.standard_normal(12)
    sigma = 8.0
    cache = surface_geometry(GraphSurface.from_coefficients(grid16, sigma, c), M.schwarzschild(1.0))
    sp = spectrum(laplace_beltrami(cache), 9)
    f = ScalarField(grid16, coeffs=rng.standard_normal(grid16.ncoef))
    t, _ = split_translational(f, sp, sigma)
    tt, td = split_translational(t, sp, sigma)
    assert np.abs(tt.coeffs - t.coeffs).max() <= 1e-10
    assert abs(cache.integrate(t.values)) <= 1e-9


def test_split_degeneracy_warning(grid16):
    n = 6
    vals = np.array([0.0, 1.0, 1.0, 1.0, 1.05, 3.0])
    fake = SpectrumResult(vals, np.eye(grid16.ncoef)[:, :n], grid16, np.zeros(n), np.zeros(n), 0.0, [], np.eye(grid16.ncoef))
    with pytest.warns(DegeneracyWarning):
        split_translational(ScalarField(grid16, coeffs=np.ones(grid16.ncoef)), fake, np.sqrt(2.0))
    with pytest.raises(ConfigError):
        split_translational(ScalarField(grid16, coeffs=np.ones(grid16.ncoef)), SpectrumResult(vals[:4], np.eye(grid16.ncoef)[:, :4], grid16, np.zeros(4), np.zeros(4), 0.0), 1.0)


# -- solves ------------------------------------------------------------------------------------

def test_solve_laplacian_y20(grid16):
    sigma = 3.0
    u = solve(-laplace_beltrami(round_cache(grid16, sigma)), y(grid16, 2, 0))
    assert np.allclose(u.coeffs, sigma**2 / 6 * y(grid16, 2, 0).coeffs, atol=1e-11)


def test_solve_near_singular_warning(grid16):
    cache = round_cache(grid16, 2.0)
    with pytest.warns(NearSingularWarning):
        solve(stability_operator(cache), grid16.omega[:, 0])


def test_solve_schwarzschild_amplification(cmc50):
    cache = cmc50["schwarzschild"]
    sigma, m = 50.0, 1.0
    rhs = cache.grid.omega[:, 0]
    rep = solve(stability_operator(cache), rhs, report=True)
    ratio = np.sqrt(cache.integrate(rep.solution.values**2) / cache.integrate(rhs**2))
    assert ratio == pytest.approx(sigma**3 / (6 * m), rel=0.15)
    assert rep.residual < 1e-8 and rep.cut_eigenvalues == []


# -- lapse right-hand side -----------------------------------------------------------------------

def test_lapse_rhs_vanishes_for_schwarzschild(grid16):
    S = M.schwarzschild(1.0)
    assert np.abs(lapse_rhs(round_cache(grid16, 10.0, S), S, S).values).max() == 0.0


def test_lapse_rhs_trace_perturbation_is_radial(grid16):
    target = M.builtin_model("trace_perturbed")
    schw = M.schwarzschild_base(target)
    rhs = lapse_rhs(round_cache(grid16, 10.0, target), target, schw)
    assert np.abs(rhs.coeffs[1:]).max() <= 1e-9
    assert abs(rhs.coeffs[0]) > 1e-6


@pytest.mark.parametrize("tau", [0.0, 0.5, 1.0])
def test_lapse_rhs_is_minus_tau_derivative_of_H(grid16, tau):
    target = M.builtin_model("perturbed")
    schw = M.schwarzschild_base(target)
    rng = np.random.default_rng(0)
    c = np.zeros(grid16.ncoef)
    c[1:9] = 0.05 * rng.standard_normal(8)
    surf = GraphSurface.from_coefficients(grid16, 12.0, c)
    h = 1e-4
    lo, hi = max(tau - h, 0.0), min(tau + h, 1.0)
    Hp = surface_geometry(surf, M.interpolate(schw, target, hi)).H
    Hm = surface_geometry(surf, M.interpolate(schw, target, lo)).H
    dH = (Hp - Hm) / (hi - lo)
    rhs = lapse_rhs(surface_geometry(surf, M.interpolate(schw, target, tau)), target, schw).values
    assert np.abs(rhs + dH).max() <= 1e-6


def test_no_stray_warnings_on_regular_solve(cmc50):
    cache = cmc50["schwarzschild"]
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        solve(stability_operator(cache), cache.grid.omega[:, 2] + 0.1)
