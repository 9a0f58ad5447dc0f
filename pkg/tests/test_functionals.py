from __future__ import annotations

import csv

import numpy as np
import pytest

from cmcfol import functionals as F
from cmcfol import metric as M
from cmcfol.errors import ConfigError
from cmcfol.sphere import build_grid, lm_index
from cmcfol.surface import GraphSurface, surface_geometry
from oracles import schwarzschild_flux


@pytest.fixture(scope="module")
def g48():
    return build_grid(48)


def sphere(grid, model, R, center=(0.0, 0.0, 0.0)):
    return surface_geometry(GraphSurface.round(grid, R, center=center), model)


# -- Hawking mass ------------------------------------------------------------------

def test_hawking_euclidean(grid16):
    for R in (1.0, 7.0, 100.0):
        assert abs(F.hawking_mass(sphere(grid16, M.euclidean(), R))) < 1e-11


def test_hawking_schwarzschild_radius_independent(grid16):
    vals = [F.hawking_mass(sphere(grid16, M.schwarzschild(1.0), r)) for r in (2.0, 5.0, 10.0, 20.0, 40.0)]
    assert np.allclose(vals, 1.0, atol=1e-9)
    assert np.var(vals[1:]) <= 1e-8


def test_hawking_nonround_negative(grid32):
    # graph approximating an ellipsoid elongated along x3
    c = np.zeros(grid32.ncoef)
    c[lm_index(2, 0)] = 0.1 * np.sqrt(4 * np.pi / 5)
    surf = GraphSurface.from_coefficients(grid32, 1.0, c)
    assert F.hawking_mass(surface_geometry(surf, M.euclidean())) < 0


# -- ADM mass flux -------------------------------------------------------------------

def test_adm_flux_euclidean(grid16):
    assert F.adm_mass_flux(M.euclidean(), 10.0, grid16) == 0.0


@pytest.mark.parametrize("R", [100.0, 1000.0])
def test_adm_flux_schwarzschild_closed_form(grid16, R):
    assert F.adm_mass_flux(M.schwarzschild(1.0), R, grid16) == pytest.approx(schwarzschild_flux(1.0, R), abs=1e-9)


def test_adm_flux_values_and_rate(grid16):
    f100 = F.adm_mass_flux(M.schwarzschild(1.0), 100.0, grid16)
    f1000 = F.adm_mass_flux(M.schwarzschild(1.0), 1000.0, grid16)
    assert f100 == pytest.approx(1.015075125, abs=1e-9)
    assert f1000 == pytest.approx(1.0015007501249997, abs=1e-12)
    # |value - 1| ~ 3/(2R): factor 10 per decade
    assert (f100 - 1) / (f1000 - 1) == pytest.approx(10.0, rel=0.01)


# -- curvature form of the mass ----------------------------------------------------------

def test_curvature_integral_euclidean(grid16):
    assert F.mass_curvature_integral(sphere(grid16, M.euclidean(), 5.0)) == 0.0


@pytest.mark.parametrize("r", [3.0, 10.0, 50.0])
def test_curvature_integral_schwarzschild(grid16, r):
    assert F.mass_curvature_integral(sphere(grid16, M.schwarzschild(1.0), r)) == pytest.approx(1.0, abs=1e-8)


def test_curvature_integral_conventions(grid16):
    cache = sphere(grid16, M.schwarzschild(1.0), 10.0)
    rho = cache.area_radius
    area = F.mass_curvature_integral(cache)
    assert F.mass_curvature_integral(cache, radius="min_distance") == pytest.approx(area * 10.0 / rho, rel=1e-13)
    assert F.mass_curvature_integral(cache, radius=rho) == pytest.approx(area, rel=1e-15)
    with pytest.raises(ConfigError):
        F.mass_curvature_integral(cache, radius="bogus")


def test_curvature_integral_agrees_with_flux_perturbed(grid32):
    model = M.builtin_model("perturbed")
    a = F.adm_mass_flux(model, 1000.0, grid32)
    b = F.mass_curvature_integral(sphere(grid32, model, 1000.0))
    assert abs(a - b) <= 2e-3


@pytest.mark.parametrize(
    "name", ["schwarzschild", "translated_schwarzschild", "perturbed", "perturbed_rt", "trace_perturbed"]
)
def test_flux_and_curvature_converge_together(grid32, name):
    model = M.builtin_model(name)
    eps = model.epsilon

    def diff(R):
        return abs(F.adm_mass_flux(model, R, grid32) - F.mass_curvature_integral(sphere(grid32, model, R)))

    assert diff(1000.0) <= 10 * diff(100.0) * (100.0 / 1000.0) ** eps


# -- ADM center --------------------------------------------------------------------------

def test_adm_center_centered(grid16):
    assert np.abs(F.adm_center_flux(M.schwarzschild(1.0), 50.0, grid16)).max() < 1e-10


def test_adm_center_translated(grid32):
    z = F.adm_center_flux(M.builtin_model("translated_schwarzschild"), 200.0, grid32)
    assert np.allclose(z, [0.3, 0, 0], atol=5e-3)


def test_adm_center_trace_perturbation(grid32):
    z = F.adm_center_flux(M.builtin_model("trace_perturbed"), 50.0, grid32)
    assert np.abs(z).max() < 1e-8


def test_adm_center_requires_mass(grid16):
    with pytest.raises(ConfigError):
        F.adm_center_flux(M.euclidean(), 10.0, grid16)


# -- Ricci flux and the foliation integral ---------------------------------------------------

def test_ricci_flux_vanishes_by_symmetry(grid16):
    assert np.abs(F.ricci_flux(sphere(grid16, M.schwarzschild(1.0), 10.0))).max() < 1e-10
    assert np.abs(F.ricci_flux(sphere(grid16, M.euclidean(), 10.0))).max() == 0.0


def test_ricci_flux_decay(grid32):
    model = M.builtin_model("perturbed")
    eps = model.epsilon
    for R in (20.0, 40.0):
        a = np.linalg.norm(F.ricci_flux(sphere(grid32, model, R)))
        b = np.linalg.norm(F.ricci_flux(sphere(grid32, model, 2 * R)))
        assert a / b >= 2 ** (1 + eps) * 0.7


def test_foliation_integral_centered(grid16):
    xi, ni = F.foliation_integral(sphere(grid16, M.schwarzschild(1.0), 10.0))
    assert np.abs(xi).max() < 1e-10 and np.abs(ni).max() < 1e-10


def test_foliation_integral_translated(grid32):
    cache = sphere(grid32, M.builtin_model("translated_schwarzschild"), 10.0, center=(0.3, 0, 0))
    xi, _ = F.foliation_integral(cache)
    assert xi[0] == pytest.approx(-8 * np.pi * 0.3 / cache.area_radius, abs=1e-6)


def test_foliation_integral_consistency_rate(grid32):
    model = M.builtin_model("translated_schwarzschild")
    radii = [10.0, 20.0, 40.0, 80.0]
    d = []
    for R in radii:
        cache = sphere(grid32, model, R)
        _, ni = F.foliation_integral(cache)
        rho = cache.area_radius
        d.append(abs(model.mass * 0.3 / rho - rho / (8 * np.pi) * ni[0]))
    slope = np.polyfit(np.log(radii), np.log(d), 1)[0]
    assert slope <= -model.epsilon


# -- center integrals of the interpolation --------------------------------------------------

def test_center_integrand_vanishes_for_schwarzschild(grid16):
    S = M.schwarzschild(1.0)
    assert np.abs(F.center_integrand(sphere(grid16, S, 10.0), S)).max() == 0.0


def test_center_integrand_symmetric_target(grid32):
    model = M.perturbed_schwarzschild(1.0, 0.05, symmetric=True)
    assert np.abs(F.center_integrand(sphere(grid32, model, 12.0), model)).max() < 1e-8


def test_center_integrand_surface_independence_rate(grid32):
    model = M.builtin_model("perturbed")
    c = np.zeros(grid32.ncoef)
    c[1:9] = 0.3
    diffs = []
    for R in (20.0, 40.0, 80.0):
        off = surface_geometry(GraphSurface.from_coefficients(grid32, R, c), model)
        diffs.append(np.linalg.norm(F.center_integrand(off, model) - F.center_integrand(sphere(grid32, model, R), model)))
    for a, b in zip(diffs, diffs[1:]):
        assert b / a <= 2 ** (-model.epsilon) * 1.1


def test_center_integrand_radius_flags(grid16):
    model = M.builtin_model("perturbed")
    cache = sphere(grid16, model, 10.0)
    a = F.center_integrand(cache, model, radius="rad0")
    b = F.center_integrand(cache, model, radius="rad")
    assert np.allclose(a, b, atol=1e-12)
    with pytest.raises(ConfigError):
        F.center_integrand(cache, model, radius="nope")


# -- invariants ------------------------------------------------------------------------------

@pytest.mark.parametrize(
    "model",
    [M.schwarzschild(1.0), M.perturbed_schwarzschild(1.0, 0.05, symmetric=True), M.builtin_model("trace_perturbed")],
    ids=["schwarzschild", "even_perturbation", "trace_perturbed"],
)
def test_symmetric_center_integrals_vanish(grid32, model):
    cache = sphere(grid32, model, 12.0)
    assert np.abs(F.ricci_flux(cache)).max() <= 1e-8
    xi, ni = F.foliation_integral(cache)
    assert np.abs(xi).max() <= 1e-8 and np.abs(ni).max() <= 1e-8
    assert np.abs(F.center_integrand(cache, model)).max() <= 1e-8
    assert np.abs(F.adm_center_flux(model, 12.0, grid32)).max() <= 1e-8


@pytest.mark.parametrize("name", ["schwarzschild", "translated_schwarzschild", "perturbed", "perturbed_rt", "trace_perturbed"])
def test_grid_refinement_stability(grid32, g48, name):
    model = M.builtin_model(name)
    vals = []
    for g in (grid32, g48):
        cache = sphere(g, model, 15.0)
        vals.append(
            np.r_[
                F.hawking_mass(cache),
                F.adm_mass_flux(model, 15.0, g),
                F.mass_curvature_integral(cache),
                F.adm_center_flux(model, 15.0, g),
                F.ricci_flux(cache),
                np.concatenate(F.foliation_integral(cache)),
                F.center_integrand(cache, model),
                F.lapse_flux(cache, model),
            ]
        )
    assert np.abs(vals[0] - vals[1]).max() <= 1e-7


# -- report ------------------------------------------------------------------------------------

def test_mass_report(tmp_path):
    rep = F.mass_report(M.schwarzschild(1.0), [100.0, 1000.0], bandlimit=16)
    assert rep.adm_flux[0] == pytest.approx(1.015075125, abs=1e-9)
    assert rep.slope == pytest.approx(-1.0, abs=0.01)
    path = tmp_path / "masses.csv"
    F.write_mass_report(rep, path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == list(F.MassReport.COLUMNS)
    assert len(rows) == 3
    rep0 = F.mass_report(M.euclidean(), [10.0], bandlimit=8)
    assert np.isnan(rep0.centers[0][0]) and rep0.hawking[0] == pytest.approx(0.0, abs=1e-11)
