"""Mass and center functionals of surfaces and coordinate spheres."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .metric import AmbientMetricModel, artificial_data_batch, schwarzschild_base
from .operators import lapse_rhs
from .sphere import SphereGrid, build_grid
from .surface import GraphSurface, SurfaceGeometryCache, euclidean_center, surface_geometry
from .tables import write_csv

__all__ = [
    "MassReport",
    "hawking_mass",
    "adm_mass_flux",
    "mass_curvature_integral",
    "adm_center_flux",
    "ricci_flux",
    "foliation_integral",
    "center_integrand",
    "lapse_flux",
    "mass_report",
    "write_mass_report",
]

DEFAULT_FLUX_L = 32


def hawking_mass(cache: SurfaceGeometryCache) -> float:
    """``sqrt(|S|/16 pi) (1 - int H^2 / 16 pi)``."""
    willmore = cache.integrate(cache.H**2)
    return float(np.sqrt(cache.area / (16.0 * np.pi)) * (1.0 - willmore / (16.0 * np.pi)))


def _coordinate_sphere(metric, R, grid):
    if R < metric.r_min:
        from .errors import DomainError

        raise DomainError(f"radius {R} inside r_min = {metric.r_min}")
    pts = R * grid.omega
    return pts, grid.weights * R**2


def adm_mass_flux(metric: AmbientMetricModel, R: float, grid: SphereGrid | None = None) -> float:
    """ADM flux over the coordinate sphere of radius ``R`` about the origin.

    The Euclidean normal and Euclidean area measure of the coordinate
    sphere are used.
    """
    grid = build_grid(DEFAULT_FLUX_L) if grid is None else grid
    pts, w = _coordinate_sphere(metric, R, grid)
    _, dg, _ = metric.jets(pts, order=1)
    # sum_j d_j g_ij - d_i g_jj
    vec = np.einsum("njij->ni", dg) - np.einsum("nijj->ni", dg)
    return float(np.dot(w, np.einsum("ni,ni->n", vec, grid.omega)) / (16.0 * np.pi))


def _radius(cache, mode):
    if isinstance(mode, (int, float)) and not isinstance(mode, bool):
        return float(mode)
    if mode == "area":
        return cache.area_radius
    if mode == "min_distance":
        return float(np.linalg.norm(cache.X, axis=1).min())
    if mode == "coordinate":
        return float(np.linalg.norm(cache.X, axis=1).mean())
    raise ConfigError(f"unknown radius convention {mode!r}")


def mass_curvature_integral(cache: SurfaceGeometryCache, metric=None, radius="area") -> float:
    """Curvature form of the mass, ``-R/8pi int Ric(nu, nu) - S/2 dmu``.

    Parameters
    ----------
    radius : {"area", "min_distance", "coordinate"} or float
        Radius ``R`` in front of the integral. The default is the area
        radius, for which centered Schwarzschild spheres give exactly ``m``.
    """
    if metric is not None and metric is not cache.metric:
        cache = surface_geometry(cache.surface, metric)
    R = _radius(cache, radius)
    return float(-R / (8.0 * np.pi) * cache.integrate(cache.ric_nn - 0.5 * cache.scalar))


def adm_center_flux(metric: AmbientMetricModel, R: float, grid: SphereGrid | None = None):
    """ADM center integral over the coordinate sphere ``S_R(0)``.

    Integrand ``x^i (d_j g_jk - d_k g_jj) nu^k - (g_ij nu^j - g_jj nu^i)``
    with the Euclidean unit normal ``nu = x/R`` and Euclidean measure,
    divided by ``16 pi m``.

    Raises
    ------
    ConfigError
        If the model declares zero mass.
    """
    if metric.mass == 0:
        raise ConfigError("center of mass undefined for vanishing mass")
    grid = build_grid(DEFAULT_FLUX_L) if grid is None else grid
    pts, w = _coordinate_sphere(metric, R, grid)
    g, dg, _ = metric.jets(pts, order=1)
    nu = grid.omega
    flux = np.einsum("njjk,nk->n", dg, nu) - np.einsum("nkjj,nk->n", dg, nu)
    tr = np.einsum("njj->n", g)
    corr = np.einsum("nij,nj->ni", g, nu) - tr[:, None] * nu
    integrand = pts * flux[:, None] - corr
    return (w[:, None] * integrand).sum(axis=0) / (16.0 * np.pi * metric.mass)


def ricci_flux(cache: SurfaceGeometryCache, metric=None):
    """``int Ric(nu, e_i) - S/2 nu_i dmu`` for i = 1, 2, 3."""
    if metric is not None and metric is not cache.metric:
        cache = surface_geometry(cache.surface, metric)
    integrand = np.einsum("na,nai->ni", cache.nu, cache.ric) - 0.5 * cache.scalar[:, None] * cache.nu_low
    return cache.mu @ integrand


def foliation_integral(cache: SurfaceGeometryCache, metric=None):
    """The pair ``int (Ric(nu,nu) - S/2) x_i dmu`` and ``int (...) nu_i dmu``."""
    if metric is not None and metric is not cache.metric:
        cache = surface_geometry(cache.surface, metric)
    w = cache.mu * (cache.ric_nn - 0.5 * cache.scalar)
    return w @ cache.X, w @ cache.nu_low


def center_integrand(cache: SurfaceGeometryCache, target: AmbientMetricModel, schw=None, radius="area"):
    """Center integrals ``I_i`` of the interpolation data.

    ``int R Jbar(nu) nu_i + kbar(nu, e_i - nu_i nu) - tr kbar nu_i dmu``
    with ``nu_i = g(nu, e_i)`` and ``tr`` the trace of the cache metric.

    Parameters
    ----------
    radius : {"area", "rad0", "rad"}
        ``area`` uses the area radius. ``rad0`` uses ``|x - z|`` with
        ``z`` the Euclidean center, and ``rad`` uses ``|x|`` pointwise.
    """
    schw = schwarzschild_base(target) if schw is None else schw
    kbar, jbar = artificial_data_batch(target, schw, cache.X, connection=cache.metric)
    nu, nl = cache.nu, cache.nu_low
    if radius == "area":
        R = cache.area_radius
    elif radius == "rad0":
        R = np.linalg.norm(cache.X - euclidean_center(cache.surface), axis=1)
    elif radius == "rad":
        R = np.linalg.norm(cache.X, axis=1)
    else:
        raise ConfigError(f"unknown radius convention {radius!r}")
    jn = np.einsum("na,na->n", jbar, nu)
    kn = np.einsum("nab,na->nb", kbar, nu)  # kbar(nu, e_b)
    knn = np.einsum("nb,nb->n", kn, nu)
    tr = np.einsum("nab,nab->n", cache.gbar_inv, kbar)
    integrand = (np.asarray(R) * jn)[..., None] * nl + kn - knn[:, None] * nl - tr[:, None] * nl
    return cache.mu @ integrand


def lapse_flux(cache: SurfaceGeometryCache, target: AmbientMetricModel, schw=None):
    """``int (-Jbar(N) + div kbar_N - <k, kbar>) N_i dmu``."""
    schw = schwarzschild_base(target) if schw is None else schw
    rhs = lapse_rhs(cache, target, schw).values
    return (cache.mu * rhs) @ cache.nu_low


@dataclass
class MassReport:
    """Mass functionals over a set of coordinate spheres about the origin."""

    radii: list
    hawking: list = field(default_factory=list)
    adm_flux: list = field(default_factory=list)
    curvature_integral: list = field(default_factory=list)
    centers: list = field(default_factory=list)
    center_integrals: list = field(default_factory=list)
    slope: float = float("nan")

    COLUMNS = (
        "radius",
        "hawking",
        "adm_flux",
        "curvature_integral",
        "center_x",
        "center_y",
        "center_z",
        "I1",
        "I2",
        "I3",
    )

    def rows(self):
        for k, R in enumerate(self.radii):
            yield [R, self.hawking[k], self.adm_flux[k], self.curvature_integral[k], *self.centers[k], *self.center_integrals[k]]


def mass_report(metric: AmbientMetricModel, radii, bandlimit: int = DEFAULT_FLUX_L) -> MassReport:
    """Evaluate every mass and center functional on coordinate spheres.

    Center entries are NaN when the model declares no mass. The slope is
    the log-log rate of ``|adm_flux - adm_flux(R_max)|`` between the two
    smallest radii, a crude convergence estimate.
    """
    grid = build_grid(bandlimit)
    rep = MassReport([float(r) for r in radii])
    for R in rep.radii:
        cache = surface_geometry(GraphSurface.round(grid, R), metric)
        rep.hawking.append(hawking_mass(cache))
        rep.adm_flux.append(adm_mass_flux(metric, R, grid))
        rep.curvature_integral.append(mass_curvature_integral(cache))
        if metric.mass != 0:
            rep.centers.append(tuple(adm_center_flux(metric, R, grid)))
            rep.center_integrals.append(tuple(center_integrand(cache, metric)))
        else:
            rep.centers.append((np.nan,) * 3)
            rep.center_integrals.append((np.nan,) * 3)
    if len(rep.radii) >= 2:
        m_inf = rep.adm_flux[-1] if metric.mass == 0 else metric.mass
        d = [abs(a - m_inf) for a in rep.adm_flux[:2]]
        if d[0] > 0 and d[1] > 0:
            rep.slope = float(np.log(d[1] / d[0]) / np.log(rep.radii[1] / rep.radii[0]))
    return rep


def write_mass_report(rep: MassReport, path):
    return write_csv(path, MassReport.COLUMNS, rep.rows())
