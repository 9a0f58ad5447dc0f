"""Radial graph surfaces and their geometry.

A surface is ``X(omega) = z + (rho + f(omega)) omega`` over the unit
sphere grid. Chart quantities use the colatitude/longitude chart of the
grid. Since no node sits on a pole, every chart quantity is finite.
Surface covariant derivatives are taken on Cartesian components of
tangential tensors. Those components are smooth functions on the
sphere, so a single spectral derivative operator serves everywhere.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from math import comb
from pathlib import Path

import numpy as np

from .errors import ConfigError, GeometryError
from .metric import AmbientMetricModel, curvature_batch, euclidean, riemann_3d
from .sphere import ScalarField, SphereGrid, build_grid, lm_index
from .tables import write_json

__all__ = [
    "GraphSurface",
    "SurfaceGeometryCache",
    "ConcentricReport",
    "surface_geometry",
    "mean_curvature_nodes",
    "euclidean_center",
    "simons_residual",
    "codazzi_residual",
    "gauss_residuals",
    "sobolev_norm",
    "concentric_check",
    "symmetry_defect",
    "load_surface",
    "dump_surface",
    "surface_to_dict",
    "surface_from_dict",
]

# multi-indices (a, b) = (theta order, phi order)
_ORDER1 = [(1, 0), (0, 1)]
_ORDER2 = [[(2, 0), (1, 1)], [(1, 1), (0, 2)]]


class GraphSurface:
    """Radial graph ``z + (rho + f) omega`` over a coordinate sphere.

    Parameters
    ----------
    center : array_like, shape (3,)
    rho : float
        Base radius.
    f : ScalarField
        Radial offset; its grid fixes the bandlimit.
    """

    def __init__(self, center, rho: float, f: ScalarField):
        self.center = np.asarray(center, dtype=float).reshape(3)
        self.rho = float(rho)
        if not self.rho > 0:
            raise ConfigError("base radius must be positive")
        self.f = f
        if not np.all(self.rho + f.values > 0):
            raise GeometryError("radial function rho + f is not positive; not a radial graph")

    @classmethod
    def round(cls, grid: SphereGrid, rho: float, center=(0.0, 0.0, 0.0)):
        return cls(center, rho, ScalarField(grid, coeffs=np.zeros(grid.ncoef)))

    @classmethod
    def from_coefficients(cls, grid, rho, coeffs, center=(0.0, 0.0, 0.0)):
        return cls(center, rho, ScalarField(grid, coeffs=coeffs))

    @property
    def grid(self) -> SphereGrid:
        return self.f.grid

    @property
    def radial(self):
        """Nodal values of ``rho + f``."""
        return self.rho + self.f.values

    def positions(self):
        return self.center + self.radial[:, None] * self.grid.omega

    def rebased(self, rho: float, center=None) -> "GraphSurface":
        """Same embedding written over base radius ``rho`` (and center,
        which must be unchanged for an exact rewrite)."""
        c = self.f.coeffs.copy()
        c[0] += (self.rho - rho) * np.sqrt(4.0 * np.pi)
        return GraphSurface(self.center if center is None else center, rho, ScalarField(self.grid, coeffs=c))

    def scaled(self, factor: float) -> "GraphSurface":
        """Radial rescaling about the base center."""
        return GraphSurface(self.center, self.rho * factor, ScalarField(self.grid, coeffs=self.f.coeffs * factor))

    def with_grid(self, grid: SphereGrid) -> "GraphSurface":
        """Same surface with coefficients padded or truncated to ``grid``."""
        c = np.zeros(grid.ncoef)
        n = min(grid.ncoef, self.grid.ncoef)
        c[:n] = self.f.coeffs[:n]
        return GraphSurface(self.center, self.rho, ScalarField(grid, coeffs=c))

    def radial_jets(self, order: int = 2):
        """Chart derivatives of ``rho + f`` keyed by multi-index."""
        out = {}
        c = self.f.coeffs
        for a in range(order + 1):
            for b in range(order + 1 - a):
                v = self.grid.synthesize(c, a, b)
                if a == 0 and b == 0:
                    v = v + self.rho
                out[(a, b)] = v
        return out

    def __repr__(self):
        return f"GraphSurface(center={self.center.tolist()}, rho={self.rho:.6g}, L={self.grid.L})"


def _embedding_jets(grid, center, Rjet, order):
    X = {}
    for a in range(order + 1):
        for b in range(order + 1 - a):
            acc = np.zeros((grid.size, 3))
            for a1 in range(a + 1):
                for b1 in range(b + 1):
                    acc += comb(a, a1) * comb(b, b1) * Rjet[(a1, b1)][:, None] * grid.omega_jet(a - a1, b - b1)
            X[(a, b)] = acc
    X[(0, 0)] = X[(0, 0)] + center
    return X


def _cross_normal(Xt, Xp):
    return np.cross(Xt, Xp)


def mean_curvature_nodes(grid, center, Rjet, metric: AmbientMetricModel, metric_data=None, return_metric=False):
    """Mean curvature at the nodes from the radial jet alone.

    This is the pointwise map used by the Newton solver; it needs only
    the metric and its first derivatives. ``metric_data`` (as returned
    with ``return_metric``) skips the metric evaluation when the nodes
    have not moved.
    """
    X = _embedding_jets(grid, center, Rjet, 2)
    if metric_data is None:
        g, dg, _ = metric.jets(X[(0, 0)], order=1)
        ginv = np.linalg.inv(g)
        low = 0.5 * (np.einsum("nijl->nlij", dg) + np.einsum("njil->nlij", dg) - dg)
        metric_data = (g, ginv, np.einsum("nkl,nlij->nkij", ginv, low))
    g, ginv, gamma = metric_data
    Xt, Xp = X[(1, 0)], X[(0, 1)]
    n = _cross_normal(Xt, Xp)
    nn = np.sqrt(np.einsum("na,nab,nb->n", n, ginv, n))
    nu_low = n / nn[:, None]
    XI = (Xt, Xp)
    gIJ = np.empty((grid.size, 2, 2))
    kIJ = np.empty((grid.size, 2, 2))
    for I in range(2):
        for J in range(I, 2):
            gIJ[:, I, J] = gIJ[:, J, I] = np.einsum("na,nab,nb->n", XI[I], g, XI[J])
            acc = X[_ORDER2[I][J]] + np.einsum("nbcd,nc,nd->nb", gamma, XI[I], XI[J])
            kIJ[:, I, J] = kIJ[:, J, I] = np.einsum("nb,nb->n", nu_low, acc)
    det = gIJ[:, 0, 0] * gIJ[:, 1, 1] - gIJ[:, 0, 1] ** 2
    H = (gIJ[:, 1, 1] * kIJ[:, 0, 0] - 2.0 * gIJ[:, 0, 1] * kIJ[:, 0, 1] + gIJ[:, 0, 0] * kIJ[:, 1, 1]) / det
    return (H, metric_data) if return_metric else H


class SurfaceGeometryCache:
    """Extrinsic and intrinsic geometry of a graph surface, per node.

    Attributes
    ----------
    X : (N, 3) positions
    XI : (N, 2, 3) chart tangent vectors
    g2, g2inv : (N, 2, 2) induced metric and inverse
    mu : (N,) quadrature weights of the induced area measure
    nu, nu_low : (N, 3) unit normal (vector and covector)
    k2 : (N, 2, 2) second fundamental form in the chart
    H : (N,) mean curvature
    ko2 : (N, 2, 2) trace-free part of ``k2``
    area, area_radius : floats
    """

    genus = 0

    def __init__(self, surface: GraphSurface, metric: AmbientMetricModel):
        self.surface = surface
        self.metric = metric
        grid = self.grid = surface.grid
        Rjet = surface.radial_jets(2)
        if not np.all(Rjet[(0, 0)] > 0):
            raise GeometryError("surface lost the radial graph property")
        self._Rjet = Rjet
        X = _embedding_jets(grid, surface.center, Rjet, 2)
        self._Xjet = X
        self.X = X[(0, 0)]
        cb = curvature_batch(metric, self.X)
        self.gbar, self.dgbar, self.d2gbar = cb.g, cb.dg, cb.d2g
        self.gbar_inv, self.gamma = cb.ginv, cb.gamma
        self.ric, self.scalar = cb.ric, cb.scalar
        XI = np.stack([X[(1, 0)], X[(0, 1)]], axis=1)
        self.XI = XI
        g2 = np.einsum("nIa,nab,nJb->nIJ", XI, self.gbar, XI)
        det = g2[:, 0, 0] * g2[:, 1, 1] - g2[:, 0, 1] ** 2
        if not np.all(det > 0):
            raise GeometryError("induced metric degenerate")
        self.g2 = g2
        self.det2 = det
        self.g2inv = np.stack(
            [np.stack([g2[:, 1, 1], -g2[:, 0, 1]], -1), np.stack([-g2[:, 1, 0], g2[:, 0, 0]], -1)], 1
        ) / det[:, None, None]
        self.sqrt_det = np.sqrt(det)
        self.mu = grid.weights * self.sqrt_det / grid.sin_theta
        n = _cross_normal(XI[:, 0], XI[:, 1])
        nn = np.sqrt(np.einsum("na,nab,nb->n", n, self.gbar_inv, n))
        self.nu_low = n / nn[:, None]
        self.nu = np.einsum("nab,nb->na", self.gbar_inv, self.nu_low)
        X2 = np.empty((grid.size, 2, 2, 3))
        for I in range(2):
            for J in range(2):
                X2[:, I, J] = X[_ORDER2[I][J]]
        self.XIJ = X2
        acc = X2 + np.einsum("nbcd,nIc,nJd->nIJb", self.gamma, XI, XI)
        self.k2 = np.einsum("nb,nIJb->nIJ", self.nu_low, acc)
        self.H = np.einsum("nIJ,nIJ->n", self.g2inv, self.k2)
        self.ko2 = self.k2 - 0.5 * self.H[:, None, None] * g2
        self.knorm2 = np.einsum("nIK,nJL,nIJ,nKL->n", self.g2inv, self.g2inv, self.k2, self.k2)
        self.konorm2 = np.einsum("nIK,nJL,nIJ,nKL->n", self.g2inv, self.g2inv, self.ko2, self.ko2)
        self.ric_nn = np.einsum("na,nab,nb->n", self.nu, self.ric, self.nu)
        self.area = float(self.mu.sum())
        self.area_radius = float(np.sqrt(self.area / (4.0 * np.pi)))

    # -- derived per-node objects --------------------------------------------

    @cached_property
    def frame(self):
        """Dual coframe ``e^I_a`` with ``e^I(X_J) = delta`` and ``e^I(nu) = 0``."""
        return np.einsum("nIJ,nab,nJb->nIa", self.g2inv, self.gbar, self.XI)

    @cached_property
    def proj_up(self):
        """Inverse induced metric as an ambient tensor ``X_I g^IJ X_J``."""
        return np.einsum("nIa,nIJ,nJb->nab", self.XI, self.g2inv, self.XI)

    @cached_property
    def proj(self):
        """Tangential projector ``P^a_b = delta - nu^a nu_b``."""
        return np.eye(3)[None] - np.einsum("na,nb->nab", self.nu, self.nu_low)

    @cached_property
    def k_cart(self):
        """Second fundamental form as an ambient covariant tensor."""
        return np.einsum("nIJ,nIa,nJb->nab", self.k2, self.frame, self.frame)

    @cached_property
    def ko_cart(self):
        return np.einsum("nIJ,nIa,nJb->nab", self.ko2, self.frame, self.frame)

    @cached_property
    def riemann(self):
        return riemann_3d(self.gbar, self.ric, self.scalar)

    @property
    def mean_H(self) -> float:
        return float(np.dot(self.mu, self.H) / self.area)

    def integrate(self, values):
        return float(np.tensordot(self.mu, np.asarray(values, dtype=float), axes=(0, 0)))

    def mean(self, values):
        return self.integrate(values) / self.area

    # -- spectral surface calculus ----------------------------------------------

    def chart_gradient(self, values):
        """Chart derivatives ``(d_theta, d_phi)`` of smooth nodal data.

        ``values`` has shape ``(N, ...)``; result ``(N, 2, ...)``.
        """
        c = self.grid.analyze(values)
        return np.stack([self.grid.synthesize(c, 1, 0), self.grid.synthesize(c, 0, 1)], axis=1)

    def gradient(self, values):
        """Tangential differential ``D_c u = e^I_c d_I u`` (new axis 1)."""
        d = self.chart_gradient(values)
        return np.einsum("nIc,nI...->nc...", self.frame, d)

    def covariant_derivative(self, T):
        """Surface covariant derivative of a tangential covariant tensor
        given by Cartesian components ``T[n, a1, ..., ar]``.

        Returns ``(nabla T)[n, c, a1, ..., ar]`` with the derivative
        index first; the result is tangential in every slot.
        """
        T = np.asarray(T, dtype=float)
        rank = T.ndim - 1
        out = self.gradient(T)
        # connection terms Gamma^d_{e a} P^e_c T_{..d..}
        gp = np.einsum("ndea,nec->ncad", self.gamma, self.proj)
        letters = "abcdefgh"[:rank]
        for s in range(rank):
            src = letters[:s] + "z" + letters[s + 1 :]
            expr = f"nx{letters[s]}z,n{src}->nx{letters}"
            out = out - np.einsum(expr, gp, T)
        return self.project(out)

    def project(self, T):
        """Project every covariant slot of ``T[n, ...]`` onto the tangent plane."""
        rank = T.ndim - 1
        for s in range(rank):
            T = np.moveaxis(np.einsum("n...b,nba->n...a", np.moveaxis(T, s + 1, -1), self.proj), -1, s + 1)
        return T

    def norm_g(self, T):
        """Pointwise norm of a tangential covariant tensor."""
        T = np.asarray(T, dtype=float)
        if T.ndim == 1:
            return np.abs(T)
        rank = T.ndim - 1
        S = T
        for s in range(rank):
            S = np.moveaxis(np.einsum("n...b,nba->n...a", np.moveaxis(S, s + 1, -1), self.proj_up), -1, s + 1)
        val = np.einsum("ni,ni->n", S.reshape(S.shape[0], -1), T.reshape(T.shape[0], -1))
        return np.sqrt(np.maximum(val, 0.0))

    def hessian(self, values):
        return self.covariant_derivative(self.gradient(values))

    def laplacian_values(self, values):
        """Laplace-Beltrami of nodal data through Cartesian Hessians."""
        return np.einsum("nab,nab->n", self.proj_up, self.hessian(values))

    def divergence(self, w):
        """Divergence of a tangential 1-form given in Cartesian components."""
        return np.einsum("nab,nab->n", self.proj_up, self.covariant_derivative(w))

    # -- intrinsic curvature ---------------------------------------------------------

    @cached_property
    def gauss_curvature(self):
        """Intrinsic Gauss curvature from the chart metric.

        First and second chart derivatives of ``g_IJ`` are obtained by the
        chain rule from third-order radial jets and second-order metric
        jets, so no spectral differentiation of ``g_IJ`` is involved.
        """
        grid = self.grid
        Rjet = self.surface.radial_jets(3)
        X = _embedding_jets(grid, self.surface.center, Rjet, 3)

        def Xd(*idx):
            a = sum(1 for i in idx if i == 0)
            return X[(a, len(idx) - a)]

        G, dG, d2G = self.gbar, self.dgbar, self.d2gbar
        # ambient metric along the surface: d_K gbar_ab, d_K d_L gbar_ab
        dK = [np.einsum("ncab,nc->nab", dG, Xd(K)) for K in range(2)]
        dKL = [
            [
                np.einsum("ncdab,nc,nd->nab", d2G, Xd(K), Xd(L)) + np.einsum("ncab,nc->nab", dG, Xd(K, L))
                for L in range(2)
            ]
            for K in range(2)
        ]

        def bil(M, u, v):
            return np.einsum("na,nab,nb->n", u, M, v)

        dg2 = np.zeros((grid.size, 2, 2, 2))  # [K, I, J]
        d2g2 = np.zeros((grid.size, 2, 2, 2, 2))  # [K, L, I, J]
        for I in range(2):
            for J in range(2):
                for K in range(2):
                    dg2[:, K, I, J] = (
                        bil(dK[K], Xd(I), Xd(J)) + bil(G, Xd(I, K), Xd(J)) + bil(G, Xd(I), Xd(J, K))
                    )
                    for L in range(2):
                        d2g2[:, K, L, I, J] = (
                            bil(dKL[K][L], Xd(I), Xd(J))
                            + bil(dK[K], Xd(I, L), Xd(J))
                            + bil(dK[K], Xd(I), Xd(J, L))
                            + bil(dK[L], Xd(I, K), Xd(J))
                            + bil(dK[L], Xd(I), Xd(J, K))
                            + bil(G, Xd(I, K, L), Xd(J))
                            + bil(G, Xd(I, K), Xd(J, L))
                            + bil(G, Xd(I, L), Xd(J, K))
                            + bil(G, Xd(I), Xd(J, K, L))
                        )
        gi = self.g2inv
        low = 0.5 * (np.einsum("nijl->nlij", dg2) + np.einsum("njil->nlij", dg2) - dg2)
        Gam = np.einsum("nkl,nlij->nkij", gi, low)
        dlow = 0.5 * (np.einsum("nmijl->nmlij", d2g2) + np.einsum("nmjil->nmlij", d2g2) - d2g2)
        dgi = -np.einsum("nka,nmab,nbl->nmkl", gi, dg2, gi)
        dGam = np.einsum("nmkl,nlij->nmkij", dgi, low) + np.einsum("nkl,nmlij->nmkij", gi, dlow)
        # R(d1, d2) d2 = (d_1 Gam^m_22 - d_2 Gam^m_12 + Gam^m_1k Gam^k_22 - Gam^m_2k Gam^k_12) d_m
        v = (
            dGam[:, 0, :, 1, 1]
            - dGam[:, 1, :, 0, 1]
            + np.einsum("nmk,nk->nm", Gam[:, :, 0, :], Gam[:, :, 1, 1])
            - np.einsum("nmk,nk->nm", Gam[:, :, 1, :], Gam[:, :, 0, 1])
        )
        R1221 = np.einsum("nm,nm->n", self.g2[:, 0, :], v)
        return R1221 / self.det2


def surface_geometry(surface: GraphSurface, metric: AmbientMetricModel) -> SurfaceGeometryCache:
    """Build the geometry cache of ``surface`` in ``metric``.

    Raises
    ------
    DomainError
        If a node lies inside the exclusion radius of ``metric``.
    GeometryError
        If the radial graph property is lost.
    """
    return SurfaceGeometryCache(surface, metric)


def euclidean_center(surface: GraphSurface):
    """Mean position against the Euclidean induced measure."""
    grid = surface.grid
    Rjet = surface.radial_jets(1)
    X = _embedding_jets(grid, surface.center, Rjet, 1)
    w = grid.weights * np.linalg.norm(np.cross(X[(1, 0)], X[(0, 1)]), axis=1) / grid.sin_theta
    return (w[:, None] * X[(0, 0)]).sum(axis=0) / w.sum()


# -- identity residuals ------------------------------------------------------------------

def simons_residual(cache: SurfaceGeometryCache, metric=None, return_field=False):
    """Max-norm residual of the Simons identity for the Laplacian of ``k``.

    The identity checked is

        Lap k = Hess H + nabla tau + div T + 2 G ko

    with ``T(X, Y, Z) = Rm(X, Y, Z, nu)`` restricted to tangent vectors,
    ``tau_b = g^{cd} T_{c b d}`` and ``G`` the intrinsic Gauss curvature.
    Every derivative is spectral.
    """
    if metric is not None and metric is not cache.metric:
        cache = SurfaceGeometryCache(cache.surface, metric)
    K = cache.k_cart
    Pu = cache.proj_up
    T = cache.project(np.einsum("nabcd,nd->nabc", cache.riemann, cache.nu))
    tau = np.einsum("ncd,ncbd->nb", Pu, T)
    lapk = np.einsum("ncd,ncdab->nab", Pu, cache.covariant_derivative(cache.covariant_derivative(K)))
    hessH = cache.hessian(cache.H)
    dtau = cache.covariant_derivative(tau)
    divT = np.einsum("nkl,nklab->nab", Pu, cache.covariant_derivative(T))
    res = lapk - hessH - dtau - divT - 2.0 * cache.gauss_curvature[:, None, None] * cache.ko_cart
    r = cache.norm_g(res)
    return (float(r.max()), r) if return_field else float(r.max())


def codazzi_residual(cache: SurfaceGeometryCache):
    """Max-norm of ``nabla_c k_ab - nabla_a k_cb - Rm(c, a, b, nu)``."""
    dk = cache.covariant_derivative(cache.k_cart)
    T = cache.project(np.einsum("nabcd,nd->nabc", cache.riemann, cache.nu))
    res = dk - np.swapaxes(dk, 1, 2) - T
    return float(cache.norm_g(res).max())


def gauss_residuals(cache: SurfaceGeometryCache, metric=None):
    """Gauss equation residual and Gauss-Bonnet defect.

    Returns
    -------
    gauss_eq_residual : float
        ``max |2G - (S - 2 Ric(nu, nu)) - (H^2/2 - |ko|^2)|``.
    gauss_bonnet_defect : float
        ``|int G dmu - 4 pi|``.
    """
    if metric is not None and metric is not cache.metric:
        cache = SurfaceGeometryCache(cache.surface, metric)
    G = cache.gauss_curvature
    res = 2.0 * G - (cache.scalar - 2.0 * cache.ric_nn) - (0.5 * cache.H**2 - cache.konorm2)
    return float(np.abs(res).max()), abs(cache.integrate(G) - 4.0 * np.pi)


# -- norms and diagnostics -----------------------------------------------------------

def _lp(values, mu, p):
    values = np.abs(values)
    if p == np.inf:
        return float(values.max())
    return float(np.dot(mu, values**p) ** (1.0 / p))


def sobolev_norm(field, cache: SurfaceGeometryCache, k: int = 0, p: float = 2.0) -> float:
    """Area-radius weighted Sobolev norm.

    ``|u|_{W^{k+1,p}} = |u|_{L^p} + R |nabla u|_{W^{k,p}}`` with ``R`` the
    area radius and covariant derivatives of the induced metric.
    """
    if k not in (0, 1, 2):
        raise ConfigError("Sobolev order must be 0, 1 or 2")
    if not (p == np.inf or p >= 1):
        raise ConfigError("Sobolev exponent must be >= 1 or inf")
    vals = field.values if isinstance(field, ScalarField) else np.asarray(field, dtype=float)
    terms = [vals]
    if k >= 1:
        du = cache.gradient(vals)
        terms.append(du)
    if k >= 2:
        terms.append(cache.covariant_derivative(du))
    norms = [_lp(cache.norm_g(t) if t.ndim > 1 else t, cache.mu, p) for t in terms]
    R = cache.area_radius
    total = 0.0
    for nrm in reversed(norms):
        total = nrm + R * total
    return total


@dataclass
class ConcentricReport:
    """Diagnostics of the asymptotically concentric class."""

    center: np.ndarray
    center_norm: float
    min_distance: float
    area_radius: float
    willmore_defect: float
    center_ok: bool
    distance_ok: bool
    willmore_ok: bool

    @property
    def member(self) -> bool:
        return self.center_ok and self.distance_ok and self.willmore_ok


def concentric_check(surface, metric, eps, eta, c0, c1) -> ConcentricReport:
    """Check the three concentric-class conditions for one surface."""
    if not (0 < eta <= 1) or not (0 <= c0 < 1) or c1 < 0:
        raise ConfigError("need eta in (0, 1], c0 in [0, 1), c1 >= 0")
    cache = surface_geometry(surface, metric)
    z = euclidean_center(surface)
    R = cache.area_radius
    rmin = float(np.linalg.norm(cache.X, axis=1).min())
    will = cache.integrate(cache.H**2) - 16.0 * np.pi * (1 - cache.genus)
    zn = float(np.linalg.norm(z))
    return ConcentricReport(
        z,
        zn,
        rmin,
        R,
        float(will),
        zn <= c0 * R + c1 * R ** (1.0 - eta),
        R ** (4.0 + eta) <= rmin ** (5.0 + 2.0 * eps),
        will <= c1 / R**eta,
    )


def symmetry_defect(surface: GraphSurface):
    """Norms of ``f - f o antipode`` on the round base sphere.

    Returns the L2 norm and the area-radius weighted W^{2,2} norm.
    """
    grid = surface.grid
    f = surface.f.values
    d = f - f[grid.antipodal_index()]
    base = surface_geometry(GraphSurface.round(grid, surface.rho), euclidean())
    return sobolev_norm(d, base, 0, 2.0), sobolev_norm(d, base, 2, 2.0)


# -- JSON exchange ---------------------------------------------------------------------

def surface_to_dict(surface: GraphSurface) -> dict:
    g = surface.grid
    c = surface.f.coeffs
    return {
        "center": surface.center.tolist(),
        "rho": surface.rho,
        "bandlimit": g.L,
        "f_coefficients": [[int(g.ell[k]), int(g.em[k]), float(c[k])] for k in range(g.ncoef) if c[k] != 0.0],
    }


def surface_from_dict(d: dict) -> GraphSurface:
    """Parse the surface exchange format. Unknown keys are rejected."""
    if not isinstance(d, dict):
        raise ConfigError("surface description must be an object")
    extra = set(d) - {"center", "rho", "bandlimit", "f_coefficients"}
    if extra:
        raise ConfigError(f"unknown surface keys: {sorted(extra)}")
    for k in ("center", "rho", "bandlimit"):
        if k not in d:
            raise ConfigError(f"surface description missing {k!r}")
    L = d["bandlimit"]
    if not isinstance(L, int) or isinstance(L, bool):
        raise ConfigError("bandlimit must be an integer")
    grid = build_grid(L)
    c = np.zeros(grid.ncoef)
    for entry in d.get("f_coefficients", []):
        if not isinstance(entry, list) or len(entry) != 3:
            raise ConfigError("f_coefficients entries must be [l, m, value]")
        l, m, v = entry
        if not isinstance(l, int) or not isinstance(m, int) or l > L or abs(m) > l or l < 0:
            raise ConfigError(f"bad harmonic index ({l}, {m}) for bandlimit {L}")
        c[lm_index(l, m)] = float(v)
    center = d["center"]
    if not isinstance(center, list) or len(center) != 3:
        raise ConfigError("center must be a list of three numbers")
    return GraphSurface(center, float(d["rho"]), ScalarField(grid, coeffs=c))


def dump_surface(surface: GraphSurface, path) -> None:
    write_json(path, surface_to_dict(surface))


def load_surface(path) -> GraphSurface:
    try:
        return surface_from_dict(json.loads(Path(path).read_text()))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"surface file is not valid JSON: {exc}") from exc
