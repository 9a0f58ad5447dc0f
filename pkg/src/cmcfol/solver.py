"""Newton solver for CMC graphs, continuation from Schwarzschild and
foliation construction.

The unknown is the coefficient vector of the radial offset ``f``. The
residual is the Galerkin projection (unit-sphere quadrature) of
``H + 2/sigma``. Mean curvature at a node depends only on the radial jet
``(R, R_t, R_p, R_tt, R_tp, R_pp)`` there. The Jacobian is therefore
assembled from central differences of ``H`` in each of the six jet slots
followed by one matrix product with the differentiated basis.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import bisect

from .errors import ConfigError, DomainError, FoliationError, GeometryError, SolverError
from .functionals import adm_center_flux, hawking_mass
from .metric import AmbientMetricModel, interpolate, schwarzschild_base
from .operators import laplace_beltrami, lapse_rhs, solve, spectrum, split_translational, stability_operator
from .sphere import ScalarField, SphereGrid, build_grid
from .surface import (
    GraphSurface,
    mean_curvature_nodes,
    concentric_check,
    euclidean_center,
    surface_geometry,
)
from .tables import write_csv

log = logging.getLogger(__name__)

__all__ = [
    "NewtonInfo",
    "ContinuationTrace",
    "FoliationTable",
    "CenterLimit",
    "DeformationCheck",
    "schwarzschild_mean_curvature",
    "seed_radius",
    "mean_curvature_map",
    "cmc_jacobian",
    "stability_gammas",
    "newton_cmc",
    "continuation",
    "solve_leaf",
    "foliate",
    "richardson",
    "cmc_center_limit",
    "adm_center_limit",
    "deformation_center_derivative",
    "write_foliation",
]

_SLOTS = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
_SECOND = {(0, 0): (2, 0), (0, 1): (1, 1), (1, 0): (1, 1), (1, 1): (0, 2)}


def schwarzschild_mean_curvature(mass: float, r):
    """Mean curvature of the centered coordinate sphere of radius ``r``."""
    r = np.asarray(r, dtype=float)
    phi = 1.0 + mass / (2.0 * r)
    return -(2.0 / r) * (1.0 - mass / (2.0 * r)) / phi**3


def seed_radius(mass: float, sigma: float, r_min: float | None = None) -> float:
    """Coordinate radius of the Schwarzschild sphere with ``H = -2/sigma``.

    Bisection on the closed form, on the outer branch where ``|H|``
    decreases with ``r``.
    """
    if sigma <= 0:
        raise ConfigError("sigma must be positive")
    lo = 0.5 * abs(mass) * (1.0 + 1e-9) if mass < 0 else 0.0
    if mass > 0:
        # |H| peaks at r = (2 + sqrt 3) m / 2 in isotropic coordinates
        lo = 0.5 * (2.0 + np.sqrt(3.0)) * mass
    if r_min is not None:
        lo = max(lo, r_min)
    lo = max(lo, 1e-12)
    hi = max(4.0 * sigma, 10.0 * abs(mass) + 10.0)

    def F(r):
        return schwarzschild_mean_curvature(mass, r) + 2.0 / sigma

    if F(lo) > 0 or F(hi) < 0:
        raise SolverError(f"no Schwarzschild sphere with H = -2/{sigma} outside r = {lo:.6g}")
    return float(bisect(F, lo, hi, xtol=1e-12, rtol=4 * np.finfo(float).eps, maxiter=400))


# -- mean curvature map -------------------------------------------------------------

def _radial_jet_from_coeffs(grid, rho, c):
    out = {}
    for s in _SLOTS:
        v = grid.synthesize(c, *s)
        out[s] = v + rho if s == (0, 0) else v
    return out


def _H_from_jet(grid, center, jet, metric, metric_data=None):
    return mean_curvature_nodes(grid, center, jet, metric, metric_data, return_metric=True)


def mean_curvature_map(surface: GraphSurface, metric: AmbientMetricModel):
    """Nodal mean curvature of ``surface`` (the map Newton drives to ``-2/sigma``)."""
    jet = _radial_jet_from_coeffs(surface.grid, surface.rho, surface.f.coeffs)
    _check_surface(surface.grid, surface.center, jet, metric)
    return _H_from_jet(surface.grid, surface.center, jet, metric)[0]


def _check_surface(grid, center, jet, metric):
    if not np.all(jet[(0, 0)] > 0):
        raise GeometryError("radial function lost positivity")
    X = center + jet[(0, 0)][:, None] * grid.omega
    r = np.linalg.norm(X, axis=1)
    if np.any(r < metric.r_min):
        raise DomainError(f"surface reaches |x| = {r.min():.6g} < r_min = {metric.r_min:.6g}")


def cmc_jacobian(surface: GraphSurface, metric: AmbientMetricModel, step: float | None = None):
    """Jacobian of ``c -> analyze(H(f(c)))`` by central jet-slot differences.

    Returns the matrix and the nodal mean curvature at ``surface``.
    """
    grid = surface.grid
    jet = _radial_jet_from_coeffs(grid, surface.rho, surface.f.coeffs)
    h = 1e-6 * surface.rho if step is None else step
    H0, mc = _H_from_jet(grid, surface.center, jet, metric)
    acc = np.zeros((grid.size, grid.ncoef))
    for s in _SLOTS:
        jp = dict(jet)
        jm = dict(jet)
        jp[s] = jet[s] + h
        jm[s] = jet[s] - h
        reuse = None if s == (0, 0) else mc
        Hp, _ = _H_from_jet(grid, surface.center, jp, metric, reuse)
        Hm, _ = _H_from_jet(grid, surface.center, jm, metric, reuse)
        d = (Hp - Hm) / (2.0 * h)
        acc += (grid.weights * d)[:, None] * grid.basis_matrix(*s)
    J = grid.basis_matrix(0, 0).T @ acc
    return J, H0


@dataclass
class NewtonInfo:
    """Iteration record of one Newton solve."""

    iterations: int = 0
    history: list = field(default_factory=list)
    converged: bool = False
    residual: float = float("nan")


def newton_cmc(
    metric: AmbientMetricModel,
    sigma: float,
    initial: GraphSurface,
    tol: float | None = None,
    max_iter: int = 50,
    rcond: float = 1e-9,
    return_info: bool = False,
):
    """Solve ``H = -2/sigma`` for a radial graph by damped Newton.

    Parameters
    ----------
    metric : AmbientMetricModel
    sigma : float
        Mean-curvature radius.
    initial : GraphSurface
        Starting guess; its base center, base radius and grid are kept.
    tol : float, optional
        Target for ``max |H + 2/sigma|``; default ``1e-10 / sigma``.
    rcond : float
        Relative singular value cutoff of the least-squares step, which
        handles the exact translation kernel of flat space.

    Returns
    -------
    GraphSurface, or (GraphSurface, NewtonInfo) if ``return_info``.

    Raises
    ------
    SolverError
        If the tolerance is not met within ``max_iter`` iterations.
    GeometryError
        If the graph property is lost.
    """
    if not sigma > 0:
        raise ConfigError("sigma must be positive")
    tol = 1e-10 / sigma if tol is None else tol
    grid = initial.grid
    center, rho = initial.center, initial.rho
    c = initial.f.coeffs.copy()
    target = -2.0 / sigma
    info = NewtonInfo()
    B0w = grid.basis_matrix(0, 0).T * grid.weights

    def residual(cv):
        jet = _radial_jet_from_coeffs(grid, rho, cv)
        _check_surface(grid, center, jet, metric)
        H, _ = _H_from_jet(grid, center, jet, metric)
        return H - target

    res = residual(c)
    for it in range(max_iter + 1):
        rinf = float(np.abs(res).max())
        info.history.append(rinf)
        if rinf <= tol:
            info.converged = True
            break
        if it == max_iter:
            break
        surf = GraphSurface(center, rho, ScalarField(grid, coeffs=c))
        J, _ = cmc_jacobian(surf, metric, step=1e-6 * sigma)
        F = B0w @ res
        delta = scipy.linalg.lstsq(J, -F, cond=rcond, lapack_driver="gelsd")[0]
        alpha = 1.0
        fnorm = np.linalg.norm(F)
        while True:
            trial = c + alpha * delta
            try:
                rt = residual(trial)
                ok = np.linalg.norm(B0w @ rt) < fnorm or float(np.abs(rt).max()) < rinf
            except (GeometryError, DomainError):
                ok = False
            if ok:
                c, res = trial, rt
                break
            alpha *= 0.5
            if alpha < 1e-4:
                info.iterations = it + 1
                info.residual = rinf
                raise SolverError(
                    f"Newton line search failed at iteration {it} (residual {rinf:.3e})", info.history
                )
        info.iterations = it + 1
    info.residual = info.history[-1]
    if not info.converged:
        raise SolverError(
            f"Newton did not reach {tol:.3e} in {max_iter} iterations (residual {info.residual:.3e})",
            info.history,
        )
    out = GraphSurface(center, rho, ScalarField(grid, coeffs=c))
    log.debug("newton sigma=%g iterations=%d residual=%.3e", sigma, info.iterations, info.residual)
    return (out, info) if return_info else out


# -- continuation ----------------------------------------------------------------------

@dataclass
class ContinuationTrace:
    """Samples of the interpolation path ``tau -> Sigma_tau``."""

    sigma: float
    taus: list = field(default_factory=list)
    surfaces: list = field(default_factory=list)
    iterations: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    centers: list = field(default_factory=list)
    willmore: list = field(default_factory=list)
    lapse_rhs_norm: list = field(default_factory=list)
    translational_lapse: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def endpoint(self) -> GraphSurface:
        return self.surfaces[-1]


def _sigma0(metric, sigma0):
    return 15.0 * abs(metric.mass) if sigma0 is None else float(sigma0)


def _grid_of(bandlimit):
    return bandlimit if isinstance(bandlimit, SphereGrid) else build_grid(int(bandlimit))


def continuation(
    target: AmbientMetricModel,
    sigma: float,
    bandlimit=16,
    schedule=None,
    dtau: float = 0.25,
    dtau_min: float = 1e-4,
    sigma0: float | None = None,
    base_center=None,
    diagnostics: bool = True,
    tol: float | None = None,
) -> ContinuationTrace:
    """Deform the Schwarzschild CMC sphere along ``g_tau`` up to ``tau = 1``.

    Parameters
    ----------
    schedule : sequence of float, optional
        Explicit increasing ``tau`` values ending at 1; overrides the
        adaptive stepping.
    dtau, dtau_min : float
        Initial adaptive step and the floor below which the run is
        declared stuck. Failed steps are halved; a successful step lets
        the next one double again up to ``dtau``.
    base_center : array_like, optional
        Center of the Schwarzschild base; defaults to the target's
        declared center.

    Raises
    ------
    ConfigError
        If the mass vanishes or ``sigma < sigma0``.
    SolverError
        If the step floor is reached; the partial trace is attached.
    """
    if target.mass == 0:
        raise ConfigError("continuation needs a non-vanishing mass")
    s0 = _sigma0(target, sigma0)
    if not sigma >= s0:
        raise ConfigError(f"sigma = {sigma} below sigma0 = {s0}")
    grid = _grid_of(bandlimit)
    schw = schwarzschild_base(target, base_center)
    r0 = seed_radius(target.mass, sigma)
    surf = GraphSurface.round(grid, r0, schw.center)
    trace = ContinuationTrace(float(sigma))
    surf, info = newton_cmc(schw, sigma, surf, tol=tol, return_info=True)
    _record(trace, 0.0, surf, info, schw, target, schw, sigma, diagnostics)
    if schedule is not None:
        taus = [float(t) for t in schedule]
        if taus and taus[0] == 0.0:
            taus = taus[1:]
        if not taus or taus[-1] != 1.0 or np.any(np.diff([0.0] + taus) <= 0):
            raise ConfigError("tau schedule must increase strictly and end at 1")
        for t in taus:
            gt = interpolate(schw, target, t)
            surf, info = newton_cmc(gt, sigma, surf, tol=tol, return_info=True)
            _record(trace, t, surf, info, gt, target, schw, sigma, diagnostics)
        return trace
    if target.same_as(schw):
        _record(trace, 1.0, surf, info, target, target, schw, sigma, diagnostics)
        return trace
    tau, step = 0.0, float(dtau)
    while tau < 1.0:
        t_next = min(1.0, tau + step)
        gt = interpolate(schw, target, t_next)
        try:
            new, info = newton_cmc(gt, sigma, surf, tol=tol, return_info=True)
        except (SolverError, GeometryError, DomainError) as exc:
            trace.failures.append((t_next, str(exc)))
            step *= 0.5
            if step < dtau_min:
                raise SolverError(f"continuation stuck at tau = {tau:.6g}", trace=trace) from exc
            continue
        surf, tau = new, t_next
        _record(trace, tau, surf, info, gt, target, schw, sigma, diagnostics)
        step = min(2.0 * step, dtau)
    return trace


def solve_leaf(target: AmbientMetricModel, sigma: float, bandlimit=16, tol: float | None = None):
    """CMC surface with ``H = -2/sigma`` by the cheapest sound route.

    Massless models start Newton from the round sphere of radius ``sigma``;
    pure Schwarzschild starts from the exact seed sphere; anything else
    goes through :func:`continuation`. Returns ``(surface, history)``.
    """
    grid = _grid_of(bandlimit)
    if target.mass == 0:
        surf, info = newton_cmc(target, sigma, GraphSurface.round(grid, sigma), tol=tol, return_info=True)
        return surf, info.history
    base = schwarzschild_base(target)
    if target.same_as(base):
        r0 = seed_radius(target.mass, sigma)
        surf, info = newton_cmc(target, sigma, GraphSurface.round(grid, r0, base.center), tol=tol, return_info=True)
        return surf, info.history
    trace = continuation(target, sigma, grid, diagnostics=False, tol=tol)
    return trace.endpoint, trace.residuals


def _record(trace, tau, surf, info, gt, target, schw, sigma, diagnostics):
    trace.taus.append(float(tau))
    trace.surfaces.append(surf)
    trace.iterations.append(info.iterations)
    trace.residuals.append(info.residual)
    trace.centers.append(euclidean_center(surf))
    if not diagnostics:
        for lst in (trace.willmore, trace.lapse_rhs_norm, trace.translational_lapse):
            lst.append(float("nan"))
        return
    cache = surface_geometry(surf, gt)
    trace.willmore.append(cache.integrate(cache.H**2) - 16.0 * np.pi)
    rhs = lapse_rhs(cache, target, schw)
    trace.lapse_rhs_norm.append(float(np.sqrt(cache.integrate(rhs.values**2))))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lap_spec = spectrum(laplace_beltrami(cache), 8)
        u = solve(stability_operator(cache), rhs)
        trans, _ = split_translational(u, lap_spec, sigma)
    trace.translational_lapse.append(float(np.sqrt(cache.integrate(trans.values**2))))


# -- foliation ------------------------------------------------------------------------

@dataclass
class FoliationTable:
    """Leaves of the CMC foliation on a geometric ``sigma`` grid."""

    sigmas: list = field(default_factory=list)
    surfaces: list = field(default_factory=list)
    hawking: list = field(default_factory=list)
    centers: list = field(default_factory=list)
    gammas: list = field(default_factory=list)
    lapse_min: list = field(default_factory=list)
    lapse_max: list = field(default_factory=list)
    lapse_dev: list = field(default_factory=list)
    lapse_identity: list = field(default_factory=list)
    area_radius: list = field(default_factory=list)
    concentric: list = field(default_factory=list)
    epsilon: float = 0.5
    failure: tuple | None = None

    COLUMNS = (
        "sigma",
        "hawking",
        "center_x",
        "center_y",
        "center_z",
        "gamma1",
        "gamma2",
        "gamma3",
        "gamma4",
        "lapse_min",
        "lapse_max",
        "lapse_dev",
        "lapse_identity_residual",
        "area_radius",
        "willmore_defect",
    )

    def rows(self):
        for k, s in enumerate(self.sigmas):
            yield [
                s,
                self.hawking[k],
                *self.centers[k],
                *self.gammas[k],
                self.lapse_min[k],
                self.lapse_max[k],
                self.lapse_dev[k],
                self.lapse_identity[k],
                self.area_radius[k],
                self.concentric[k].willmore_defect,
            ]


def stability_gammas(cache, count: int = 4):
    """The ``count`` eigenvalues of ``-L`` smallest in absolute value, in
    that order."""
    sp = spectrum(stability_operator(cache), min(cache.grid.ncoef, 16))
    order = np.argsort(np.abs(sp.values), kind="stable")
    return sp.values[order[:count]]


def _leaf(target, sigma, guess, tol):
    return newton_cmc(target, sigma, guess, tol=tol)


def foliate(
    target: AmbientMetricModel,
    sigma_min: float,
    sigma_max: float,
    count: int,
    bandlimit=16,
    sigma0: float | None = None,
    lapse_step: float = 1e-3,
    tol: float | None = None,
    concentric_params=(0.5, 1.0, 0.5, 10.0),
    raise_on_failure: bool = False,
) -> FoliationTable:
    """Build CMC leaves for ``sigma`` on a geometric grid.

    The first leaf comes from :func:`continuation`; later leaves are
    Newton solves warm-started from the radially rescaled previous leaf.
    The normal lapse ``u = g(d X / d sigma, nu)`` is obtained from two
    auxiliary leaves at ``sigma (1 +- lapse_step)``; the residual of
    ``L u = 2/sigma^2`` (equivalently ``L(u - 1) = -Ric(nu,nu) - |ko|^2``)
    is reported relative to ``2/sigma^2``.

    Raises
    ------
    ConfigError
        For vanishing mass, ``count < 2`` or ``sigma_min < sigma0``.
    FoliationError
        If some leaf has a non-positive lapse.
    """
    if target.mass == 0:
        raise ConfigError("foliation needs a non-vanishing mass")
    if count < 2:
        raise ConfigError("need at least two leaves")
    if not sigma_max > sigma_min:
        raise ConfigError("sigma_max must exceed sigma_min")
    s0 = _sigma0(target, sigma0)
    if not sigma_min >= s0:
        raise ConfigError(f"sigma_min = {sigma_min} below sigma0 = {s0}")
    grid = _grid_of(bandlimit)
    sig = sigma_min * (sigma_max / sigma_min) ** (np.arange(count) / (count - 1))
    table = FoliationTable(epsilon=target.epsilon)
    prev = None
    for k, s in enumerate(sig):
        s = float(s)
        try:
            if prev is None:
                leaf = continuation(target, s, grid, sigma0=s0, diagnostics=False, tol=tol).endpoint
            else:
                leaf = _leaf(target, s, prev[0].scaled(s / prev[1]), tol)
            plus = _leaf(target, s * (1 + lapse_step), leaf.scaled(1 + lapse_step), tol)
            minus = _leaf(target, s * (1 - lapse_step), leaf.scaled(1 - lapse_step), tol)
        except SolverError as exc:
            table.failure = (s, str(exc))
            if raise_on_failure:
                raise
            break
        cache = surface_geometry(leaf, target)
        dX = (plus.positions() - minus.positions()) / (2.0 * lapse_step * s)
        # radial correspondence differs from normal motion only tangentially
        u = np.einsum("na,na->n", cache.nu_low, dX)
        lu = cache.laplacian_values(u) + (cache.ric_nn + cache.knorm2) * u
        table.sigmas.append(s)
        table.surfaces.append(leaf)
        table.hawking.append(hawking_mass(cache))
        table.centers.append(tuple(euclidean_center(leaf)))
        table.gammas.append(tuple(stability_gammas(cache)))
        table.lapse_min.append(float(u.min()))
        table.lapse_max.append(float(u.max()))
        table.lapse_dev.append(float(np.abs(u - 1.0).max()))
        table.lapse_identity.append(float(np.abs(lu - 2.0 / s**2).max() * s**2 / 2.0))
        table.area_radius.append(cache.area_radius)
        eta, c0, c1 = concentric_params[1:]
        table.concentric.append(concentric_check(leaf, target, target.epsilon, eta, c0, c1))
        prev = (leaf, s)
        if u.min() <= 0:
            raise FoliationError(f"lapse not positive on leaf sigma = {s:.6g} (min {u.min():.3g})", trace=table)
    return table


def write_foliation(table: FoliationTable, path, surface_dir=None):
    """Write the table CSV and, optionally, one JSON file per leaf."""
    from .surface import surface_to_dict
    from .tables import write_json

    out = write_csv(path, FoliationTable.COLUMNS, table.rows())
    if surface_dir is not None:
        for k, s in enumerate(table.surfaces):
            write_json(f"{surface_dir}/leaf_{k:03d}.json", surface_to_dict(s))
    return out


# -- centers --------------------------------------------------------------------------

def richardson(h, values, order: int | None = None):
    """Polynomial extrapolation of ``values(h)`` to ``h = 0``.

    Fits a polynomial of degree ``order`` (default ``len(h) - 1``) by least
    squares in each trailing component and returns its constant term.
    """
    h = np.asarray(h, dtype=float)
    v = np.asarray(values, dtype=float)
    deg = len(h) - 1 if order is None else int(order)
    V = np.vander(h, deg + 1, increasing=True)
    coef = np.linalg.lstsq(V, v.reshape(len(h), -1), rcond=None)[0]
    return coef[0].reshape(v.shape[1:])


@dataclass
class CenterLimit:
    """Extrapolated center with its convergence diagnosis."""

    value: np.ndarray
    estimates: list
    spread: float
    converged: bool
    exponent: float


def _center_limit(h, z, tol, exponent):
    z = np.asarray(z, dtype=float)
    est = []
    for k in range(2, len(h) + 1):
        est.append(richardson(h[-k:], z[-k:]))
    if len(est) >= 2:
        spread = float(np.abs(est[-1] - est[-2]).max())
    else:
        spread = float("nan")
    value = est[-1]
    return CenterLimit(value, est, spread, bool(spread <= tol) if np.isfinite(spread) else False, exponent)


def cmc_center_limit(table: FoliationTable, epsilon: float | None = None, tol: float = 1e-3) -> CenterLimit:
    """Extrapolate leaf centers ``z(sigma)`` to ``sigma -> infinity`` in
    powers of ``1/sigma^epsilon``.

    The limit need not exist in general, so disagreement of successive
    extrapolants beyond ``tol`` is reported as non-convergence rather than
    raised.
    """
    if len(table.sigmas) < 3:
        raise ConfigError("center extrapolation needs at least three leaves")
    eps = table.epsilon if epsilon is None else epsilon
    h = np.asarray(table.sigmas) ** (-eps)
    return _center_limit(h, table.centers, tol, eps)


def adm_center_limit(metric, radii=(100.0, 200.0, 400.0, 800.0), exponent: float = 1.0, tol: float = 1e-3, grid=None):
    """ADM center fluxes over coordinate spheres, extrapolated in ``1/R^exponent``."""
    radii = np.asarray(radii, dtype=float)
    z = [adm_center_flux(metric, R, grid) for R in radii]
    return _center_limit(radii ** (-exponent), z, tol, exponent)


@dataclass
class DeformationCheck:
    predicted: np.ndarray
    finite_difference: np.ndarray

    @property
    def error(self) -> float:
        return float(np.abs(self.predicted - self.finite_difference).max())


def _deformed_center(surface, cache, uvec, eta):
    grid = surface.grid
    X = cache.X + eta * uvec
    dV = cache.chart_gradient(uvec)  # (N, 2, 3)
    Xt = cache.XI[:, 0] + eta * dV[:, 0]
    Xp = cache.XI[:, 1] + eta * dV[:, 1]
    w = grid.weights * np.linalg.norm(np.cross(Xt, Xp), axis=1) / grid.sin_theta
    return (w[:, None] * X).sum(axis=0) / w.sum()


def deformation_center_derivative(surface: GraphSurface, metric: AmbientMetricModel, lapse, eta_rel: float = 1e-5):
    """Predicted center velocity ``3 mean(nu^i u)`` and its central
    finite-difference counterpart.

    The surface is moved to ``X + eta u nu`` for ``eta = +-eta_rel*R``
    (``R`` the area radius) and its Euclidean center recomputed.
    """
    cache = surface_geometry(surface, metric)
    u = lapse.values if isinstance(lapse, ScalarField) else np.asarray(lapse, dtype=float)
    pred = 3.0 * (cache.mu @ (cache.nu * u[:, None])) / cache.area
    eta = eta_rel * cache.area_radius
    uvec = u[:, None] * cache.nu
    zp = _deformed_center(surface, cache, uvec, eta)
    zm = _deformed_center(surface, cache, uvec, -eta)
    return DeformationCheck(pred, (zp - zm) / (2.0 * eta))
