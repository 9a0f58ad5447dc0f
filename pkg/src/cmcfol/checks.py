"""Quantitative acceptance checks shared by ``cmcfol verify`` and the test suite.

Each check returns :class:`CheckResult` records. Reference numbers come
from closed-form oracles (conformally flat Schwarzschild, Euclidean
spheres, exact ODE solutions). A few checks reproduce reference
constants that are known to be inconsistent with their own closed form;
those are marked ``known_inconsistent`` and are expected to fail.
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from .functionals import (
    adm_mass_flux,
    center_integrand,
    hawking_mass,
    mass_curvature_integral,
    ricci_flux,
)
from .metric import AmbientMetricModel, bianchi_residual, builtin_model, euclidean, fibonacci_sphere, schwarzschild
from .ode import PowerLawMajorant, fit_asymptote
from .operators import laplace_beltrami, spectrum
from .solver import (
    adm_center_limit,
    cmc_center_limit,
    continuation,
    deformation_center_derivative,
    foliate,
    newton_cmc,
    seed_radius,
    solve_leaf,
    stability_gammas,
)
from .sphere import ScalarField, build_grid
from .surface import (
    GraphSurface,
    codazzi_residual,
    euclidean_center,
    gauss_residuals,
    simons_residual,
    surface_geometry,
)

__all__ = ["CheckResult", "CRITERIA", "run_criteria", "identity_suite", "verify_model", "SCHWARZSCHILD_SIGMA_R10"]

# sigma with H = -2/sigma on the r = 10 sphere of Schwarzschild m = 1:
# H(10) = -(2/10)(1 - 1/20)/(1 + 1/20)^3, so sigma = 1.157625/0.095
SCHWARZSCHILD_SIGMA_R10 = 12.185526315789474
PRINTED_SIGMA_R10 = 12.185541
PRINTED_FLUX_R1000 = 1.001501500

SIMONS_TOL = 1e-8
GAUSS_EQ_TOL = 1e-6
GAUSS_BONNET_TOL = 1e-9
TRACE_TOL = 1e-10
BIANCHI_TOL = 1e-6
ROUNDOFF_FLOOR = 1e-12


@dataclass
class CheckResult:
    criterion: int
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""
    known_inconsistent: bool = False

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        extra = " [reference constant inconsistent with its closed form]" if self.known_inconsistent else ""
        det = f" {self.detail}" if self.detail else ""
        return f"{tag} [{self.criterion}] {self.name}: {self.value:.6e} (tol {self.tolerance:.1e}){det}{extra}"


def _le(criterion, name, value, tol, detail="", known=False):
    value = float(value)
    return CheckResult(criterion, name, value, tol, bool(value <= tol), detail, known)


def _timed(criterion, name, t0, limit):
    return _le(criterion, f"{name} runtime [s]", time.perf_counter() - t0, limit)


def bumpy_surface(L: int, rho: float = 10.0, pole: float = 1.6) -> GraphSurface:
    """Analytic but not band-limited test graph, ``1/(pole - a.omega)``.

    Its harmonic coefficients decay geometrically, so spectral residuals
    are visible at moderate bandlimits.
    """
    g = build_grid(L)
    f = 1.0 / (pole - 0.8 * g.omega[:, 0] - 0.6 * g.omega[:, 2])
    return GraphSurface(np.zeros(3), rho, ScalarField(g, values=f - f.mean()))


def _leaf(model, sigma, L):
    return solve_leaf(model, sigma, build_grid(L))[0]


# -- criteria ------------------------------------------------------------------------

def criterion_1(L: int = 32):
    out = []
    g = build_grid(L)
    S = schwarzschild(1.0)
    t0 = time.perf_counter()
    s = newton_cmc(S, SCHWARZSCHILD_SIGMA_R10, GraphSurface.round(g, 9.0))
    c = surface_geometry(s, S)
    out.append(_le(1, "radius deviation from r=10", np.abs(s.radial - 10.0).max(), 1e-8))
    out.append(_le(1, "Hawking mass - 1", abs(hawking_mass(c) - 1.0), 1e-8))
    out.append(_le(1, "Euclidean center", np.abs(euclidean_center(s)).max(), 1e-9))
    out.append(_timed(1, "solve", t0, 30.0))
    s2 = newton_cmc(S, PRINTED_SIGMA_R10, GraphSurface.round(g, 9.0))
    out.append(
        _le(1, "radius deviation from r=10 at printed sigma 12.185541", np.abs(s2.radial - 10.0).max(), 1e-8, known=True)
    )
    return out


def criterion_2(L: int = 32):
    out = []
    S = schwarzschild(1.0)
    g = build_grid(L)
    t0 = time.perf_counter()
    f100 = adm_mass_flux(S, 100.0, g)
    f1000 = adm_mass_flux(S, 1000.0, g)
    out.append(_le(2, "flux(100) - 1.015075125", abs(f100 - 1.015075125), 1e-8))
    out.append(_le(2, "flux(1000) - (1 + 1/2000)^3", abs(f1000 - (1.0 + 1.0 / 2000.0) ** 3), 1e-8))
    out.append(_le(2, "flux(1000) - 1.001501500", abs(f1000 - PRINTED_FLUX_R1000), 1e-8, known=True))
    for r in (10.0, 20.0, 40.0):
        c = surface_geometry(GraphSurface.round(g, r), S)
        out.append(_le(2, f"curvature mass integral at r={r:g} - 1", abs(mass_curvature_integral(c) - 1.0), 1e-7))
    out.append(_timed(2, "mass", t0, 10.0))
    return out


def criterion_3(L: int = 32, sigma: float = 50.0):
    out = []
    t0 = time.perf_counter()
    target = 6.0 / sigma**3
    for m in (1.0, -1.0):
        S = schwarzschild(m)
        s = newton_cmc(S, sigma, GraphSurface.round(build_grid(L), seed_radius(m, sigma)))
        gam = stability_gammas(surface_geometry(s, S))
        if m > 0:
            out.append(_le(3, "max |gamma_i/(6m/sigma^3) - 1|, i<=3", np.abs(gam[:3] / target - 1.0).max(), 0.1))
            out.append(
                CheckResult(3, "|gamma_4| >= 3/(2 sigma^2)", abs(gam[3]), 1.5 / sigma**2, bool(abs(gam[3]) >= 1.5 / sigma**2), "lower bound")
            )
            pos = gam[:3]
        else:
            flipped = bool(np.all(np.sign(gam[:3]) == -np.sign(pos)))
            out.append(CheckResult(3, "sign flip of small eigenvalues for m=-1", float(np.max(gam[:3])), 0.0, flipped, "max of flipped triple"))
    out.append(_timed(3, "spectrum", t0, 120.0))
    return out


def lemma_eigen_residuals(sigma: float, L: int = 32, mass: float = 1.0, sign: float = 1.0):
    """``|lambda_i - (2/s^2 + sign 6 m_H/s^3 + int Ric(nu,nu) f_i^2)|`` for the
    ``l = 1`` band of ``-Lap`` on the Schwarzschild CMC sphere."""
    S = schwarzschild(mass)
    s = newton_cmc(S, sigma, GraphSurface.round(build_grid(L), seed_radius(mass, sigma)))
    c = surface_geometry(s, S)
    mh = hawking_mass(c)
    sp = spectrum(laplace_beltrami(c), 5)
    res = []
    for i in (1, 2, 3):
        fi = sp.function(i).values
        pred = 2.0 / sigma**2 + sign * 6.0 * mh / sigma**3 + c.integrate(c.ric_nn * fi**2)
        res.append(abs(sp.values[i] - pred))
    return np.array(res)


def criterion_4(L: int = 32):
    out = []
    for sign, known, label in ((-1.0, True, "printed sign -6m_H"), (1.0, False, "sign +6m_H")):
        scaled = []
        for sigma in (25.0, 50.0):
            r = lemma_eigen_residuals(sigma, L, 1.0, sign)
            tol = 0.2 * 6.0 / sigma**3
            out.append(_le(4, f"eigenvalue identity ({label}) sigma={sigma:g}", r.max(), tol, known=known))
            scaled.append(r.max() * sigma**3)
        out.append(
            CheckResult(
                4,
                f"residual*sigma^3 decreases 25->50 ({label})",
                scaled[1],
                scaled[0],
                bool(scaled[1] < scaled[0]),
                "value at 50 vs at 25",
                known,
            )
        )
    return out


def criterion_5(L: int = 32, sigma: float = 20.0):
    out = []
    t0 = time.perf_counter()
    M = builtin_model("perturbed")
    g = build_grid(L)
    a = continuation(M, sigma, g, diagnostics=False).endpoint
    b = continuation(M, sigma, g, schedule=[0.1, 0.3, 0.6, 1.0], diagnostics=False).endpoint
    d = newton_cmc(M, sigma, GraphSurface.round(g, a.rho))
    out.append(_le(5, "continuation vs direct Newton |f1-f2|", np.abs(a.radial - d.radial).max(), 1e-7))
    out.append(_le(5, "two tau schedules |f1-f2|", np.abs(a.radial - b.radial).max(), 1e-7))
    tab = foliate(M, 20.0, 80.0, 5, g)
    lo = min(tab.lapse_min) if len(tab.sigmas) == 5 else -np.inf
    out.append(CheckResult(5, "min lapse over 5 leaves", lo, 0.0, bool(lo > 0), "must be positive"))
    out.append(_timed(5, "continuation+foliation", t0, 600.0))
    return out


def criterion_6(L: int = 32):
    out = []
    g = build_grid(L)
    z0 = np.array([0.3, 0.0, 0.0])
    T = builtin_model("translated_schwarzschild")
    tab = foliate(T, 20.0, 80.0, 5, g)
    cmc = cmc_center_limit(tab)
    adm = adm_center_limit(T, grid=g)
    out.append(_le(6, "translated: |cmc center limit - z0|", np.abs(cmc.value - z0).max(), 1e-6))
    out.append(_le(6, "translated: |ADM center extrapolation - z0|", np.abs(adm.value - z0).max(), 5e-3))
    P = builtin_model("perturbed_rt")
    tab = foliate(P, 20.0, 80.0, 5, g)
    cmc = cmc_center_limit(tab)
    adm = adm_center_limit(P, grid=g)
    out.append(_le(6, "symmetric perturbation: |cmc limit - ADM limit|", np.abs(cmc.value - adm.value).max(), 5e-3))
    return out


def criterion_7(L: int = 32):
    out = []
    g = build_grid(L)
    E = euclidean()
    s = GraphSurface.round(g, 1.0)
    c = surface_geometry(s, E)
    d = deformation_center_derivative(s, E, c.nu_low[:, 0])
    out.append(_le(7, "unit sphere: |predicted - (1,0,0)|", np.abs(d.predicted - [1.0, 0.0, 0.0]).max(), 1e-6))
    out.append(_le(7, "unit sphere: |finite difference - predicted|", d.error, 1e-6))
    S = schwarzschild(1.0)
    leaf = newton_cmc(S, 20.0, GraphSurface.round(g, seed_radius(1.0, 20.0)))
    c = surface_geometry(leaf, S)
    d = deformation_center_derivative(leaf, S, c.nu_low[:, 1])
    out.append(_le(7, "Schwarzschild sigma=20: relative FD error", d.error / np.linalg.norm(d.predicted), 1e-3))
    return out


def _surface_residuals(surface, model):
    c = surface_geometry(surface, model)
    ge, gb = gauss_residuals(c)
    tr = abs(c.integrate(np.einsum("nab,nab->n", c.proj_up, c.ko_cart)))
    return {
        "simons": simons_residual(c),
        "codazzi": codazzi_residual(c),
        "gauss_equation": ge,
        "gauss_bonnet": gb,
        "trace_ko": tr,
    }


_SURFACE_TOLS = {
    "simons": SIMONS_TOL,
    "codazzi": SIMONS_TOL,
    "gauss_equation": GAUSS_EQ_TOL,
    "gauss_bonnet": GAUSS_BONNET_TOL,
    "trace_ko": TRACE_TOL,
}


def identity_suite(model: AmbientMetricModel, L: int = 32, coarse: int | None = 16, criterion: int = 8, tag: str = ""):
    """Identity residuals of ``model`` on a round and a non-round surface,
    plus the ambient contracted Bianchi identity.

    With ``coarse`` set, residuals above the round-off floor must also
    shrink tenfold from ``coarse`` to ``L``.
    """
    out = []
    name = tag or model.name or model.kind
    rho = max(10.0, 2.0 * model.r_min + 4.0)
    shapes = {"round": lambda LL: GraphSurface.round(build_grid(LL), rho), "bumpy": lambda LL: bumpy_surface(LL, rho)}
    for label, make in shapes.items():
        fine = _surface_residuals(make(L), model)
        rough = _surface_residuals(make(coarse), model) if coarse else None
        for key, tol in _SURFACE_TOLS.items():
            out.append(_le(criterion, f"{name} {label} {key} L={L}", fine[key], tol))
            if rough is not None and rough[key] > ROUNDOFF_FLOOR:
                ratio = fine[key] / rough[key]
                out.append(_le(criterion, f"{name} {label} {key} ratio L={L}/L={coarse}", ratio, 0.1))
    rng = np.random.default_rng(0)
    pts = fibonacci_sphere(100) * rng.uniform(max(model.r_min, 1.0) * 1.5 + 1.0, 40.0, 100)[:, None]
    out.append(_le(criterion, f"{name} contracted Bianchi", np.abs(bianchi_residual(model, pts)).max(), BIANCHI_TOL))
    return out


def criterion_8(L: int = 32):
    out = []
    for key in ("euclidean", "schwarzschild", "perturbed"):
        out.extend(identity_suite(builtin_model(key), L, 16))
    return out


def criterion_9(L: int = 32):
    out = []
    M = builtin_model("perturbed")
    eps = M.epsilon
    bound = 2.0 ** (-eps) * 1.3
    g = build_grid(L)
    ric, diff = [], []
    for R in (20.0, 40.0, 80.0):
        leaf = continuation(M, R, g, diagnostics=False).endpoint
        c = surface_geometry(leaf, M)
        cs = surface_geometry(GraphSurface.round(g, R), M)
        ric.append(np.linalg.norm(ricci_flux(cs)))
        diff.append(np.linalg.norm(center_integrand(c, M) - center_integrand(cs, M)))
    for k in range(2):
        R = 20.0 * 2**k
        out.append(_le(9, f"Ricci flux ratio R={R:g}->{2 * R:g}", ric[k + 1] / ric[k], bound))
        out.append(_le(9, f"center integrand difference ratio R={R:g}->{2 * R:g}", diff[k + 1] / diff[k], bound))
    return out


def criterion_10():
    out = []
    t = np.linspace(1.0, 50.0, 40)
    fit = fit_asymptote(t, 2.0 + 5.0 / t**2, 2.0, 2.0, 4.0)
    out.append(_le(10, "exact profile: |eta' - 5|", abs(fit.eta_prime - 5.0), 1e-10))
    out.append(_le(10, "exact profile: |limit - 2|", abs(fit.limit - 2.0), 1e-12))
    out.append(_le(10, "exact profile: max residual", fit.residuals.max(), 1e-12))
    fit = fit_asymptote(t, 0.5 - 0.5 / t**2, 2.0, 2.0, 1.0)
    out.append(_le(10, "linear ODE solution: |eta' + 1/2|", abs(fit.eta_prime + 0.5), 1e-10))
    out.append(_le(10, "linear ODE solution: |limit - 1/2|", abs(fit.limit - 0.5), 1e-10))
    t = np.linspace(2.0, 60.0, 60)
    # |f' + 2f/t - 1/t| = |cos t/t^3 - sin t/t^4| <= (1 + 1/t0)/t^3
    fit = fit_asymptote(t, 0.5 + np.sin(t) / t**3, 2.0, 2.0, 1.0, PowerLawMajorant([(1.5, 1.0)]))
    out.append(_le(10, "oscillating input, h = c/t: worst ratio", fit.worst_ratio, 1.0))
    # |cos t/t^4 - 2 sin t/t^5| <= (1 + 2/t0)/t^4, i.e. h = 2/t^2 with eps = 2
    fit = fit_asymptote(t, 0.5 + np.sin(t) / t**4, 2.0, 2.0, 1.0, PowerLawMajorant([(2.0, 2.0)]))
    out.append(_le(10, "oscillating input, h = c/t^2: worst ratio", fit.worst_ratio, 1.0))
    fit = fit_asymptote(t, 0.5 + 1.0 / t, 2.0, 2.0, 1.0, PowerLawMajorant([(1.0, 2.0)]))
    out.append(
        CheckResult(10, "violating input flagged", fit.worst_ratio, 1.0, not fit.satisfied, "worst ratio must exceed 1")
    )
    return out


def verify_model(model: AmbientMetricModel, L: int = 32, sigma: float | None = None, seed: int = 0):
    """Identity residual suite for one model.

    Simons, Codazzi, Gauss, Gauss-Bonnet, trace and Bianchi residuals;
    the eigenvalue identity for the ``l = 1`` band on a CMC leaf (with
    ``+6 m_H / sigma^3``); the center-velocity formula on the unit
    sphere and on the leaf; the synthetic asymptote-fitter cases.
    """
    # residual tolerances are calibrated at L = 32
    out = identity_suite(model, max(L, 32), None, criterion=0)
    if seed:
        rng = np.random.default_rng(seed)
        pts = fibonacci_sphere(100) * rng.uniform(max(model.r_min, 1.0) * 1.5 + 1.0, 40.0, 100)[:, None]
        out.append(_le(0, "contracted Bianchi (seeded points)", np.abs(bianchi_residual(model, pts)).max(), BIANCHI_TOL))
    m = abs(model.mass)
    if sigma is None:
        sigma = max(50.0, 50.0 * m, 4.0 * model.r_min)
    if model.mass == 0 and not model.is_flat:
        leaf = None
    else:
        leaf = _leaf(model, sigma, L)
    if leaf is not None:
        c = surface_geometry(leaf, model)
        mh = hawking_mass(c)
        sp = spectrum(laplace_beltrami(c), 5)
        worst = 0.0
        for i in (1, 2, 3):
            fi = sp.function(i).values
            pred = 2.0 / sigma**2 + 6.0 * mh / sigma**3 + c.integrate(c.ric_nn * fi**2)
            worst = max(worst, abs(sp.values[i] - pred))
        tol = 0.2 * 6.0 * m / sigma**3 if m > 0 else 1e-10 / sigma**2
        out.append(_le(0, f"eigenvalue identity on CMC leaf sigma={sigma:g}", worst, tol))
        d = deformation_center_derivative(leaf, model, c.nu_low[:, 1])
        out.append(_le(0, "center velocity on CMC leaf: relative FD error", d.error / np.linalg.norm(d.predicted), 1e-3))
    g = build_grid(L)
    E = euclidean()
    s = GraphSurface.round(g, 1.0)
    d = deformation_center_derivative(s, E, surface_geometry(s, E).nu_low[:, 0])
    out.append(_le(0, "center velocity on unit sphere", max(d.error, np.abs(d.predicted - [1, 0, 0]).max()), 1e-6))
    out.extend(criterion_10())
    return out


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: lambda L=32: criterion_10(),
}


def run_criteria(which=None, L: int = 32):
    """Evaluate the selected criteria; returns a flat list of results."""
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for k in sorted(CRITERIA if which is None else which):
            out.extend(CRITERIA[k](L=L))
    return out
