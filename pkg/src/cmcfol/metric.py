"""Closed-form ambient 3-metrics built from rational monomial atoms.

A model is ``g_ij = delta_ij + sum of atoms`` where every atom is

    coef * (x - o)^alpha / |x - o|^p

for a component ``(i, j)``. Derivatives of atoms are taken term by term,
so metric jets up to second order are exact and curvature carries no
differentiation noise.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, NumericError
from .kernels import atom_jets, curvature_from_jets
from .tables import write_json

__all__ = [
    "Atom",
    "AmbientMetricModel",
    "MetricJet",
    "CurvatureSample",
    "ArtificialData",
    "DecayReport",
    "euclidean",
    "schwarzschild",
    "schwarzschild_base",
    "conformal_factor",
    "perturbed_schwarzschild",
    "builtin_model",
    "metric_at",
    "metric_jets",
    "christoffels",
    "curvature",
    "curvature_batch",
    "riemann_3d",
    "bianchi_residual",
    "interpolate",
    "artificial_data",
    "artificial_data_batch",
    "decay_report",
    "check_positive_definite",
    "load_metric",
    "dump_metric",
    "metric_from_dict",
    "metric_to_dict",
    "fibonacci_sphere",
]


@dataclass(frozen=True)
class Atom:
    """One term ``coef * (x-o)^alpha / |x-o|^power`` of component ``(i, j)``.

    Components are 0-based and stored with ``i <= j``.
    """

    i: int
    j: int
    coef: float
    alpha: tuple = (0, 0, 0)
    power: float = 0.0
    offset: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        i, j = int(self.i), int(self.j)
        if not (0 <= i < 3 and 0 <= j < 3):
            raise ConfigError(f"atom component ({i}, {j}) out of range")
        if i > j:
            i, j = j, i
        alpha = tuple(int(a) for a in self.alpha)
        if len(alpha) != 3 or min(alpha) < 0:
            raise ConfigError(f"monomial must be three non-negative integers, got {self.alpha}")
        offset = tuple(float(o) for o in self.offset)
        if len(offset) != 3:
            raise ConfigError("atom offset must have three entries")
        object.__setattr__(self, "i", i)
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "coef", float(self.coef))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "power", float(self.power))
        object.__setattr__(self, "offset", offset)

    def scaled(self, factor: float) -> "Atom":
        return Atom(self.i, self.j, self.coef * factor, self.alpha, self.power, self.offset)


def _schwarzschild_atoms(mass, center):
    # (1 + m/2r)^4 - 1 = 2m/r + 3m^2/2r^2 + m^3/2r^3 + m^4/16r^4
    coefs = (2.0 * mass, 1.5 * mass**2, 0.5 * mass**3, mass**4 / 16.0)
    out = []
    if mass == 0:
        return out
    for i in range(3):
        for p, c in enumerate(coefs, start=1):
            out.append(Atom(i, i, c, (0, 0, 0), float(p), tuple(center)))
    return out


@dataclass(frozen=True)
class AmbientMetricModel:
    """Asymptotically flat metric ``delta + base + terms``.

    Parameters
    ----------
    kind : {"euclidean", "schwarzschild", "sum"}
        ``schwarzschild`` and ``sum`` generate the conformally flat
        Schwarzschild atoms of ``mass`` about ``center``.
    mass : float
        Declared mass. For ``euclidean`` no atoms are generated from it.
    center : tuple
        Center of the Schwarzschild base.
    terms : tuple of Atom
        Extra atoms.
    r_min : float
        Exclusion radius; evaluation requires ``|x| >= r_min``.
    epsilon : float
        Declared decay exponent.
    """

    kind: str = "euclidean"
    mass: float = 0.0
    center: tuple = (0.0, 0.0, 0.0)
    terms: tuple = ()
    r_min: float = 0.0
    epsilon: float = 0.5
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("euclidean", "schwarzschild", "sum"):
            raise ConfigError(f"unknown metric type {self.kind!r}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "mass", float(self.mass))
        if self.kind == "schwarzschild" and self.terms:
            raise ConfigError("type 'schwarzschild' takes no extra terms; use 'sum'")
        if not self.epsilon > 0:
            raise ConfigError("decay exponent epsilon must be positive")
        if self.r_min < 0:
            raise ConfigError("r_min must be non-negative")

    @cached_property
    def atoms(self) -> tuple:
        base = _schwarzschild_atoms(self.mass, self.center) if self.kind != "euclidean" else []
        return tuple(base) + self.terms

    @cached_property
    def _arrays(self):
        atoms = self.atoms
        comp = np.array([[a.i, a.j] for a in atoms], dtype=np.int64).reshape(-1, 2)
        coef = np.array([a.coef for a in atoms], dtype=float)
        alpha = np.array([a.alpha for a in atoms], dtype=np.int64).reshape(-1, 3)
        power = np.array([a.power for a in atoms], dtype=float)
        offset = np.array([a.offset for a in atoms], dtype=float).reshape(-1, 3)
        return comp, coef, alpha, power, offset

    @property
    def is_flat(self) -> bool:
        return len(self.atoms) == 0

    def check_domain(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        r = np.linalg.norm(pts, axis=-1)
        bad = r < self.r_min * (1.0 - 1e-14)
        if np.any(bad):
            raise DomainError(
                f"point at |x| = {r[bad].min():.6g} inside exclusion radius r_min = {self.r_min:.6g}"
            )
        return pts

    def jets(self, pts, order: int = 2):
        """Batch metric jets: ``g (N,3,3)``, ``dg (N,3,3,3)``, ``d2g``."""
        pts = self.check_domain(pts)
        if self.is_flat:
            n = pts.shape[0]
            g = np.broadcast_to(np.eye(3), (n, 3, 3)).copy()
            return g, np.zeros((n, 3, 3, 3)), (np.zeros((n, 3, 3, 3, 3)) if order >= 2 else None)
        return atom_jets(pts, *self._arrays, with_d2=order >= 2)

    def same_as(self, other) -> bool:
        return sorted(self.atoms, key=repr) == sorted(other.atoms, key=repr)


def euclidean(r_min: float = 0.0, epsilon: float = 0.5) -> AmbientMetricModel:
    return AmbientMetricModel("euclidean", 0.0, (0, 0, 0), (), r_min, epsilon, "euclidean")


def schwarzschild(mass: float = 1.0, center=(0.0, 0.0, 0.0), r_min=None, epsilon: float = 1.0) -> AmbientMetricModel:
    """Conformally flat Schwarzschild ``(1 + m/2|x-c|)^4 delta``.

    The default exclusion radius is ``2|m| + |c|``.
    """
    if r_min is None:
        r_min = 2.0 * abs(mass) + float(np.linalg.norm(center))
    return AmbientMetricModel("schwarzschild", mass, tuple(center), (), r_min, epsilon, "schwarzschild")


def schwarzschild_base(model: AmbientMetricModel, center=None) -> AmbientMetricModel:
    """Schwarzschild model sharing the mass and exclusion radius of ``model``."""
    c = model.center if center is None else center
    return AmbientMetricModel("schwarzschild", model.mass, tuple(c), (), model.r_min, model.epsilon, "schwarzschild")


def conformal_factor(mass, r):
    """``phi = 1 + m / 2r``."""
    return 1.0 + mass / (2.0 * np.asarray(r, dtype=float))


def perturbed_schwarzschild(mass=1.0, amplitude=0.05, symmetric=False, center=(0.0, 0.0, 0.0), r_min=None):
    """Schwarzschild plus a perturbation of decay class ``epsilon = 1/2``.

    The asymmetric variant adds ``a x1/r^(5/2)`` on the diagonal and
    ``a/2 x2/r^(5/2)`` on the (1,2) component; both are odd under
    ``x -> -x``. The symmetric variant adds the even terms
    ``a x1 x2/r^(7/2)`` on the diagonal and ``a/2 x3^2/r^(7/2)`` on (1,3).
    Both variants keep the ADM mass equal to ``mass`` and make the
    scalar curvature decay like ``r^(-7/2)``.
    """
    a = float(amplitude)
    if symmetric:
        terms = [Atom(i, i, a, (1, 1, 0), 3.5) for i in range(3)]
        terms.append(Atom(0, 2, 0.5 * a, (0, 0, 2), 3.5))
    else:
        terms = [Atom(i, i, a, (1, 0, 0), 2.5) for i in range(3)]
        terms.append(Atom(0, 1, 0.5 * a, (0, 1, 0), 2.5))
    if r_min is None:
        r_min = 2.0 * abs(mass) + float(np.linalg.norm(center)) + 1.0
    name = "perturbed_rt" if symmetric else "perturbed"
    return AmbientMetricModel("sum", mass, tuple(center), tuple(terms), r_min, 0.5, name)


def builtin_model(name: str) -> AmbientMetricModel:
    """Named models used by tests, the CLI and the acceptance suite.

    ``euclidean``, ``schwarzschild`` (m=1), ``schwarzschild_negative``
    (m=-1), ``translated_schwarzschild`` (m=1 about (0.3, 0, 0)),
    ``perturbed`` (asymmetric, amplitude 0.05), ``perturbed_rt``
    (translated Schwarzschild plus even perturbation) and
    ``trace_perturbed`` (Schwarzschild plus ``0.1 delta / r^2``).
    """
    if name == "euclidean":
        return euclidean()
    if name == "schwarzschild":
        return schwarzschild(1.0)
    if name == "schwarzschild_negative":
        return schwarzschild(-1.0)
    if name == "translated_schwarzschild":
        return schwarzschild(1.0, (0.3, 0.0, 0.0))
    if name == "perturbed":
        return perturbed_schwarzschild(1.0, 0.05)
    if name == "perturbed_rt":
        return perturbed_schwarzschild(1.0, 0.05, symmetric=True, center=(0.3, 0.0, 0.0))
    if name == "trace_perturbed":
        terms = tuple(Atom(i, i, 0.1, (0, 0, 0), 2.0) for i in range(3))
        return AmbientMetricModel("sum", 1.0, (0, 0, 0), terms, 2.0, 1.0, "trace_perturbed")
    raise ConfigError(f"unknown builtin model {name!r}")


# -- point evaluation -------------------------------------------------------

@dataclass(frozen=True)
class MetricJet:
    """Metric and its first two coordinate derivatives at one point."""

    x: np.ndarray
    g: np.ndarray
    dg: np.ndarray
    d2g: np.ndarray


@dataclass(frozen=True)
class CurvatureSample:
    """Christoffels, Ricci and scalar curvature at one point.

    ``gamma[k, i, j] = Gamma^k_ij``. ``ric`` and ``scalar`` are ``None``
    when only the connection was requested.
    """

    gamma: np.ndarray
    ric: np.ndarray | None = None
    scalar: float | None = None
    ginv: np.ndarray | None = None


def metric_jets(model: AmbientMetricModel, pts, order: int = 2):
    """Batch version of :func:`metric_at` returning raw arrays."""
    return model.jets(pts, order)


def metric_at(model: AmbientMetricModel, x) -> MetricJet:
    """Exact metric jet of ``model`` at ``x``.

    Raises
    ------
    DomainError
        If ``|x| < r_min``.
    """
    x = np.asarray(x, dtype=float).reshape(3)
    g, dg, d2g = model.jets(x[None, :])
    return MetricJet(x, g[0], dg[0], d2g[0])


def _check_invertible(g):
    cond = np.linalg.cond(g)
    if not np.all(np.isfinite(cond)) or np.max(cond) > 1e12:
        raise NumericError(f"metric is singular or ill-conditioned (condition number {np.max(cond):.3g})")


def christoffels(jet: MetricJet) -> CurvatureSample:
    """Christoffel symbols of the second kind at the jet's point."""
    _check_invertible(jet.g[None])
    ginv, gamma, *_ = curvature_from_jets(jet.g[None], jet.dg[None])
    return CurvatureSample(gamma[0], ginv=ginv[0])


def curvature(jet: MetricJet) -> CurvatureSample:
    """Christoffels, Ricci tensor and scalar curvature at the jet's point."""
    _check_invertible(jet.g[None])
    ginv, gamma, _, ric, scal = curvature_from_jets(jet.g[None], jet.dg[None], jet.d2g[None])
    return CurvatureSample(gamma[0], ric[0], float(scal[0]), ginv[0])


@dataclass
class CurvatureBatch:
    g: np.ndarray
    dg: np.ndarray
    ginv: np.ndarray
    gamma: np.ndarray
    dgamma: np.ndarray | None
    ric: np.ndarray | None
    scalar: np.ndarray | None
    d2g: np.ndarray | None = None


def curvature_batch(model: AmbientMetricModel, pts, order: int = 2) -> CurvatureBatch:
    """Metric jets and curvature at many points at once."""
    g, dg, d2g = model.jets(pts, order)
    _check_invertible(g)
    ginv, gamma, dgamma, ric, scal = curvature_from_jets(g, dg, d2g if order >= 2 else None)
    return CurvatureBatch(g, dg, ginv, gamma, dgamma, ric, scal, d2g)


def riemann_3d(g, ric, scal):
    """Full curvature tensor of a 3-manifold from its Ricci tensor.

    ``Rm[a, b, c, d] = <R(e_a, e_b) e_c, e_d>``; the Weyl tensor vanishes
    in three dimensions.
    """
    t1 = (
        np.einsum("...ad,...bc->...abcd", ric, g)
        - np.einsum("...ac,...bd->...abcd", ric, g)
        + np.einsum("...bc,...ad->...abcd", ric, g)
        - np.einsum("...bd,...ac->...abcd", ric, g)
    )
    t2 = np.einsum("...ad,...bc->...abcd", g, g) - np.einsum("...ac,...bd->...abcd", g, g)
    return t1 - 0.5 * np.asarray(scal)[..., None, None, None, None] * t2


def bianchi_residual(model: AmbientMetricModel, pts, rel_step: float = 1e-3):
    """Contracted second Bianchi defect ``g^ij nabla_i Ric_jk - d_k S / 2``.

    The extra derivative of the curvature is a central difference of the
    exact curvature, Richardson-extrapolated over steps ``h`` and ``h/2``
    with ``h = rel_step * |x|``. Returns the defect per point, shape (n, 3).
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    model.check_domain(pts)
    base = curvature_batch(model, pts)
    h0 = rel_step * np.maximum(np.linalg.norm(pts, axis=1), 1.0)

    def dcurv(h):
        dric = np.empty((pts.shape[0], 3, 3, 3))
        dS = np.empty((pts.shape[0], 3))
        for k in range(3):
            e = np.zeros(3)
            e[k] = 1.0
            p = curvature_batch(model, pts + h[:, None] * e)
            m = curvature_batch(model, pts - h[:, None] * e)
            dric[:, k] = (p.ric - m.ric) / (2.0 * h)[:, None, None]
            dS[:, k] = (p.scalar - m.scalar) / (2.0 * h)
        return dric, dS

    r1, s1 = dcurv(h0)
    r2, s2 = dcurv(0.5 * h0)
    dric = (4.0 * r2 - r1) / 3.0
    dS = (4.0 * s2 - s1) / 3.0
    G, R = base.gamma, base.ric
    # nabla_i Ric_jk = d_i Ric_jk - Gamma^l_ij Ric_lk - Gamma^l_ik Ric_jl
    cov = dric - np.einsum("nlij,nlk->nijk", G, R) - np.einsum("nlik,njl->nijk", G, R)
    return np.einsum("nij,nijk->nk", base.ginv, cov) - 0.5 * dS


# -- interpolation and artificial data ---------------------------------------

def interpolate(schw: AmbientMetricModel, target: AmbientMetricModel, tau: float) -> AmbientMetricModel:
    """Affine path ``g_tau = g_S + tau (g - g_S)``, term by term.

    Raises
    ------
    ConfigError
        If ``tau`` is outside ``[0, 1]`` or the masses differ.
    """
    tau = float(tau)
    if not 0.0 <= tau <= 1.0:
        raise ConfigError(f"tau = {tau} outside [0, 1]")
    if schw.mass != target.mass:
        raise ConfigError("Schwarzschild base and target declare different masses")
    if tau == 0.0:
        return schw
    if tau == 1.0:
        return target
    atoms = [a.scaled(1.0 - tau) for a in schw.atoms] + [a.scaled(tau) for a in target.atoms]
    return AmbientMetricModel(
        "euclidean",
        target.mass,
        target.center,
        tuple(atoms),
        max(schw.r_min, target.r_min),
        min(schw.epsilon, target.epsilon),
        f"interp({tau:.6g})",
    )


@dataclass(frozen=True)
class ArtificialData:
    """``kbar = (g_S - g)/2`` and ``Jbar = div(tr kbar g - kbar)`` at a point."""

    kbar: np.ndarray
    jbar: np.ndarray


def artificial_data_batch(target, schw, pts, connection=None):
    """Artificial data at many points.

    Parameters
    ----------
    connection : AmbientMetricModel, optional
        Metric whose trace and Levi-Civita connection define ``Jbar``.
        Defaults to ``target``.

    Returns
    -------
    kbar : ndarray, shape (N, 3, 3)
    jbar : ndarray, shape (N, 3)
    """
    conn = target if connection is None else connection
    gs, dgs, _ = schw.jets(pts, order=1)
    gt, dgt, _ = target.jets(pts, order=1)
    kbar = 0.5 * (gs - gt)
    dk = 0.5 * (dgs - dgt)  # dk[n, l, i, j]
    if conn is target:
        gc, dgc = gt, dgt
    else:
        gc, dgc, _ = conn.jets(pts, order=1)
    ginv, gamma, *_ = curvature_from_jets(gc, dgc)
    dginv = -np.einsum("nia,nkab,nbj->nkij", ginv, dgc, ginv)
    dtr = np.einsum("nkab,nab->nk", dginv, kbar) + np.einsum("nab,nkab->nk", ginv, dk)
    # nabla_l kbar_ij
    cov = (
        dk
        - np.einsum("nmli,nmj->nlij", gamma, kbar)
        - np.einsum("nmlj,nim->nlij", gamma, kbar)
    )
    div = np.einsum("njl,nlij->ni", ginv, cov)
    return kbar, dtr - div


def artificial_data(target, schw, x, connection=None) -> ArtificialData:
    """Artificial data ``(kbar, Jbar)`` of the interpolation at ``x``."""
    x = np.asarray(x, dtype=float).reshape(1, 3)
    kbar, jbar = artificial_data_batch(target, schw, x, connection)
    return ArtificialData(kbar[0], jbar[0])


# -- diagnostics ---------------------------------------------------------------

def fibonacci_sphere(n: int):
    """Deterministic, nearly uniform unit vectors (golden-angle spiral)."""
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    rho = np.sqrt(1.0 - z * z)
    ang = np.pi * (3.0 - np.sqrt(5.0)) * k
    return np.stack([rho * np.cos(ang), rho * np.sin(ang), z], axis=1)


def check_positive_definite(model, radius, samples: int = 1000):
    """Smallest metric eigenvalue over a sample shell; raises if not positive."""
    pts = radius * fibonacci_sphere(samples)
    g, _, _ = model.jets(pts, order=0)
    lam = np.linalg.eigvalsh(g).min()
    if not lam > 0:
        raise DomainError(f"metric not positive definite on shell r = {radius} (min eigenvalue {lam:.3g})")
    return float(lam)


@dataclass
class DecayReport:
    """Empirical decay constants per shell and overall.

    Keys of each dict: ``metric``, ``christoffel``, ``ricci``, ``scalar``
    (weighted suprema of the decay class) and ``rt_metric``,
    ``rt_christoffel``, ``rt_ricci``, ``rt_scalar`` (reflection
    differences of the Regge-Teitelboim class).
    """

    epsilon: float
    radii: list
    per_shell: list = field(default_factory=list)
    overall: dict = field(default_factory=dict)


def _norm(a):
    # largest component in absolute value
    return np.abs(a.reshape(a.shape[0], -1)).max(axis=1)


def decay_report(model, radii, samples: int = 1000, epsilon=None) -> DecayReport:
    """Sup of the weighted decay quantities over sampled shells."""
    eps = model.epsilon if epsilon is None else float(epsilon)
    dirs = fibonacci_sphere(samples)
    rep = DecayReport(eps, [float(r) for r in radii])
    for r in radii:
        if r < model.r_min:
            raise DomainError(f"shell r = {r} inside r_min = {model.r_min}")
        p, m = r * dirs, -r * dirs
        cp = curvature_batch(model, p)
        cm = curvature_batch(model, m)
        eye = np.eye(3)[None]
        row = {
            "metric": r ** (0.5 + eps) * _norm(cp.g - eye).max(),
            "christoffel": r ** (1.5 + eps) * _norm(cp.gamma).max(),
            "ricci": r ** (2.5 + eps) * _norm(cp.ric).max(),
            "scalar": r ** (3.0 + eps) * np.abs(cp.scalar).max(),
            "rt_metric": r ** (1.0 + eps) * _norm(cp.g - cm.g).max(),
            "rt_christoffel": r ** (2.0 + eps) * _norm(cp.gamma + cm.gamma).max(),
            "rt_ricci": r ** (3.0 + eps) * _norm(cp.ric - cm.ric).max(),
            "rt_scalar": r ** (3.5 + eps) * np.abs(cp.scalar - cm.scalar).max(),
        }
        rep.per_shell.append({k: float(v) for k, v in row.items()})
    for k in rep.per_shell[0]:
        rep.overall[k] = max(s[k] for s in rep.per_shell)
    return rep


# -- JSON exchange -----------------------------------------------------------------

_TOP_KEYS = {"type", "mass", "center", "terms", "r_min", "epsilon"}
_TERM_KEYS = {"i", "j", "coef", "monomial", "power", "offset"}


def _real(v, what):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{what} must be a real number, got {v!r}")
    if not np.isfinite(v):
        raise ConfigError(f"{what} must be finite")
    return float(v)


def _vec3(v, what):
    if not isinstance(v, list) or len(v) != 3:
        raise ConfigError(f"{what} must be a list of three numbers")
    return tuple(_real(c, what) for c in v)


def metric_from_dict(d: dict) -> AmbientMetricModel:
    """Parse the JSON metric description. Unknown keys are rejected."""
    if not isinstance(d, dict):
        raise ConfigError("metric description must be a JSON object")
    extra = set(d) - _TOP_KEYS
    if extra:
        raise ConfigError(f"unknown metric keys: {sorted(extra)}")
    if "type" not in d:
        raise ConfigError("metric description needs a 'type'")
    kind = d["type"]
    if kind not in ("euclidean", "schwarzschild", "sum"):
        raise ConfigError(f"unknown metric type {kind!r}")
    mass = _real(d.get("mass", 0.0), "mass")
    center = _vec3(d.get("center", [0.0, 0.0, 0.0]), "center")
    terms = []
    raw_terms = d.get("terms", [])
    if not isinstance(raw_terms, list):
        raise ConfigError("'terms' must be a list")
    for t in raw_terms:
        if not isinstance(t, dict):
            raise ConfigError("each term must be an object")
        extra = set(t) - _TERM_KEYS
        if extra:
            raise ConfigError(f"unknown term keys: {sorted(extra)}")
        for k in ("i", "j", "coef"):
            if k not in t:
                raise ConfigError(f"term missing {k!r}")
        i, j = t["i"], t["j"]
        if not all(isinstance(v, int) and not isinstance(v, bool) and 1 <= v <= 3 for v in (i, j)):
            raise ConfigError("term indices i, j must be integers in 1..3")
        mono = t.get("monomial", [0, 0, 0])
        if not isinstance(mono, list) or len(mono) != 3 or not all(
            isinstance(a, int) and not isinstance(a, bool) and a >= 0 for a in mono
        ):
            raise ConfigError("monomial must be three non-negative integers")
        terms.append(
            Atom(
                i - 1,
                j - 1,
                _real(t["coef"], "coef"),
                tuple(mono),
                _real(t.get("power", 0.0), "power"),
                _vec3(t.get("offset", [0.0, 0.0, 0.0]), "offset"),
            )
        )
    if "r_min" in d:
        r_min = _real(d["r_min"], "r_min")
    elif kind == "euclidean" and not terms:
        r_min = 0.0
    else:
        r_min = 2.0 * abs(mass) + float(np.linalg.norm(center)) + (1.0 if terms else 0.0)
        r_min = max(r_min, 1.0)
    eps = _real(d.get("epsilon", 0.5), "epsilon")
    return AmbientMetricModel(kind, mass, center, tuple(terms), r_min, eps, kind)


def metric_to_dict(model: AmbientMetricModel) -> dict:
    return {
        "type": model.kind,
        "mass": model.mass,
        "center": list(model.center),
        "terms": [
            {
                "i": a.i + 1,
                "j": a.j + 1,
                "coef": a.coef,
                "monomial": list(a.alpha),
                "power": a.power,
                "offset": list(a.offset),
            }
            for a in model.terms
        ],
        "r_min": model.r_min,
        "epsilon": model.epsilon,
    }


def load_metric(path) -> AmbientMetricModel:
    """Read a metric model from a JSON file."""
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"metric file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"metric file is not valid JSON: {exc}") from exc
    return metric_from_dict(data)


def dump_metric(model: AmbientMetricModel, path) -> None:
    write_json(path, metric_to_dict(model))
