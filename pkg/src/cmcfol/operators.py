"""Self-adjoint surface operators in a spherical-harmonic Galerkin basis.

Functions on a graph surface are expanded in the unit-sphere harmonics
pulled back by the radial graph map. Operators are assembled in weak
form,

    A_kl = -int g^IJ d_I Y_k d_J Y_l dmu + int P Y_k Y_l dmu,
    M_kl =  int Y_k Y_l dmu,

so symmetry holds by construction and the eigenproblem ``-A v = lam M v``
is a dense generalized symmetric one.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConfigError, DegeneracyWarning, NearSingularWarning, OperatorError
from .metric import AmbientMetricModel, artificial_data_batch
from .sphere import ScalarField
from .surface import SurfaceGeometryCache

__all__ = [
    "SurfaceOperator",
    "SpectrumResult",
    "SolveReport",
    "laplace_beltrami",
    "stability_operator",
    "stability_potential",
    "spectrum",
    "split_translational",
    "solve",
    "lapse_rhs",
]

SYMMETRY_TOL = 1e-9


@dataclass
class SurfaceOperator:
    """Weak-form matrix of a surface operator.

    Attributes
    ----------
    matrix : ndarray
        ``A_kl = int Y_k (Op Y_l) dmu``.
    mass : ndarray
        ``M_kl = int Y_k Y_l dmu``.
    asymmetry : float
        Relative max asymmetry of ``matrix``.
    """

    matrix: np.ndarray
    mass: np.ndarray
    cache: SurfaceGeometryCache
    name: str = ""
    potential: np.ndarray | None = None
    asymmetry: float = 0.0

    @property
    def grid(self):
        return self.cache.grid

    def coefficient_matrix(self):
        """``M^{-1} A``: the operator acting on coefficient vectors."""
        return scipy.linalg.solve(self.mass, self.matrix, assume_a="pos")

    def apply(self, u) -> ScalarField:
        """Galerkin image ``Op u`` (projected onto the basis)."""
        c = u.coeffs if isinstance(u, ScalarField) else np.asarray(u, dtype=float)
        return ScalarField(self.grid, coeffs=self.coefficient_matrix() @ c)

    def __neg__(self) -> "SurfaceOperator":
        pot = None if self.potential is None else -self.potential
        return SurfaceOperator(-self.matrix, self.mass, self.cache, f"-{self.name}", pot, self.asymmetry)

    def shifted(self, c: float) -> "SurfaceOperator":
        """Operator plus multiplication by the constant ``c``."""
        pot = None if self.potential is None else self.potential + c
        return SurfaceOperator(self.matrix + c * self.mass, self.mass, self.cache, self.name, pot, self.asymmetry)


def _asym(A):
    scale = np.abs(A).max()
    return float(np.abs(A - A.T).max() / scale) if scale > 0 else 0.0


def _stiffness(cache):
    grid = cache.grid
    B0 = grid.basis_matrix(0, 0)
    Bt = grid.basis_matrix(1, 0)
    Bp = grid.basis_matrix(0, 1)
    mu = cache.mu
    gi = cache.g2inv
    Dt = (mu * gi[:, 0, 0])[:, None] * Bt + (mu * gi[:, 0, 1])[:, None] * Bp
    Dp = (mu * gi[:, 1, 0])[:, None] * Bt + (mu * gi[:, 1, 1])[:, None] * Bp
    K = Bt.T @ Dt + Bp.T @ Dp
    M = B0.T @ (mu[:, None] * B0)
    return 0.5 * (K + K.T), 0.5 * (M + M.T), B0


def laplace_beltrami(cache: SurfaceGeometryCache) -> SurfaceOperator:
    """Laplace-Beltrami operator of the induced metric."""
    K, M, _ = _stiffness(cache)
    A = -K
    return SurfaceOperator(A, M, cache, "laplace_beltrami", np.zeros(cache.grid.size), _asym(A))


def stability_potential(cache: SurfaceGeometryCache):
    """``Ric(nu, nu) + |k|^2`` at the nodes."""
    return cache.ric_nn + cache.knorm2


def stability_operator(cache: SurfaceGeometryCache, metric: AmbientMetricModel | None = None) -> SurfaceOperator:
    """Stability operator ``L = Lap + Ric(nu, nu) + |k|^2``."""
    if metric is not None and metric is not cache.metric:
        cache = SurfaceGeometryCache(cache.surface, metric)
    K, M, B0 = _stiffness(cache)
    P = stability_potential(cache)
    V = B0.T @ ((cache.mu * P)[:, None] * B0)
    A = -K + 0.5 * (V + V.T)
    return SurfaceOperator(A, M, cache, "stability", P, _asym(A))


@dataclass
class SpectrumResult:
    """Lowest eigenpairs of the negative of a surface operator.

    ``vectors[:, i]`` holds the coefficients of the i-th eigenfunction,
    normalized so that ``int f_i f_j dmu = delta_ij``.
    """

    values: np.ndarray
    vectors: np.ndarray
    grid: object
    bands: np.ndarray
    residuals: np.ndarray
    orthonormality_defect: float
    multiplicities: list = field(default_factory=list)
    mass: np.ndarray | None = None

    def function(self, i) -> ScalarField:
        return ScalarField(self.grid, coeffs=self.vectors[:, i])

    def __len__(self):
        return self.values.size


def _clusters(vals, rtol=1e-6):
    out = []
    scale = max(np.abs(vals).max(), 1e-300)
    i = 0
    while i < vals.size:
        j = i + 1
        while j < vals.size and abs(vals[j] - vals[i]) <= rtol * scale:
            j += 1
        out.append(j - i)
        i = j
    return out


def spectrum(op: SurfaceOperator, count: int | None = None) -> SpectrumResult:
    """Lowest ``count`` eigenpairs of ``-Op`` (dense generalized solve).

    Raises
    ------
    OperatorError
        If the operator's asymmetry exceeds the certificate tolerance.
    """
    if op.asymmetry > SYMMETRY_TOL:
        raise OperatorError(f"operator asymmetry {op.asymmetry:.3g} above {SYMMETRY_TOL}")
    n = op.matrix.shape[0]
    count = n if count is None else int(count)
    if not 1 <= count <= n:
        raise ConfigError(f"eigenpair count must be in [1, {n}]")
    lam, V = scipy.linalg.eigh(-op.matrix, op.mass, subset_by_index=[0, count - 1])
    M = op.mass
    R = -op.matrix @ V - (M @ V) * lam
    Minv_R = scipy.linalg.solve(M, R, assume_a="pos")
    res = np.sqrt(np.maximum(np.einsum("ki,ki->i", R, Minv_R), 0.0))
    ortho = float(np.abs(V.T @ M @ V - np.eye(count)).max())
    grid = op.grid
    energy = np.zeros((grid.L + 1, count))
    np.add.at(energy, grid.ell, V**2)
    bands = energy.argmax(axis=0)
    return SpectrumResult(lam, V, grid, bands, res, ortho, _clusters(lam), M)


def split_translational(field: ScalarField, spec: SpectrumResult, sigma: float):
    """Translational and deformational parts of a function.

    The translational part is the ``L2(mu)`` projection onto the three
    eigenfunctions of ``-Lap`` whose eigenvalues are nearest ``2/sigma^2``,
    the lowest (constant) eigenfunction excluded.
    """
    if len(spec) < 5:
        raise ConfigError("need at least 5 eigenpairs of -Lap")
    target = 2.0 / sigma**2
    cand = np.arange(1, len(spec))
    order = cand[np.argsort(np.abs(spec.values[cand] - target), kind="stable")]
    band = np.sort(order[:3])
    if order.size > 3 and abs(spec.values[order[3]] - target) <= 0.1 * target:
        warnings.warn(
            f"fourth eigenvalue {spec.values[order[3]]:.4g} within 10% of the translational band",
            DegeneracyWarning,
            stacklevel=2,
        )
    M = spec.mass
    V = spec.vectors[:, band]
    a = V.T @ (M @ field.coeffs)
    trans = ScalarField(field.grid, coeffs=V @ a)
    deform = ScalarField(field.grid, coeffs=field.coeffs - trans.coeffs)
    return trans, deform


@dataclass
class SolveReport:
    solution: ScalarField
    residual: float
    cut_eigenvalues: list
    kernel_fraction: float


def solve(op: SurfaceOperator, rhs, kappa: float = 1e-12, report: bool = False):
    """Solve ``Op u = rhs`` in the Galerkin sense with a spectral cutoff.

    Eigencomponents with ``|lambda| < kappa * max|lambda|`` are dropped and
    reported; a :class:`NearSingularWarning` is issued when ``rhs`` has a
    component above ``1e-8 |rhs|`` in the dropped space.
    """
    grid = op.grid
    vals = rhs.values if isinstance(rhs, ScalarField) else np.asarray(rhs, dtype=float)
    B0 = grid.basis_matrix(0, 0)
    b = B0.T @ (op.cache.mu * vals)
    lam, V = scipy.linalg.eigh(op.matrix, op.mass)
    cut = np.abs(lam) < kappa * np.abs(lam).max()
    proj = V.T @ b
    rhs_norm = np.sqrt(np.dot(op.cache.mu, vals**2))
    kernel = float(np.sqrt(np.sum(proj[cut] ** 2)))
    if cut.any() and kernel > 1e-8 * rhs_norm:
        worst = lam[cut][np.argmax(np.abs(proj[cut]))]
        warnings.warn(
            f"right-hand side has component {kernel:.3g} along near-kernel eigenvalue {worst:.3g}",
            NearSingularWarning,
            stacklevel=2,
        )
    coef = np.where(cut, 0.0, proj / np.where(cut, 1.0, lam))
    c = V @ coef
    u = ScalarField(grid, coeffs=c)
    # residual against the right-hand side with its near-kernel part removed
    b_range = b - op.mass @ (V[:, cut] @ proj[cut])
    r = op.matrix @ c - b_range
    resid = float(np.sqrt(max(r @ scipy.linalg.solve(op.mass, r, assume_a="pos"), 0.0)))
    if report:
        return SolveReport(u, resid, lam[cut].tolist(), kernel / rhs_norm if rhs_norm > 0 else 0.0)
    return u


def lapse_rhs(cache: SurfaceGeometryCache, target: AmbientMetricModel, schw: AmbientMetricModel) -> ScalarField:
    """Right-hand side of the lapse equation of the interpolation.

    ``-Jbar(nu) + div(kbar(nu, .)^T) - <k, kbar>`` with ``kbar``, ``Jbar``
    from the pair (``target``, ``schw``); trace and connection are those
    of the metric the cache was built in.
    """
    kbar, jbar = artificial_data_batch(target, schw, cache.X, connection=cache.metric)
    nu = cache.nu
    w = cache.project(np.einsum("nbc,nb->nc", kbar, nu))
    div = cache.divergence(w)
    Pu = cache.proj_up
    kk = np.einsum("nab,nac,nbd,ncd->n", cache.k_cart, Pu, Pu, kbar)
    vals = -np.einsum("na,na->n", jbar, nu) + div - kk
    return ScalarField(cache.grid, values=vals)
