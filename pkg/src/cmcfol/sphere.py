"""Gauss-Legendre sphere grid and real spherical harmonic transforms.

The grid has ``L+1`` Gauss-Legendre colatitudes and ``2L+2`` equispaced
longitudes. Nodes are stored row-major, node ``i*nlon + j`` sits at
``(theta[i], phi[j])``. None of the nodes lie on a pole, so every chart
quantity below is finite.

The real orthonormal basis is

    Y_{l,0}  = P_l(theta)
    Y_{l,m}  = P_l^m(theta) cos(m phi)      m > 0
    Y_{l,-m} = P_l^m(theta) sin(m phi)      m > 0

with ``P_l^m`` scaled so that every ``Y`` has unit L2 norm on the unit
sphere and no Condon-Shortley phase. In particular ``omega_1 =
sqrt(4 pi / 3) Y_{1,1}``, ``omega_2 = sqrt(4 pi / 3) Y_{1,-1}`` and
``omega_3 = sqrt(4 pi / 3) Y_{1,0}``. The flat coefficient index of
``(l, m)`` is ``l*l + l + m``.
"""
from __future__ import annotations

from functools import cached_property
from math import comb

import numpy as np
from scipy.special import roots_legendre

from .errors import ConfigError, ShapeError

__all__ = [
    "SphereGrid",
    "ScalarField",
    "build_grid",
    "analyze",
    "synthesize",
    "integrate",
    "sphere_laplacian",
    "lm_index",
]

MAX_DERIV = 3


def lm_index(l: int, m: int) -> int:
    """Flat coefficient index of the real harmonic ``(l, m)``."""
    if abs(m) > l:
        raise ConfigError(f"|m| > l for (l, m) = ({l}, {m})")
    return l * l + l + m


def _leibniz(a, b, order):
    # derivative jets along theta: a[k] = d^k a / dtheta^k
    out = np.zeros_like(a)
    for k in range(order + 1):
        for j in range(k + 1):
            out[k] += comb(k, j) * a[j] * b[k - j]
    return out


def _legendre_jets(theta, L, order=MAX_DERIV):
    """Normalized associated Legendre functions and theta-derivatives.

    Returns an array ``P[d, i, l, m]`` holding ``d^d/dtheta^d P_l^m`` at
    ``theta[i]``. The recurrence is run in forward Taylor mode with
    ``cos`` and ``sin`` jets, so derivatives are exact up to rounding.
    """
    n = theta.size
    x = np.stack([np.cos(theta), -np.sin(theta), -np.cos(theta), np.sin(theta)])[: order + 1]
    s = np.stack([np.sin(theta), np.cos(theta), -np.sin(theta), -np.cos(theta)])[: order + 1]
    P = np.zeros((order + 1, n, L + 1, L + 1))
    diag = np.zeros((order + 1, n))
    diag[0] = 1.0 / np.sqrt(4.0 * np.pi)
    for m in range(L + 1):
        if m == 1:
            diag = np.sqrt(3.0) * _leibniz(s, diag, order)
        elif m > 1:
            diag = np.sqrt((2.0 * m + 1.0) / (2.0 * m)) * _leibniz(s, diag, order)
        P[:, :, m, m] = diag
        if m == L:
            break
        prev2 = diag
        prev1 = np.sqrt(2.0 * m + 3.0) * _leibniz(x, diag, order)
        P[:, :, m + 1, m] = prev1
        for l in range(m + 2, L + 1):
            a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = np.sqrt((2.0 * l + 1.0) * ((l - 1.0) ** 2 - m * m) / ((2.0 * l - 3.0) * (l * l - m * m)))
            cur = a * _leibniz(x, prev1, order) - b * prev2
            P[:, :, l, m] = cur
            prev2, prev1 = prev1, cur
    return P


class SphereGrid:
    """Gauss-Legendre by equispaced grid on the unit sphere.

    Parameters
    ----------
    L : int
        Bandlimit, between 4 and 256.

    Attributes
    ----------
    theta, phi : ndarray
        Colatitude and longitude nodes.
    weights : ndarray, shape (N,)
        Quadrature weights for the unit sphere, summing to ``4 pi``.
    omega : ndarray, shape (N, 3)
        Unit position vectors of the nodes.
    """

    def __init__(self, L: int):
        if not isinstance(L, (int, np.integer)) or isinstance(L, bool):
            raise ConfigError(f"bandlimit must be an integer, got {L!r}")
        if not 4 <= L <= 256:
            raise ConfigError(f"bandlimit {L} outside [4, 256]")
        self.L = int(L)
        self.nlat = L + 1
        self.nlon = 2 * L + 2
        x, w = roots_legendre(self.nlat)
        # north pole first
        order = np.argsort(-x)
        self.cos_theta = x[order]
        self.gl_weights = w[order]
        self.theta = np.arccos(self.cos_theta)
        self.phi = 2.0 * np.pi * np.arange(self.nlon) / self.nlon
        self.dphi = 2.0 * np.pi / self.nlon
        self.weights = np.repeat(self.gl_weights * self.dphi, self.nlon)
        self.ncoef = (L + 1) ** 2
        ell = np.zeros(self.ncoef, dtype=int)
        em = np.zeros(self.ncoef, dtype=int)
        for l in range(L + 1):
            for m in range(-l, l + 1):
                ell[lm_index(l, m)] = l
                em[lm_index(l, m)] = m
        self.ell = ell
        self.em = em
        for arr in (self.theta, self.phi, self.weights, self.ell, self.em):
            arr.setflags(write=False)

    def __repr__(self):
        return f"SphereGrid(L={self.L}, nodes={self.size})"

    def __eq__(self, other):
        return isinstance(other, SphereGrid) and other.L == self.L

    def __hash__(self):
        return hash(("SphereGrid", self.L))

    @property
    def size(self) -> int:
        return self.nlat * self.nlon

    @cached_property
    def legendre(self):
        return _legendre_jets(self.theta, self.L)

    @cached_property
    def theta_nodes(self):
        return np.repeat(self.theta, self.nlon)

    @cached_property
    def phi_nodes(self):
        return np.tile(self.phi, self.nlat)

    @cached_property
    def sin_theta(self):
        return np.sin(self.theta_nodes)

    def _trig(self, b):
        # d^b/dphi^b of cos(m phi) and sin(m phi), shape (L+1, nlon)
        m = np.arange(self.L + 1)[:, None]
        arg = m * self.phi[None, :] + 0.5 * b * np.pi
        fac = m.astype(float) ** b
        return fac * np.cos(arg), fac * np.sin(arg)

    @cached_property
    def _trig_tables(self):
        return [self._trig(b) for b in range(MAX_DERIV + 1)]

    def omega_jet(self, a: int = 0, b: int = 0):
        """Cartesian unit vector ``omega`` differentiated ``a`` times in
        theta and ``b`` times in phi, shape (N, 3)."""
        t = self.theta_nodes[:, None]
        p = self.phi_nodes[:, None]
        # omega = (sin t cos p, sin t sin p, cos t)
        st = np.sin(t + 0.5 * a * np.pi)
        ct = np.cos(t + 0.5 * a * np.pi)
        cp = np.cos(p + 0.5 * b * np.pi)
        sp = np.sin(p + 0.5 * b * np.pi)
        z = ct if b == 0 else np.zeros_like(ct)
        return np.concatenate([st * cp, st * sp, z], axis=1)

    @cached_property
    def omega(self):
        out = self.omega_jet(0, 0)
        out.setflags(write=False)
        return out

    # -- transforms -------------------------------------------------

    def _split(self, coeffs):
        L = self.L
        C = np.zeros((L + 1, L + 1) + coeffs.shape[1:])
        S = np.zeros_like(C)
        for l in range(L + 1):
            base = l * l + l
            C[l, : l + 1] = coeffs[base : base + l + 1]
            S[l, 1 : l + 1] = coeffs[base - l : base][::-1]
        return C, S

    def _join(self, C, S):
        out = np.zeros((self.ncoef,) + C.shape[2:])
        for l in range(self.L + 1):
            base = l * l + l
            out[base : base + l + 1] = C[l, : l + 1]
            out[base - l : base] = S[l, 1 : l + 1][::-1]
        return out

    def synthesize(self, coeffs, dtheta: int = 0, dphi: int = 0):
        """Evaluate a coefficient vector (or stack, trailing axes) at the
        nodes, optionally differentiated in the chart."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[0] != self.ncoef:
            raise ShapeError(f"expected {self.ncoef} coefficients, got {coeffs.shape[0]}")
        if dtheta > MAX_DERIV or dphi > MAX_DERIV:
            raise ConfigError("derivative order above 3 is not tabulated")
        C, S = self._split(coeffs)
        P = self.legendre[dtheta]
        A = np.einsum("ilm,lm...->im...", P, C)
        B = np.einsum("ilm,lm...->im...", P, S)
        tc, ts = self._trig_tables[dphi]
        vals = np.einsum("im...,mj->ij...", A, tc) + np.einsum("im...,mj->ij...", B, ts)
        return vals.reshape((self.size,) + coeffs.shape[1:])

    def analyze(self, values):
        """Project nodal values (or a stack, trailing axes) onto the basis."""
        values = np.asarray(values, dtype=float)
        if values.shape[0] != self.size:
            raise ShapeError(f"expected {self.size} nodal values, got {values.shape[0]}")
        v = values.reshape((self.nlat, self.nlon) + values.shape[1:])
        tc, ts = self._trig_tables[0]
        Fc = np.einsum("ij...,mj->im...", v, tc) * self.dphi
        Fs = np.einsum("ij...,mj->im...", v, ts) * self.dphi
        P = self.legendre[0] * self.gl_weights[:, None, None]
        C = np.einsum("ilm,im...->lm...", P, Fc)
        S = np.einsum("ilm,im...->lm...", P, Fs)
        return self._join(C, S)

    def basis_matrix(self, dtheta: int = 0, dphi: int = 0):
        """Dense matrix ``B[node, k]`` of differentiated basis functions."""
        key = (dtheta, dphi)
        cache = self.__dict__.setdefault("_basis_cache", {})
        if key not in cache:
            P = self.legendre[dtheta]
            tc, ts = self._trig_tables[dphi]
            B = np.zeros((self.nlat, self.nlon, self.ncoef))
            for k in range(self.ncoef):
                l, m = self.ell[k], self.em[k]
                trig = tc[m] if m >= 0 else ts[-m]
                B[:, :, k] = np.outer(P[:, l, abs(m)], trig)
            B = B.reshape(self.size, self.ncoef)
            B.setflags(write=False)
            cache[key] = B
        return cache[key]

    def antipodal_index(self):
        """Node permutation implementing ``omega -> -omega``."""
        i = np.arange(self.nlat)[::-1]
        j = (np.arange(self.nlon) + self.nlon // 2) % self.nlon
        return (i[:, None] * self.nlon + j[None, :]).ravel()


_GRID_CACHE: dict[int, SphereGrid] = {}


def build_grid(bandlimit: int) -> SphereGrid:
    """Return the (cached) grid of the given bandlimit.

    Raises
    ------
    ConfigError
        If the bandlimit is not an integer in ``[4, 256]``.
    """
    if isinstance(bandlimit, (int, np.integer)) and not isinstance(bandlimit, bool):
        if bandlimit in _GRID_CACHE:
            return _GRID_CACHE[bandlimit]
    grid = SphereGrid(bandlimit)
    _GRID_CACHE[grid.L] = grid
    return grid


class ScalarField:
    """Band-limited real function on a sphere grid.

    Either nodal values or coefficients may be supplied; the other
    representation is computed on demand.
    """

    __slots__ = ("grid", "_values", "_coeffs")

    def __init__(self, grid: SphereGrid, values=None, coeffs=None):
        self.grid = grid
        if values is None and coeffs is None:
            raise ConfigError("ScalarField needs values or coefficients")
        self._values = None
        self._coeffs = None
        if values is not None:
            values = np.asarray(values, dtype=float)
            if np.ndim(values) == 0:
                values = np.full(grid.size, float(values))
            if values.shape != (grid.size,):
                raise ShapeError(f"field needs {grid.size} values, got shape {values.shape}")
            self._values = values
        if coeffs is not None:
            coeffs = np.asarray(coeffs, dtype=float)
            if coeffs.shape != (grid.ncoef,):
                raise ShapeError(f"field needs {grid.ncoef} coefficients, got shape {coeffs.shape}")
            self._coeffs = coeffs

    @classmethod
    def from_coefficients(cls, grid, coeffs):
        return cls(grid, coeffs=coeffs)

    @classmethod
    def harmonic(cls, grid, l, m, scale=1.0):
        """The single harmonic ``scale * Y_{l,m}``."""
        c = np.zeros(grid.ncoef)
        c[lm_index(l, m)] = scale
        return cls(grid, coeffs=c)

    @classmethod
    def cartesian(cls, grid, i):
        """Cartesian component ``omega_i`` (0-based) of the unit normal."""
        return cls(grid, values=grid.omega[:, i].copy())

    @property
    def values(self):
        if self._values is None:
            self._values = self.grid.synthesize(self._coeffs)
        return self._values

    @property
    def coeffs(self):
        if self._coeffs is None:
            self._coeffs = self.grid.analyze(self._values)
        return self._coeffs

    def derivative(self, dtheta=0, dphi=0):
        """Chart derivative at the nodes (spectral)."""
        return self.grid.synthesize(self.coeffs, dtheta, dphi)

    def _other(self, other):
        if isinstance(other, ScalarField):
            if other.grid != self.grid:
                raise ShapeError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return ScalarField(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return ScalarField(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return ScalarField(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return ScalarField(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField(self.grid, -self.values)

    def __repr__(self):
        return f"ScalarField(L={self.grid.L})"


def analyze(field_or_values, grid: SphereGrid | None = None):
    """Spectral coefficients of a field (or of raw nodal values on ``grid``)."""
    if isinstance(field_or_values, ScalarField):
        return field_or_values.coeffs
    if grid is None:
        raise ConfigError("raw values need a grid")
    return grid.analyze(field_or_values)


def synthesize(coeffs, grid: SphereGrid):
    """Nodal values from spectral coefficients."""
    return ScalarField(grid, coeffs=np.asarray(coeffs, dtype=float)).values


def integrate(field, weights) -> float:
    """Quadrature sum of a field against per-node measure weights.

    Raises
    ------
    ShapeError
        If the number of weights does not match the field.
    ConfigError
        If any weight is not strictly positive.
    """
    vals = field.values if isinstance(field, ScalarField) else np.asarray(field, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if weights.shape[0] != vals.shape[0]:
        raise ShapeError(f"{weights.shape[0]} weights for {vals.shape[0]} nodes")
    if not np.all(weights > 0):
        raise ConfigError("quadrature weights must be positive")
    return float(np.tensordot(weights, vals, axes=(0, 0)))


def sphere_laplacian(field: ScalarField) -> ScalarField:
    """Round unit-sphere Laplacian, applied spectrally."""
    ell = field.grid.ell
    return ScalarField(field.grid, coeffs=-ell * (ell + 1.0) * field.coeffs)
