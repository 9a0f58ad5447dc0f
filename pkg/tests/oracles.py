"""Independent reference values for the test suite.

Closed forms for conformally flat Schwarzschild data and a symbolic
(sympy) curvature computation used to cross-check the numerical jets.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
import sympy as sp


def phi(m, r):
    return 1.0 + m / (2.0 * r)


def schwarzschild_H(m, r):
    """Mean curvature of the centered coordinate sphere, outward normal."""
    return -(2.0 / r) * (1.0 - m / (2.0 * r)) / phi(m, r) ** 3


def schwarzschild_area(m, r):
    return 4.0 * np.pi * r**2 * phi(m, r) ** 4


def schwarzschild_flux(m, R):
    """ADM flux over S_R with Euclidean normal and measure: m phi^3."""
    return m * phi(m, R) ** 3


def schwarzschild_ric_nn(m, r):
    """Ric(nu, nu) on centered spheres: -2m / (r^3 phi^6)."""
    return -2.0 * m / (r**3 * phi(m, r) ** 6)


_X = sp.symbols("x0:3", real=True)


def _atom_expr(atom):
    d = [_X[k] - atom.offset[k] for k in range(3)]
    r = sp.sqrt(sum(v**2 for v in d))
    mono = sp.Integer(1)
    for k in range(3):
        mono *= d[k] ** atom.alpha[k]
    return sp.nsimplify(atom.coef, rational=False) * mono / r ** sp.nsimplify(atom.power)


@lru_cache(maxsize=None)
def _symbolic(model_key, atoms):
    g = sp.eye(3)
    for a in atoms:
        e = _atom_expr(a)
        g[a.i, a.j] += e
        if a.i != a.j:
            g[a.j, a.i] += e
    return g


def symbolic_curvature(model, point):
    """Christoffels ``Gamma^k_ij`` and Ricci tensor at ``point`` via sympy."""
    g = _symbolic(model.name or model.kind, tuple(model.atoms))
    subs = dict(zip(_X, [sp.Float(v, 30) for v in point]))
    gv = np.array(g.subs(subs).evalf(30), dtype=float)
    dg = np.zeros((3, 3, 3))  # dg[k, i, j]
    d2g = np.zeros((3, 3, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                dk = sp.diff(g[i, j], _X[k])
                dg[k, i, j] = float(dk.subs(subs).evalf(30))
                for l in range(k, 3):
                    v = float(sp.diff(dk, _X[l]).subs(subs).evalf(30))
                    d2g[k, l, i, j] = d2g[l, k, i, j] = v
    gi = np.linalg.inv(gv)
    low = 0.5 * (np.einsum("jil->lij", dg) + np.einsum("ijl->lij", dg) - dg)  # low[l,i,j] = Gamma_{l i j}
    gam = np.einsum("kl,lij->kij", gi, low)
    # derivative of Christoffels
    dlow = 0.5 * (np.einsum("mjil->mlij", d2g) + np.einsum("mijl->mlij", d2g) - d2g)
    dgi = -np.einsum("ka,mab,bl->mkl", gi, dg, gi)
    dgam = np.einsum("mkl,lij->mkij", dgi, low) + np.einsum("kl,mlij->mkij", gi, dlow)
    # Ric_ij = d_k G^k_ij - d_j G^k_ik + G^k_kl G^l_ij - G^k_jl G^l_ik
    ric = (
        np.einsum("kkij->ij", dgam)
        - np.einsum("jkik->ij", dgam)
        + np.einsum("kkl,lij->ij", gam, gam)
        - np.einsum("kjl,lik->ij", gam, gam)
    )
    return gam, ric, float(np.einsum("ij,ij->", gi, ric))


def euclidean_graph_mean_curvature(radial_expr, theta, phi_):
    """Mean curvature of ``r(theta, phi) omega`` in flat space, symbolically.

    ``radial_expr`` is a sympy expression in the symbols ``theta``, ``phi_``.
    Sign convention: outward normal, so round spheres give ``-2/r``.
    Returns a numpy-callable ``H(theta, phi)``.
    """
    om = sp.Matrix([sp.sin(theta) * sp.cos(phi_), sp.sin(theta) * sp.sin(phi_), sp.cos(theta)])
    X = radial_expr * om
    Xt, Xp = X.diff(theta), X.diff(phi_)
    n = Xt.cross(Xp)
    E, F, G = Xt.dot(Xt), Xt.dot(Xp), Xp.dot(Xp)
    L = X.diff(theta, 2).dot(n)
    Mm = X.diff(theta, phi_).dot(n)
    N = X.diff(phi_, 2).dot(n)
    nn = sp.sqrt(n.dot(n))
    H = (E * N - 2 * F * Mm + G * L) / ((E * G - F**2) * nn)
    return sp.lambdify((theta, phi_), H, "numpy")
