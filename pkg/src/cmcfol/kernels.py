"""Per-point hot kernels with a numba path and a pure numpy path.

Both paths compute identical quantities; ``CMCFOL_BACKEND`` selects one
at call time (see :mod:`cmcfol._accel`). Index conventions:

``dg[n, k, i, j]``       = d_k g_ij
``d2g[n, k, l, i, j]``   = d_k d_l g_ij
``gamma[n, k, i, j]``    = Gamma^k_ij
``dgamma[n, m, k, i, j]`` = d_m Gamma^k_ij
"""
from __future__ import annotations

import numpy as np

from ._accel import backend, njit

__all__ = ["atom_jets", "curvature_from_jets"]


# -- metric atoms ---------------------------------------------------------

def _ipow(y, n):
    if n < 0:
        return np.zeros_like(y)
    return y ** n


def _atom_jets_numpy(pts, comp, coef, alpha, power, offset, with_d2=True):
    n = pts.shape[0]
    g = np.zeros((n, 3, 3))
    dg = np.zeros((n, 3, 3, 3))
    d2g = np.zeros((n, 3, 3, 3, 3)) if with_d2 else None
    for a in range(coef.shape[0]):
        y = pts - offset[a]
        s = np.einsum("ni,ni->n", y, y)
        p = power[a]
        al = alpha[a]
        # monomial and its derivatives
        pw = [[_ipow(y[:, k], al[k] - d) for d in range(3)] for k in range(3)]
        M = pw[0][0] * pw[1][0] * pw[2][0]
        Mk = np.zeros((n, 3))
        Mkl = np.zeros((n, 3, 3))
        for k in range(3):
            fk = [pw[q][1 if q == k else 0] for q in range(3)]
            Mk[:, k] = al[k] * fk[0] * fk[1] * fk[2]
            for l in range(3):
                if l == k:
                    fkl = [pw[q][2 if q == k else 0] for q in range(3)]
                    c = al[k] * (al[k] - 1)
                else:
                    fkl = [pw[q][1 if q in (k, l) else 0] for q in range(3)]
                    c = al[k] * al[l]
                Mkl[:, k, l] = c * fkl[0] * fkl[1] * fkl[2]
        R0 = s ** (-0.5 * p)
        R1 = s ** (-0.5 * p - 1.0)
        R2 = s ** (-0.5 * p - 2.0)
        R = R0
        Rk = -p * y * R1[:, None]
        Rkl = -p * np.eye(3)[None] * R1[:, None, None] + p * (p + 2.0) * y[:, :, None] * y[:, None, :] * R2[:, None, None]
        c = coef[a]
        V = c * M * R
        Vk = c * (Mk * R[:, None] + M[:, None] * Rk)
        i, j = comp[a]
        g[:, i, j] += V
        dg[:, :, i, j] += Vk
        if i != j:
            g[:, j, i] += V
            dg[:, :, j, i] += Vk
        if with_d2:
            Vkl = c * (
                Mkl * R[:, None, None]
                + Mk[:, :, None] * Rk[:, None, :]
                + Rk[:, :, None] * Mk[:, None, :]
                + M[:, None, None] * Rkl
            )
            d2g[:, :, :, i, j] += Vkl
            if i != j:
                d2g[:, :, :, j, i] += Vkl
    g += np.eye(3)[None]
    return g, dg, d2g


@njit
def _ipow_scalar(y, n):
    if n < 0:
        return 0.0
    r = 1.0
    for _ in range(n):
        r *= y
    return r


@njit
def _atom_jets_numba(pts, comp, coef, alpha, power, offset, with_d2):
    n = pts.shape[0]
    g = np.zeros((n, 3, 3))
    dg = np.zeros((n, 3, 3, 3))
    d2g = np.zeros((n, 3, 3, 3, 3))
    y = np.zeros(3)
    pw = np.zeros((3, 3))
    Mk = np.zeros(3)
    Mkl = np.zeros((3, 3))
    Rk = np.zeros(3)
    Rkl = np.zeros((3, 3))
    for q in range(n):
        for a in range(coef.shape[0]):
            s = 0.0
            for k in range(3):
                y[k] = pts[q, k] - offset[a, k]
                s += y[k] * y[k]
            p = power[a]
            for k in range(3):
                for d in range(3):
                    pw[k, d] = _ipow_scalar(y[k], alpha[a, k] - d)
            M = pw[0, 0] * pw[1, 0] * pw[2, 0]
            for k in range(3):
                t = float(alpha[a, k])
                for r in range(3):
                    t *= pw[r, 1] if r == k else pw[r, 0]
                Mk[k] = t
                for l in range(3):
                    if l == k:
                        t = float(alpha[a, k] * (alpha[a, k] - 1))
                        for r in range(3):
                            t *= pw[r, 2] if r == k else pw[r, 0]
                    else:
                        t = float(alpha[a, k] * alpha[a, l])
                        for r in range(3):
                            t *= pw[r, 1] if (r == k or r == l) else pw[r, 0]
                    Mkl[k, l] = t
            R = s ** (-0.5 * p)
            R1 = s ** (-0.5 * p - 1.0)
            R2 = s ** (-0.5 * p - 2.0)
            for k in range(3):
                Rk[k] = -p * y[k] * R1
                for l in range(3):
                    Rkl[k, l] = p * (p + 2.0) * y[k] * y[l] * R2
                Rkl[k, k] -= p * R1
            c = coef[a]
            i = comp[a, 0]
            j = comp[a, 1]
            V = c * M * R
            g[q, i, j] += V
            if i != j:
                g[q, j, i] += V
            for k in range(3):
                Vk = c * (Mk[k] * R + M * Rk[k])
                dg[q, k, i, j] += Vk
                if i != j:
                    dg[q, k, j, i] += Vk
                if with_d2:
                    for l in range(3):
                        Vkl = c * (Mkl[k, l] * R + Mk[k] * Rk[l] + Rk[k] * Mk[l] + M * Rkl[k, l])
                        d2g[q, k, l, i, j] += Vkl
                        if i != j:
                            d2g[q, k, l, j, i] += Vkl
        for k in range(3):
            g[q, k, k] += 1.0
    return g, dg, d2g


def atom_jets(pts, comp, coef, alpha, power, offset, with_d2=True):
    """Metric, first and second derivatives of ``delta + sum(atoms)``.

    Parameters
    ----------
    pts : ndarray, shape (N, 3)
    comp : int ndarray, shape (A, 2)
        Component ``(i, j)`` of each atom, 0-based; the symmetric partner
        is filled automatically.
    coef, power : ndarray, shape (A,)
    alpha : int ndarray, shape (A, 3)
    offset : ndarray, shape (A, 3)
    """
    pts = np.ascontiguousarray(pts, dtype=float)
    if backend() == "numba" and coef.shape[0] > 0:
        g, dg, d2g = _atom_jets_numba(pts, comp, coef, alpha, power, offset, with_d2)
        return g, dg, (d2g if with_d2 else None)
    return _atom_jets_numpy(pts, comp, coef, alpha, power, offset, with_d2)


# -- curvature --------------------------------------------------------------

def _curvature_numpy(g, dg, d2g):
    ginv = np.linalg.inv(g)
    # lowered Christoffels G[l, i, j] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    low = 0.5 * (
        np.einsum("nijl->nlij", dg) + np.einsum("njil->nlij", dg) - dg
    )
    gamma = np.einsum("nkl,nlij->nkij", ginv, low)
    if d2g is None:
        return ginv, gamma, None, None, None
    dlow = 0.5 * (
        np.einsum("nmijl->nmlij", d2g) + np.einsum("nmjil->nmlij", d2g) - d2g
    )
    dginv = -np.einsum("nka,nmab,nbl->nmkl", ginv, dg, ginv)
    dgamma = np.einsum("nmkl,nlij->nmkij", dginv, low) + np.einsum("nkl,nmlij->nmkij", ginv, dlow)
    ric = (
        np.einsum("nkkij->nij", dgamma)
        - np.einsum("njkik->nij", dgamma)
        + np.einsum("nkkl,nlij->nij", gamma, gamma)
        - np.einsum("nkjl,nlik->nij", gamma, gamma)
    )
    ric = 0.5 * (ric + np.swapaxes(ric, 1, 2))
    scal = np.einsum("nij,nij->n", ginv, ric)
    return ginv, gamma, dgamma, ric, scal


@njit
def _curvature_numba(g, dg, d2g):
    n = g.shape[0]
    ginv = np.zeros((n, 3, 3))
    gamma = np.zeros((n, 3, 3, 3))
    dgamma = np.zeros((n, 3, 3, 3, 3))
    ric = np.zeros((n, 3, 3))
    scal = np.zeros(n)
    low = np.zeros((3, 3, 3))
    dlow = np.zeros((3, 3, 3, 3))
    dginv = np.zeros((3, 3, 3))
    for q in range(n):
        gi = np.linalg.inv(g[q])
        ginv[q] = gi
        for l in range(3):
            for i in range(3):
                for j in range(3):
                    low[l, i, j] = 0.5 * (dg[q, i, j, l] + dg[q, j, i, l] - dg[q, l, i, j])
                    for m in range(3):
                        dlow[m, l, i, j] = 0.5 * (d2g[q, m, i, j, l] + d2g[q, m, j, i, l] - d2g[q, m, l, i, j])
        for k in range(3):
            for i in range(3):
                for j in range(3):
                    t = 0.0
                    for l in range(3):
                        t += gi[k, l] * low[l, i, j]
                    gamma[q, k, i, j] = t
        for m in range(3):
            for k in range(3):
                for l in range(3):
                    t = 0.0
                    for a in range(3):
                        for b in range(3):
                            t -= gi[k, a] * dg[q, m, a, b] * gi[b, l]
                    dginv[m, k, l] = t
        for m in range(3):
            for k in range(3):
                for i in range(3):
                    for j in range(3):
                        t = 0.0
                        for l in range(3):
                            t += dginv[m, k, l] * low[l, i, j] + gi[k, l] * dlow[m, l, i, j]
                        dgamma[q, m, k, i, j] = t
        for i in range(3):
            for j in range(3):
                t = 0.0
                for k in range(3):
                    t += dgamma[q, k, k, i, j] - dgamma[q, j, k, i, k]
                    for l in range(3):
                        t += gamma[q, k, k, l] * gamma[q, l, i, j] - gamma[q, k, j, l] * gamma[q, l, i, k]
                ric[q, i, j] = t
        for i in range(3):
            for j in range(i + 1, 3):
                v = 0.5 * (ric[q, i, j] + ric[q, j, i])
                ric[q, i, j] = v
                ric[q, j, i] = v
        t = 0.0
        for i in range(3):
            for j in range(3):
                t += gi[i, j] * ric[q, i, j]
        scal[q] = t
    return ginv, gamma, dgamma, ric, scal


def curvature_from_jets(g, dg, d2g=None):
    """Inverse metric, Christoffels and (if ``d2g`` given) their
    derivatives, Ricci tensor and scalar curvature.

    Returns
    -------
    ginv, gamma, dgamma, ric, scal
        The last three are ``None`` when ``d2g`` is ``None``.
    """
    if d2g is not None and backend() == "numba":
        return _curvature_numba(
            np.ascontiguousarray(g), np.ascontiguousarray(dg), np.ascontiguousarray(d2g)
        )
    return _curvature_numpy(g, dg, d2g)
