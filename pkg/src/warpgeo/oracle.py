"""Brute-force oracles used to certify the fast paths in tests and reports.

These deliberately take the slow, independent route: exhaustive grids over
subspaces, Gram-minor ranks, and finite-difference curvature from metric
samples alone.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from . import forms
from .errors import PTooLarge
from .forms import SNullityResult, SymmetricBilinearForm


def oracle_grassmann_grid(form: SymmetricBilinearForm, s: int, resolution: int | None = None,
                          rank_tol: float = 1e-9, refine: bool = True) -> SNullityResult:
    """Exhaustive angular sweep of Gr(s, p) for p <= 3, with descent refinement.

    Returns the certified maximum kernel dimension and a witness frame; p > 3
    is rejected.  s = p needs no sweep (the full space is the only subspace).
    """
    if form.p > 3:
        raise PTooLarge(f"grid oracle supports p <= 3, got p = {form.p}")
    res = forms.s_nullity(
        form, s, mode="exactSmall",
        grid_res=resolution or 720,
        sphere_grid=resolution * resolution if resolution else 4096,
        rank_tol=rank_tol, polish=refine)
    return SNullityResult(res.value, res.witness, True)


def rank_by_gram_minors(mat, tol=1e-9):
    """Rank via the largest order of a nonvanishing Gram minor of the columns.

    Independent of SVD: columns are normalized, then determinants of Gram
    submatrices are compared against tol.
    """
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    scale = np.linalg.norm(mat, axis=0)
    keep = scale > tol * max(1.0, float(scale.max(initial=0.0)))
    if not np.any(keep):
        return 0
    cols = mat[:, keep] / scale[keep]
    gram = cols.T @ cols
    m = gram.shape[0]
    rank = 0
    for r in range(1, m + 1):
        found = False
        for idx in combinations(range(m), r):
            if abs(np.linalg.det(gram[np.ix_(idx, idx)])) > tol:
                found = True
                break
        if found:
            rank = r
        else:
            break
    return rank


def fd_jacobian(fn, x, h=1e-4):
    """Central-difference Jacobian of a vector-valued map."""
    x = np.asarray(x, dtype=float)
    cols = []
    for a in range(x.size):
        e = np.zeros_like(x)
        e[a] = h
        cols.append((np.asarray(fn(x + e)) - np.asarray(fn(x - e))) / (2.0 * h))
    return np.column_stack(cols)


def fd_hessian(fn, x, h=1e-3):
    """Central second differences of a vector-valued map; (N, n, n) tensor."""
    x = np.asarray(x, dtype=float)
    n = x.size
    f0 = np.asarray(fn(x), dtype=float)
    out = np.empty((f0.size, n, n))
    for a in range(n):
        ea = np.zeros(n)
        ea[a] = h
        out[:, a, a] = (np.asarray(fn(x + ea)) - 2.0 * f0 + np.asarray(fn(x - ea))) / (h * h)
        for b in range(a + 1, n):
            eb = np.zeros(n)
            eb[b] = h
            mixed = (np.asarray(fn(x + ea + eb)) - np.asarray(fn(x + ea - eb))
                     - np.asarray(fn(x - ea + eb)) + np.asarray(fn(x - ea - eb))) / (4.0 * h * h)
            out[:, a, b] = mixed
            out[:, b, a] = mixed
    return out


def fd_gram(fn, x, h=1e-4, signs=None):
    """Pullback metric of a map by finite differences, with an optional signature."""
    jac = fd_jacobian(fn, x, h)
    if signs is None:
        return jac.T @ jac
    return jac.T @ (np.asarray(signs, dtype=float)[:, None] * jac)


def _christoffels_from_metric(metric_fn, x, h):
    x = np.asarray(x, dtype=float)
    n = x.size
    g = np.asarray(metric_fn(x), dtype=float)
    dg = np.empty((n, n, n))  # dg[c, a, b] = d g_ab / d x_c
    for c in range(n):
        e = np.zeros(n)
        e[c] = h
        dg[c] = (np.asarray(metric_fn(x + e)) - np.asarray(metric_fn(x - e))) / (2.0 * h)
    ginv = np.linalg.inv(g)
    # Gamma^m_ab = ginv[m,c] (dg[a,c,b] + dg[b,c,a] - dg[c,a,b]) / 2
    return 0.5 * np.einsum("mc,acb->mab", ginv,
                           np.einsum("acb->acb", dg)
                           + np.einsum("bca->acb", dg)
                           - np.einsum("cab->acb", dg))


def fd_riemann(metric_fn, x, h=1e-3):
    """Curvature tensor R[i,j,k,l] = <R(e_i,e_j)e_k, e_l> from metric samples only.

    Christoffel symbols come from central differences of the metric and their
    derivatives from a second central-difference layer; convention calibrated so
    a round sphere of curvature c gives R[i,j,j,i] ~ +c |e_i /\ e_j|^2.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    gamma0 = _christoffels_from_metric(metric_fn, x, h)
    dgamma = np.empty((n, n, n, n))  # dgamma[i, m, a, b] = d_i Gamma^m_ab
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        dgamma[i] = (_christoffels_from_metric(metric_fn, x + e, h)
                     - _christoffels_from_metric(metric_fn, x - e, h)) / (2.0 * h)
    # R(e_i, e_j) e_k = (d_i Gamma^m_jk - d_j Gamma^m_ik
    #                    + Gamma^m_ia Gamma^a_jk - Gamma^m_ja Gamma^a_ik) e_m
    rm = (np.einsum("imjk->ijkm", dgamma)
          - np.einsum("jmik->ijkm", dgamma)
          + np.einsum("mia,ajk->ijkm", gamma0, gamma0)
          - np.einsum("mja,aik->ijkm", gamma0, gamma0))
    g = np.asarray(metric_fn(x), dtype=float)
    return np.einsum("ijkm,ml->ijkl", rm, g)
