"""Shared numerical helpers: tolerant ranks and kernels, frames, signature pairings,
and the even power series behind constant-curvature exponential charts."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch


def symmetrize(mat):
    mat = np.asarray(mat, dtype=float)
    return 0.5 * (mat + mat.T)


def asymmetry(mat):
    mat = np.asarray(mat, dtype=float)
    return float(np.max(np.abs(mat - mat.T))) if mat.size else 0.0


def rank_with_tol(mat, rank_tol, scale=None):
    """Rank counting singular values above rank_tol times the reference scale.

    The scale defaults to the largest singular value of mat itself; passing the
    size of a surrounding problem avoids fabricating rank out of noise when mat
    is essentially zero.
    """
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    ref = s[0] if scale is None else scale
    if ref <= 0.0:
        return 0
    return int(np.count_nonzero(s > rank_tol * ref))


def kernel_basis(mat, rank_tol, scale=None):
    """Orthonormal basis (columns) of the right null space at the given tolerance."""
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    n = mat.shape[1]
    if mat.size == 0:
        return np.eye(n)
    u, s, vh = np.linalg.svd(mat)
    ref = (s[0] if s.size else 0.0) if scale is None else scale
    if ref <= 0.0:
        return np.eye(n)
    r = int(np.count_nonzero(s > rank_tol * ref))
    return vh[r:].T.copy()


def column_space(mat, rank_tol, scale=None):
    """Orthonormal basis (columns) of the column space at the given tolerance."""
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    if mat.size == 0:
        return np.zeros((mat.shape[0], 0))
    u, s, vh = np.linalg.svd(mat)
    ref = (s[0] if s.size else 0.0) if scale is None else scale
    if ref <= 0.0:
        return np.zeros((mat.shape[0], 0))
    r = int(np.count_nonzero(s > rank_tol * ref))
    return u[:, :r].copy()


def operator_norm(mat):
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    if mat.size == 0:
        return 0.0
    return float(np.linalg.norm(mat, 2))


def intersect_subspaces(basis_a, basis_b, tol=1e-8):
    """Orthonormal basis of the intersection of two column spans.

    Uses principal angles: directions with cosine within tol of 1 are common.
    """
    if basis_a.shape[1] == 0 or basis_b.shape[1] == 0:
        return np.zeros((basis_a.shape[0], 0))
    u, s, vh = np.linalg.svd(basis_a.T @ basis_b)
    keep = s >= 1.0 - tol
    if not np.any(keep):
        return np.zeros((basis_a.shape[0], 0))
    vecs = basis_a @ u[:, keep]
    q, _ = np.linalg.qr(vecs)
    return q[:, : int(np.count_nonzero(keep))]


def random_orthonormal(rng, n, k=None):
    """Seeded random orthonormal frame with a deterministic sign convention."""
    k = n if k is None else k
    g = rng.standard_normal((n, k))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.where(np.diag(r) == 0.0, 1.0, np.diag(r)))


def frame_is_orthonormal(frame, tol, gram_signs=None):
    frame = np.asarray(frame, dtype=float)
    if frame.ndim != 2:
        return False
    if gram_signs is None:
        g = frame.T @ frame
    else:
        g = frame.T @ (gram_signs[:, None] * frame)
    return bool(np.max(np.abs(g - np.eye(frame.shape[1]))) <= tol)


def complete_orthonormal(vectors, dim, signs=None, tol=1e-10):
    """Extend the given ambient vectors to a full pseudo-orthonormal basis.

    Gram-Schmidt against the (possibly Lorentzian) pairing diag(signs), consuming
    the coordinate axes in order; deterministic.  Returns an array whose first
    columns are the normalized inputs and whose remaining columns complete them.
    """
    signs = np.ones(dim) if signs is None else np.asarray(signs, dtype=float)
    basis = []
    basis_signs = []

    def pair(u, v):
        return float(u @ (signs * v))

    def push(v):
        w = v.astype(float).copy()
        for b, sb in zip(basis, basis_signs):
            w -= sb * pair(b, w) * b
        norm2 = pair(w, w)
        if abs(norm2) <= tol * max(1.0, float(w @ w)):
            return False
        w /= np.sqrt(abs(norm2))
        basis.append(w)
        basis_signs.append(1.0 if norm2 > 0 else -1.0)
        return True

    for v in vectors:
        if not push(np.asarray(v, dtype=float)):
            raise DimensionMismatch("degenerate or dependent vectors cannot seed a frame")
    for i in range(dim):
        if len(basis) == dim:
            break
        push(np.eye(dim)[i])
    if len(basis) != dim:
        raise DimensionMismatch("could not complete frame; pairing degenerate on complement")
    return np.column_stack(basis)


# Even series: cos_sqrt(y) = cos(sqrt(y)) for y >= 0 and cosh(sqrt(-y)) for y < 0,
# and its sinc companion.  Both are entire in y, which lets one chart formula cover
# spherical, flat, and hyperbolic factors.

_SERIES_CUT = 1e-3


def _series(y, coeffs):
    out = np.zeros_like(y)
    for c in reversed(coeffs):
        out = out * y + c
    return out


def cos_sqrt(y):
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    pos = y > _SERIES_CUT
    neg = y < -_SERIES_CUT
    mid = ~(pos | neg)
    out[pos] = np.cos(np.sqrt(y[pos]))
    out[neg] = np.cosh(np.sqrt(-y[neg]))
    # cos(sqrt(y)) = 1 - y/2 + y^2/24 - y^3/720 + y^4/40320
    out[mid] = _series(y[mid], [1.0, -0.5, 1.0 / 24, -1.0 / 720, 1.0 / 40320])
    return out if out.ndim else float(out)


def sinc_sqrt(y):
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    pos = y > _SERIES_CUT
    neg = y < -_SERIES_CUT
    mid = ~(pos | neg)
    r = np.sqrt(y[pos])
    out[pos] = np.sin(r) / r
    r = np.sqrt(-y[neg])
    out[neg] = np.sinh(r) / r
    # sin(sqrt(y))/sqrt(y) = 1 - y/6 + y^2/120 - y^3/5040 + y^4/362880
    out[mid] = _series(y[mid], [1.0, -1.0 / 6, 1.0 / 120, -1.0 / 5040, 1.0 / 362880])
    return out if out.ndim else float(out)


def dcos_sqrt(y):
    """d/dy cos_sqrt(y); identically -sinc_sqrt(y)/2."""
    return -0.5 * sinc_sqrt(y)


def dsinc_sqrt(y):
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    big = np.abs(y) > _SERIES_CUT
    mid = ~big
    yb = y[big]
    out[big] = (cos_sqrt(yb) - sinc_sqrt(yb)) / (2.0 * yb)
    out[mid] = _series(y[mid], [-1.0 / 6, 2.0 / 120, -3.0 / 5040, 4.0 / 362880])
    return out if out.ndim else float(out)


def d2cos_sqrt(y):
    return -0.5 * dsinc_sqrt(y)


def d2sinc_sqrt(y):
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    big = np.abs(y) > _SERIES_CUT
    mid = ~big
    yb = y[big]
    out[big] = ((dcos_sqrt(yb) - dsinc_sqrt(yb)) * yb - (cos_sqrt(yb) - sinc_sqrt(yb))) / (2.0 * yb * yb)
    out[mid] = _series(y[mid], [2.0 / 120, -6.0 / 5040, 12.0 / 362880, -20.0 / 39916800])
    return out if out.ndim else float(out)


def one_minus_sinc2_over(y):
    """(1 - sinc_sqrt(y)^2) / y, extended through y = 0 (value 1/3)."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    big = np.abs(y) > _SERIES_CUT
    mid = ~big
    v = sinc_sqrt(y[big])
    out[big] = (1.0 - v * v) / y[big]
    out[mid] = _series(y[mid], [1.0 / 3, -2.0 / 45, 1.0 / 315, -2.0 / 14175])
    return out if out.ndim else float(out)


def done_minus_sinc2_over(y):
    """Derivative of one_minus_sinc2_over."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    big = np.abs(y) > _SERIES_CUT
    mid = ~big
    yb = y[big]
    v = sinc_sqrt(yb)
    dv = dsinc_sqrt(yb)
    out[big] = (-2.0 * v * dv * yb - (1.0 - v * v)) / (yb * yb)
    out[mid] = _series(y[mid], [-2.0 / 45, 2.0 / 315, -6.0 / 14175, 8.0 / 467775])
    return out if out.ndim else float(out)
