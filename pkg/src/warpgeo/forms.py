"""Symmetric bilinear forms into an inner-product space.

A form beta: V x V -> W is stored as its family of shape operators A^1..A^p in an
orthonormal basis of W, so beta(x, y)_a = x^T A^a y.  The module computes the
Gauss-type curvature tensor of beta, kernel dimensions over normal subspaces, and
s-nullities by certified grid sweeps (small p) or seeded multistart search.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import linalg
from .errors import (AsymmetryExceedsTol, BudgetZero, DimensionMismatch,
                     FrameNotOrthonormal, PTooLarge, SOutOfRange)

_GOLDEN = np.pi * (3.0 - np.sqrt(5.0))


@dataclass(frozen=True)
class InnerSpace:
    """Finite-dimensional real space with a Euclidean or Lorentzian pairing.

    Lorentzian means exactly one minus sign, placed on coordinate 0.
    """

    dim: int
    signature: str = "euclidean"

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionMismatch(f"dim must be >= 1, got {self.dim}")
        if self.signature not in ("euclidean", "lorentzian"):
            raise ValueError(f"unknown signature {self.signature!r}")

    @property
    def signs(self):
        s = np.ones(self.dim)
        if self.signature == "lorentzian":
            s[0] = -1.0
        return s

    def inner(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if u.shape[-1] != self.dim or v.shape[-1] != self.dim:
            raise DimensionMismatch("vector length does not match space dimension")
        return (u * self.signs * v).sum(axis=-1)


@dataclass(frozen=True)
class SymmetricBilinearForm:
    """beta as p symmetric n x n shape operators (already symmetrized)."""

    ops: np.ndarray          # (p, n, n)
    sym_tol: float = 1e-8

    @property
    def n(self) -> int:
        return self.ops.shape[1]

    @property
    def p(self) -> int:
        return self.ops.shape[0]

    def shape_operator(self, u):
        """A_u = sum_a u_a A^a for a direction u in W."""
        u = np.asarray(u, dtype=float)
        if u.shape != (self.p,):
            raise DimensionMismatch(f"direction must have length {self.p}")
        return np.tensordot(u, self.ops, axes=1)

    def conjugated(self, q):
        """Domain change of basis: every A^a becomes q^T A^a q."""
        q = np.asarray(q, dtype=float)
        return SymmetricBilinearForm(np.einsum("ij,ajk,kl->ail", q.T, self.ops, q),
                                     self.sym_tol)

    def rotated(self, r):
        """Orthogonal mix of the normal basis: new A^b = sum_a r_ab A^a."""
        r = np.asarray(r, dtype=float)
        return SymmetricBilinearForm(np.einsum("ab,anm->bnm", r, self.ops), self.sym_tol)

    def scale(self) -> float:
        """Reference magnitude of the family (largest operator Frobenius norm)."""
        return float(max(np.linalg.norm(op) for op in self.ops))


def make_form(matrices, sym_tol=1e-8) -> SymmetricBilinearForm:
    """Build a form from a family of square matrices, rejecting real asymmetry.

    Matrices are symmetrized after the check so beta(x, y) = beta(y, x) holds exactly.
    """
    mats = [np.asarray(m, dtype=float) for m in matrices]
    if not mats:
        raise DimensionMismatch("a form needs at least one shape operator (p >= 1)")
    n = mats[0].shape[0]
    for m in mats:
        if m.ndim != 2 or m.shape != (n, n):
            raise DimensionMismatch(f"all operators must be {n}x{n} square matrices")
    worst = max(linalg.asymmetry(m) for m in mats)
    if worst > sym_tol:
        raise AsymmetryExceedsTol(
            f"asymmetric part {worst:.3e} exceeds tolerance {sym_tol:.3e}")
    ops = np.stack([linalg.symmetrize(m) for m in mats])
    return SymmetricBilinearForm(ops, float(sym_tol))


def evaluate(form: SymmetricBilinearForm, x, y):
    """beta(x, y) as a vector of W-components."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (form.n,) or y.shape != (form.n,):
        raise DimensionMismatch(f"arguments must have length {form.n}")
    return np.einsum("anm,n,m->a", form.ops, x, y)


def gauss_tensor(form: SymmetricBilinearForm, x, y, z, w) -> float:
    """<beta(x,w), beta(y,z)> - <beta(x,z), beta(y,w)> with the Euclidean W pairing."""
    bxw = evaluate(form, x, w)
    byz = evaluate(form, y, z)
    bxz = evaluate(form, x, z)
    byw = evaluate(form, y, w)
    return float(bxw @ byz - bxz @ byw)


def gauss_tensor_full(form: SymmetricBilinearForm, basis=None):
    """Full (n,n,n,n) array R[i,j,k,l] = R(e_i, e_j, e_k, e_l) over a domain basis."""
    b = form.ops if basis is None else np.einsum(
        "anm,ni,mj->aij", form.ops, np.asarray(basis, float), np.asarray(basis, float))
    return np.einsum("ail,ajk->ijkl", b, b) - np.einsum("aik,ajl->ijkl", b, b)


def _check_frame(form, frame, rank_tol):
    frame = np.asarray(frame, dtype=float)
    if frame.ndim == 1:
        frame = frame[:, None]
    if frame.ndim != 2 or frame.shape[0] != form.p:
        raise DimensionMismatch(
            f"subspace frame must be {form.p} x s (columns spanning U)")
    if not linalg.frame_is_orthonormal(frame, max(rank_tol, 1e-12)):
        raise FrameNotOrthonormal("subspace frame is not orthonormal")
    return frame


def nullity_at_subspace(form: SymmetricBilinearForm, frame, rank_tol=1e-9) -> int:
    """dim of the common kernel of {A_u : u column of the frame}.

    Computed by stacking the s shape operators and counting singular values
    below rank_tol times the largest.
    """
    frame = _check_frame(form, frame, rank_tol)
    return int(_kernel_dims_batch(form.ops, frame[None, :, :], rank_tol)[0])


def _kernel_dims_batch(ops, frames, rank_tol):
    """Kernel dimensions for a batch of frames; frames has shape (B, p, s)."""
    stacked = np.einsum("baj,anm->bjnm", frames, ops)
    b, s, n, _ = stacked.shape
    sv = np.linalg.svd(stacked.reshape(b, s * n, n), compute_uv=False)
    smax = sv[:, 0]
    thresh = rank_tol * smax
    dims = (sv <= thresh[:, None]).sum(axis=1)
    dims[smax <= 0.0] = n
    return dims.astype(int)


def common_kernel(form: SymmetricBilinearForm, rank_tol=1e-9):
    """Orthonormal basis of the intersection of all shape-operator kernels."""
    stacked = form.ops.reshape(form.p * form.n, form.n)
    return linalg.kernel_basis(stacked, rank_tol)


@dataclass(frozen=True)
class SNullityResult:
    value: int
    witness: np.ndarray      # (p, s) orthonormal frame achieving the value
    certified: bool


@dataclass(frozen=True)
class NullityConfig:
    mode: str = "auto"           # auto | exactSmall | search
    grid_res: int = 720          # angular steps on Gr(1,2)
    sphere_grid: int = 4096      # directions on Gr(1,3)
    starts: int = 8
    seed: int = 0
    rank_tol: float = 1e-9
    polish: bool = True


@dataclass(frozen=True)
class NullityReport:
    values: tuple            # nu_1 .. nu_p
    witnesses: tuple         # matching frames
    certified: tuple         # per-s flag: exact/grid oracle vs search lower bound
    hypothesis_ok: bool      # 2p < n and nu_s < n - 2s for every s
    n: int
    p: int

    def margin(self):
        """min over s of (n - 2s) - nu_s; positive iff the nullity bounds hold."""
        return min((self.n - 2 * (s + 1)) - v for s, v in enumerate(self.values))


# -- candidate machinery ---------------------------------------------------------

def _axis_frames(p, s):
    cols = []
    from itertools import combinations
    for combo in combinations(range(p), s):
        f = np.zeros((p, s))
        for j, a in enumerate(combo):
            f[a, j] = 1.0
        cols.append(f)
    return cols


def _pencil_directions(ops):
    """Directions (in a 2-dim W) where the pencil's determinant vanishes.

    Solving det(c*A^1 + s*A^2) = 0 through the generalized eigenvalues of
    (A^2, A^1); these are the only places a kernel can appear when the pencil
    is not identically singular.
    """
    from scipy.linalg import eig
    a1, a2 = ops[0], ops[1]
    dirs = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    try:
        vals = eig(a2, a1, right=False)
    except Exception:
        return dirs
    for lam in np.atleast_1d(vals):
        if not np.isfinite(lam):
            continue
        if abs(lam.imag) > 1e-9 * (1.0 + abs(lam.real)):
            continue
        d = np.array([-lam.real, 1.0])
        nrm = np.linalg.norm(d)
        if nrm > 0:
            dirs.append(d / nrm)
    return dirs


def _fibonacci_hemisphere(count):
    """Deterministic direction set covering half of S^2 (lines in a 3-dim W)."""
    k = np.arange(count)
    z = (k + 0.5) / count
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = k * _GOLDEN
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def _line_frames_p2(res):
    theta = np.arange(res) * (np.pi / res)
    return np.stack([np.cos(theta), np.sin(theta)], axis=1)[:, :, None]


def _complement_frames(dirs):
    """For each direction u in R^3, an orthonormal frame of the plane u-perp."""
    b = dirs.shape[0]
    # seed each QR with u and the two axes least aligned with it
    order = np.argsort(np.abs(dirs), axis=1)
    mats = np.zeros((b, 3, 3))
    mats[:, :, 0] = dirs
    rows = np.arange(b)
    mats[rows, order[:, 0], 1] = 1.0
    mats[rows, order[:, 1], 2] = 1.0
    return _orthonormalize_batch(mats)[:, :, 1:]


def _grid_frames(form, s, grid_res, sphere_grid):
    """Deterministic candidate frames on Gr(s, p) for p <= 3 (includes axes)."""
    p = form.p
    if p == 2 and s == 1:
        frames = _line_frames_p2(grid_res)
        extra = [d[:, None] for d in _pencil_directions(form.ops)]
        return np.concatenate([frames, np.stack(extra)], axis=0)
    if p == 3 and s == 1:
        dirs = _fibonacci_hemisphere(sphere_grid)
        frames = dirs[:, :, None]
        extra = [f for f in _axis_frames(3, 1)]
        # pencil candidates inside each coordinate plane
        for (a, b) in ((0, 1), (0, 2), (1, 2)):
            for d in _pencil_directions(form.ops[[a, b]]):
                v = np.zeros(3)
                v[a], v[b] = d
                extra.append(v[:, None])
        return np.concatenate([frames, np.stack(extra)], axis=0)
    if p == 3 and s == 2:
        dirs = np.concatenate([_fibonacci_hemisphere(sphere_grid), np.eye(3)], axis=0)
        return _complement_frames(dirs)
    raise PTooLarge(f"no deterministic grid for p={p}, s={s}")


# -- refinement ------------------------------------------------------------------

def _orthonormalize(frame):
    if frame.shape[1] == 1:
        nrm = np.linalg.norm(frame)
        return frame / nrm if nrm > 0 else frame
    q, r = np.linalg.qr(frame)
    return q * np.sign(np.where(np.diag(r) == 0.0, 1.0, np.diag(r)))


def _orthonormalize_batch(frames):
    q, r = np.linalg.qr(frames)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    return q * np.where(d == 0.0, 1.0, d)[:, None, :]


def _chart_frame(base, complement, t):
    """Grassmann chart: tilt the base frame by tangent coordinates t."""
    s = base.shape[1]
    mix = complement @ t.reshape(complement.shape[1], s)
    return _orthonormalize(base + mix)


def _singular_spectrum(ops, frame):
    """Singular values (descending) of the stacked shape operators over the frame."""
    if frame.shape[1] == 1:
        a_u = np.tensordot(frame[:, 0], ops, axes=1)
        return np.sort(np.abs(np.linalg.eigvalsh(a_u)))[::-1]
    stacked = np.einsum("aj,anm->jnm", frame, ops)
    s, n, _ = stacked.shape
    return np.linalg.svd(stacked.reshape(s * n, n), compute_uv=False)


def _gap_singular_value(ops, frame, target):
    """The singular value that must vanish for the kernel to reach `target`."""
    return _singular_spectrum(ops, frame)[ops.shape[1] - target]


def _refine_frame(ops, frame, current, rank_tol, maxiter=160):
    """Try to raise the kernel dimension by descending the gap singular value.

    Accepts only strict integer nullity increases; returns (frame, value).
    """
    p, s = frame.shape
    n = ops.shape[1]
    value = current
    best = frame
    while value < n:
        target = value + 1
        sv = _singular_spectrum(ops, best)
        if sv[0] <= 0.0 or sv[n - target] > 0.3 * sv[0]:
            break  # no kernel jump reachable from this basin
        comp = linalg.complete_orthonormal(list(best.T), p)[:, s:]
        if comp.shape[1] == 0:
            break

        def objective(t):
            return _gap_singular_value(ops, _chart_frame(best, comp, t), target)

        t0 = np.zeros(comp.shape[1] * s)
        res = minimize(objective, t0, method="Nelder-Mead",
                       options={"maxiter": maxiter, "xatol": 1e-12, "fatol": 1e-15})
        cand = _chart_frame(best, comp, res.x)
        got = int(_kernel_dims_batch(ops, cand[None], rank_tol)[0])
        if got <= value:
            break
        best, value = cand, got
    return best, value


# -- s-nullity -------------------------------------------------------------------

def s_nullity(form: SymmetricBilinearForm, s: int, mode: str = "auto",
              grid_res: int = 720, sphere_grid: int = 4096, starts: int = 8,
              seed: int = 0, rank_tol: float = 1e-9, polish: bool = True) -> SNullityResult:
    """Maximize the common-kernel dimension over s-dimensional subspaces of W.

    s = p is always exact (the full normal space is the only subspace), as is
    p = 1.  Mode exactSmall (p <= 3) sweeps a deterministic grid fine enough to
    certify at desk scale; search returns a witness-achieved lower bound from
    seeded multistart.  Both refine candidates by singular-value descent,
    accepting only strict nullity increases.
    """
    if not 1 <= s <= form.p:
        raise SOutOfRange(f"s must satisfy 1 <= s <= {form.p}, got {s}")
    if mode not in ("auto", "exactSmall", "search"):
        raise ValueError(f"unknown mode {mode!r}")
    if grid_res <= 0 or sphere_grid <= 0 or starts <= 0:
        raise BudgetZero("grid resolution and start counts must be positive")

    if s == form.p:
        kernel = common_kernel(form, rank_tol)
        return SNullityResult(kernel.shape[1], np.eye(form.p), True)

    if mode == "exactSmall" and form.p > 3:
        raise PTooLarge(f"exactSmall supports p <= 3, got p = {form.p}")
    use_grid = mode == "exactSmall" or (mode == "auto" and form.p <= 3)

    if use_grid:
        frames = _grid_frames(form, s, grid_res, sphere_grid)
        dims = _kernel_dims_batch(form.ops, frames, rank_tol)
        order = int(np.argmax(dims))
        best_frame, best = frames[order], int(dims[order])
        if polish and best < form.n:
            # resume from the most promising cells: smallest gap singular value
            cells = frames[_top_cells(dims, best)]
            gaps = np.array([_gap_singular_value(form.ops, f, best + 1) for f in cells])
            improved = 0
            for k, cand in enumerate(cells[np.argsort(gaps, kind="stable")[:16]]):
                f2, v2 = _refine_frame(form.ops, cand, int(
                    _kernel_dims_batch(form.ops, cand[None], rank_tol)[0]), rank_tol)
                if v2 > best:
                    best_frame, best = f2, v2
                    improved += 1
                if improved and k >= 5:
                    break
        return SNullityResult(best, best_frame, True)

    return _search(form, s, starts, seed, rank_tol, polish)


def _top_cells(dims, best, cap=64):
    idx = np.flatnonzero(dims == dims.max())
    if idx.size >= cap:
        return idx[:cap]
    rest = np.flatnonzero(dims < dims.max())
    return np.concatenate([idx, rest[:cap - idx.size]])


def _search(form, s, starts, seed, rank_tol, polish):
    """Seeded multistart over Gr(s, p): random rotations plus descent refinement."""
    p = form.p
    seeds = np.random.SeedSequence(seed).spawn(starts)
    frames = _axis_frames(p, s)[: max(1, starts // 2)]
    for ss in seeds:
        rng = np.random.default_rng(ss)
        frames.append(linalg.random_orthonormal(rng, p, s))
    best_frame, best, best_idx = None, -1, 0
    for idx, frame in enumerate(frames):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, idx)))
        value = int(_kernel_dims_batch(form.ops, frame[None], rank_tol)[0])
        # small random rotations, keeping strict increases
        for scale in (0.3, 0.1, 0.03):
            props = _orthonormalize_batch(
                frame[None] + scale * rng.standard_normal((16, p, s)))
            dims = _kernel_dims_batch(form.ops, props, rank_tol)
            j = int(np.argmax(dims))
            if dims[j] > value:
                frame, value = props[j], int(dims[j])
        if polish:
            frame, value = _refine_frame(form.ops, frame, value, rank_tol)
        if value > best:
            best_frame, best, best_idx = frame, value, idx
    return SNullityResult(best, best_frame, False)


def nullity_profile(form: SymmetricBilinearForm, config: NullityConfig | None = None) -> NullityReport:
    """nu_s for every s, plus the hypothesis flags 2p < n and nu_s < n - 2s."""
    cfg = config or NullityConfig()
    values, witnesses, certified = [], [], []
    for s in range(1, form.p + 1):
        res = s_nullity(form, s, mode=cfg.mode, grid_res=cfg.grid_res,
                        sphere_grid=cfg.sphere_grid, starts=cfg.starts,
                        seed=cfg.seed, rank_tol=cfg.rank_tol, polish=cfg.polish)
        values.append(res.value)
        witnesses.append(res.witness)
        certified.append(res.certified)
    ok = 2 * form.p < form.n and all(
        v < form.n - 2 * s for s, v in zip(range(1, form.p + 1), values))
    return NullityReport(tuple(values), tuple(witnesses), tuple(certified),
                         bool(ok), form.n, form.p)
