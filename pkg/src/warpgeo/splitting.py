"""Orthogonal splittings and the vanishing of mixed second-fundamental-form data.

Given a form whose nullities stay below the n - 2s thresholds and whose
Gauss-type curvature vanishes on the three mixed slot patterns, the span of the
mixed values must be zero.  This module checks the hypotheses, walks the
constructive argument (maximal-rank direction, kernel containment, projection
identity), detects adapted splittings, and hunts for counterexamples.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import forms as _forms
from . import linalg
from .config import RunConfig
from .errors import (DimensionMismatch, HypothesisFailed, TrialsZero,
                     WrongBlockCount)
from .forms import NullityConfig, NullityReport, SymmetricBilinearForm


@dataclass(frozen=True)
class OrthogonalSplitting:
    """Ordered orthogonal decomposition of the domain into column frames."""

    blocks: tuple  # tuple of (n, d_i) arrays with orthonormal columns

    def __post_init__(self):
        if not self.blocks:
            raise DimensionMismatch("a splitting needs at least one block")
        stacked = np.concatenate(self.blocks, axis=1)
        n = stacked.shape[0]
        if stacked.shape[1] != n:
            raise DimensionMismatch("block dimensions must sum to the total dimension")
        if np.max(np.abs(stacked.T @ stacked - np.eye(n))) > 1e-8:
            raise DimensionMismatch("blocks must be mutually orthogonal orthonormal frames")

    @property
    def n(self) -> int:
        return self.blocks[0].shape[0]

    @property
    def dims(self) -> tuple:
        return tuple(b.shape[1] for b in self.blocks)

    def projectors(self):
        return tuple(b @ b.T for b in self.blocks)

    @classmethod
    def from_coordinates(cls, n, groups):
        eye = np.eye(n)
        return cls(tuple(eye[:, list(g)] for g in groups))

    def pair(self, i):
        """Two-block coarsening (block i, everything else)."""
        rest = [b for j, b in enumerate(self.blocks) if j != i]
        return OrthogonalSplitting((self.blocks[i], np.concatenate(rest, axis=1)))


def _two_blocks(split: OrthogonalSplitting):
    if len(split.blocks) != 2:
        raise WrongBlockCount(f"expected exactly two blocks, got {len(split.blocks)}")
    return split.blocks


def mixed_matrix(form: SymmetricBilinearForm, split: OrthogonalSplitting):
    """Columns beta(e_a, f_b) over basis pairs of the two blocks; shape (p, d1*d2)."""
    b1, b2 = _two_blocks(split)
    vals = np.einsum("pnm,na,mb->pab", form.ops, b1, b2)
    return vals.reshape(form.p, -1)


def mixed_span(form: SymmetricBilinearForm, split: OrthogonalSplitting, rank_tol=1e-9):
    """Dimension and orthonormal basis of S = span of the mixed values.

    The rank threshold is relative to the form's own scale, so an adapted form
    contaminated by roundoff reports an empty span.
    """
    mixed = mixed_matrix(form, split)
    basis = linalg.column_space(mixed, rank_tol, scale=form.scale())
    return basis.shape[1], basis


def curvature_conditions(form: SymmetricBilinearForm, split: OrthogonalSplitting):
    """Max |R| over the three vanishing slot patterns (3+1, 2+2, 1+3)."""
    b1, b2 = _two_blocks(split)
    basis = np.concatenate([b1, b2], axis=1)
    r = _forms.gauss_tensor_full(form, basis)
    d1 = b1.shape[1]
    one, two = slice(0, d1), slice(d1, split.n)
    return float(max(
        np.abs(r[one, one, one, two]).max(initial=0.0),
        np.abs(r[one, one, two, two]).max(initial=0.0),
        np.abs(r[one, two, two, two]).max(initial=0.0),
    ))


def _b_matrix(form, x, block2):
    """B_x as a (p, d2) matrix: column b is beta(x, f_b)."""
    return np.einsum("pnm,n,mb->pb", form.ops, x, block2)


def max_rank_direction(form: SymmetricBilinearForm, split: OrthogonalSplitting,
                       trials: int = 16, seed: int = 0, rank_tol: float = 1e-9):
    """Direction x in the first block maximizing rank of y -> beta(x, y) on the second.

    Candidates are the block basis plus seeded random unit vectors; the rank is
    generically maximal, so sampling suffices at desk scale.  First maximizer
    (in candidate order) wins.
    """
    if trials < 1:
        raise TrialsZero("need at least one trial direction")
    b1, b2 = _two_blocks(split)
    d1 = b1.shape[1]
    rng = np.random.default_rng(seed)
    coeffs = [np.eye(d1)[:, j] for j in range(d1)]
    for _ in range(trials):
        v = rng.standard_normal(d1)
        coeffs.append(v / np.linalg.norm(v))
    best_x, best_rank = None, -1
    for c in coeffs:
        x = b1 @ c
        r = linalg.rank_with_tol(_b_matrix(form, x, b2), rank_tol)
        if r > best_rank:
            best_x, best_rank = x, r
    return best_x, best_rank


@dataclass(frozen=True)
class ProofSteps:
    kernel: np.ndarray        # ambient orthonormal basis of D = ker B_x
    step_one: float           # kernel containment: max over y of ||B_y restricted to D||
    step_two: float           # S-projection of beta(u,v) minus its E-component expansion


def verify_proof_steps(form: SymmetricBilinearForm, split: OrthogonalSplitting, x,
                       rank_tol: float = 1e-9,
                       nullity_config: NullityConfig | None = None,
                       report: NullityReport | None = None) -> ProofSteps:
    """Walk the constructive argument at the fixed direction x.

    Requires the nullity hypotheses (else HypothesisFailed).  Step one bounds
    every ||B_y v||, v in D = ker B_x, together with the pairings
    <B_x e_j, B_y v>; step two bounds the S-projection of
    beta(u,v) - sum <u,e_i><v,e_j> beta(e_i,e_j) over the complement basis {e_j}.
    """
    rep = report if report is not None else _forms.nullity_profile(
        form, nullity_config or NullityConfig())
    if not rep.hypothesis_ok:
        raise HypothesisFailed(
            f"nullity hypotheses fail: 2p={2*form.p} vs n={form.n}, values={rep.values}")
    b1, b2 = _two_blocks(split)
    x = np.asarray(x, dtype=float)
    bx = _b_matrix(form, x, b2)
    d_coords = linalg.kernel_basis(bx, rank_tol)          # in block-2 coordinates
    e_coords = linalg.complete_orthonormal(
        list(d_coords.T), b2.shape[1])[:, d_coords.shape[1]:] if d_coords.shape[1] else np.eye(b2.shape[1])

    step_one = 0.0
    bx_e = bx @ e_coords
    for j in range(b1.shape[1]):
        by = _b_matrix(form, b1[:, j], b2)
        by_d = by @ d_coords
        step_one = max(step_one, linalg.operator_norm(by_d))
        if bx_e.size and by_d.size:
            step_one = max(step_one, float(np.max(np.abs(bx_e.T @ by_d))))

    _, s_basis = mixed_span(form, split, rank_tol)
    if s_basis.shape[1] == 0:
        step_two = 0.0
    else:
        vals = np.einsum("pnm,na,mb->pab", form.ops, b2, b2)   # beta on block-2 pairs
        e_vals = np.einsum("pab,ai,bj->pij", vals, e_coords, e_coords)
        recon = np.einsum("ai,bj,pij->pab", e_coords, e_coords, e_vals)
        resid = np.einsum("qp,pab->qab", s_basis.T, vals - recon)
        step_two = float(np.sqrt((resid ** 2).sum(axis=0)).max(initial=0.0))
    return ProofSteps(b2 @ d_coords, step_one, step_two)


@dataclass(frozen=True)
class LemmaReport:
    curvature_residual: float
    hypothesis_ok: bool
    s_norm: float
    s_dim: int
    max_rank_direction: np.ndarray | None
    kernel_d: np.ndarray | None
    step_one_residual: float | None
    step_two_residual: float | None
    verdict: str                      # holds | hypothesisFails | violated
    nullities: NullityReport

    def to_dict(self):
        return {
            "curvature_residual": self.curvature_residual,
            "hypothesis_ok": self.hypothesis_ok,
            "s_norm": self.s_norm,
            "s_dim": self.s_dim,
            "max_rank_direction": None if self.max_rank_direction is None
            else list(self.max_rank_direction),
            "step_one_residual": self.step_one_residual,
            "step_two_residual": self.step_two_residual,
            "verdict": self.verdict,
            "nullity_values": list(self.nullities.values),
            "nullity_certified": list(self.nullities.certified),
        }


def lemma_verify(form: SymmetricBilinearForm, split: OrthogonalSplitting,
                 config: RunConfig | None = None) -> LemmaReport:
    """Full pipeline: hypothesis gate, curvature patterns, mixed span, proof steps.

    verdict "violated" (a counterexample) means the gate and the curvature
    conditions passed but the mixed span did not vanish; it must never occur.
    """
    cfg = config or RunConfig()
    ncfg = NullityConfig(grid_res=cfg.grid_res, sphere_grid=cfg.sphere_grid,
                         starts=cfg.starts, seed=cfg.seed, rank_tol=cfg.rank_tol)
    rep = _forms.nullity_profile(form, ncfg)
    curv = curvature_conditions(form, split)
    mixed = mixed_matrix(form, split)
    s_norm = linalg.operator_norm(mixed)
    s_dim, _ = mixed_span(form, split, cfg.rank_tol)

    if not rep.hypothesis_ok or curv > cfg.curvature_tol:
        return LemmaReport(curv, rep.hypothesis_ok, s_norm, s_dim, None, None,
                           None, None, "hypothesisFails", rep)
    x, _ = max_rank_direction(form, split, seed=cfg.seed, rank_tol=cfg.rank_tol)
    steps = verify_proof_steps(form, split, x, rank_tol=cfg.rank_tol, report=rep)
    verdict = "holds" if s_norm <= cfg.span_tol else "violated"
    return LemmaReport(curv, True, s_norm, s_dim, x, steps.kernel,
                       steps.step_one, steps.step_two, verdict, rep)


# -- adapted splitting detection ---------------------------------------------------


def detect_adapted_splitting(form: SymmetricBilinearForm, tol: float = 1e-8,
                             draws: int = 3, seed: int = 0) -> OrthogonalSplitting:
    """Finest orthogonal splitting making every shape operator block-diagonal.

    Eigen-decomposes seeded random combinations of the (norm-one rescaled)
    operators, splits along eigenvalue gaps, and re-merges any pair of blocks
    coupled above tol by some operator.  Extra draws break accidental
    eigenvalue collisions; a final merge pass guarantees adaptedness.
    """
    n, p = form.n, form.p
    norms = np.array([np.linalg.norm(op) for op in form.ops])
    norms[norms == 0.0] = 1.0
    ops = form.ops / norms[:, None, None]
    rng = np.random.default_rng(seed)

    blocks = [np.eye(n)]
    for _ in range(draws):
        w = rng.standard_normal(p)
        t_full = np.tensordot(w, ops, axes=1)
        new_blocks = []
        for frame in blocks:
            sub = frame.T @ t_full @ frame
            lam, q = np.linalg.eigh(linalg.symmetrize(sub))
            scale = max(1.0, float(np.abs(lam).max(initial=0.0)))
            cuts = [0]
            for i in range(1, lam.size):
                if lam[i] - lam[i - 1] > 1e-6 * scale:
                    cuts.append(i)
            cuts.append(lam.size)
            subs = [frame @ q[:, a:b] for a, b in zip(cuts[:-1], cuts[1:])]
            new_blocks.extend(_merge_coupled(ops, subs, tol))
        blocks = new_blocks
    blocks = _merge_coupled(ops, blocks, tol)
    order = np.argsort([int(np.argmax(np.abs(b).sum(axis=1))) for b in blocks],
                       kind="stable")
    return OrthogonalSplitting(tuple(blocks[i] for i in order))


def _merge_coupled(ops, blocks, tol):
    """Union blocks whose cross residual in some operator exceeds tol."""
    m = len(blocks)
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(m):
        for j in range(i + 1, m):
            resid = max(float(np.max(np.abs(blocks[i].T @ op @ blocks[j])))
                        for op in ops)
            if resid > tol:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    return [np.concatenate([blocks[i] for i in members], axis=1)
            for members in sorted(groups.values(), key=lambda g: g[0])]


def adaptedness_residual(form: SymmetricBilinearForm, split: OrthogonalSplitting):
    """Max off-block entry of the norm-one rescaled operators in the split basis."""
    norms = np.array([np.linalg.norm(op) for op in form.ops])
    norms[norms == 0.0] = 1.0
    worst = 0.0
    for i in range(len(split.blocks)):
        for j in range(i + 1, len(split.blocks)):
            bi, bj = split.blocks[i], split.blocks[j]
            for op, nrm in zip(form.ops, norms):
                worst = max(worst, float(np.max(np.abs(bi.T @ op @ bj))) / nrm)
    return worst


# -- randomized falsification -------------------------------------------------------


@dataclass(frozen=True)
class FalsifyReport:
    n: int
    p: int
    d1: int
    trials: int
    converged: int            # trials whose projected curvature residual passed
    kept: int                 # converged trials that also passed the nullity gate
    violations: int           # kept trials with mixed span above the tolerance
    worst_curvature: float    # among converged trials
    worst_s_norm: float       # among kept trials
    worst_step_one: float
    worst_step_two: float
    min_margin: int | None    # min over kept of (n - 2s) - nu_s

    def to_dict(self):
        return {k: getattr(self, k) for k in (
            "n", "p", "d1", "trials", "converged", "kept", "violations",
            "worst_curvature", "worst_s_norm", "worst_step_one",
            "worst_step_two", "min_margin")}


def _pattern_residuals(d1b, d2b, mixed):
    """The three mixed curvature patterns as arrays, given block data.

    d1b: (p,d1,d1) beta on block-1 pairs; d2b: (p,d2,d2); mixed: (p,d1,d2).
    """
    p1 = (np.einsum("axu,ayz->xyzu", mixed, d1b)
          - np.einsum("axz,ayu->xyzu", d1b, mixed))
    p2 = (np.einsum("axv,ayu->xyuv", mixed, mixed)
          - np.einsum("axu,ayv->xyuv", mixed, mixed))
    p3 = (np.einsum("axw,auv->xuvw", mixed, d2b)
          - np.einsum("axv,auw->xuvw", mixed, d2b))
    return p1, p2, p3


def project_to_curvature_conditions(d1b, d2b, mixed, iters=8, gtol=1e-14):
    """Gauss-Newton projection of the mixed block onto the vanishing patterns.

    The first and third patterns are linear in the mixed block, the second is
    quadratic; each step solves the linearized least-squares correction.
    """
    p, d1, d2 = mixed.shape
    eye1, eye2 = np.eye(d1), np.eye(d2)
    eyep = np.eye(p)
    # constant Jacobians of the linear patterns, flattened to (rows, p*d1*d2)
    j1 = (np.einsum("ab,xe,uf,ayz->xyzubef", eyep, eye1, eye2, d1b)
          - np.einsum("ab,ye,uf,axz->xyzubef", eyep, eye1, eye2, d1b))
    j3 = (np.einsum("ab,xe,wf,auv->xuvwbef", eyep, eye1, eye2, d2b)
          - np.einsum("ab,xe,vf,auw->xuvwbef", eyep, eye1, eye2, d2b))
    j1 = j1.reshape(-1, p * d1 * d2)
    j3 = j3.reshape(-1, p * d1 * d2)
    m = mixed.copy()
    for _ in range(iters):
        p1, p2, p3 = _pattern_residuals(d1b, d2b, m)
        resid = np.concatenate([p1.ravel(), p2.ravel(), p3.ravel()])
        if float(resid @ resid) <= gtol:
            break
        j2 = (np.einsum("ab,xe,vf,ayu->xyuvbef", eyep, eye1, eye2, m)
              + np.einsum("ab,ye,uf,axv->xyuvbef", eyep, eye1, eye2, m)
              - np.einsum("ab,xe,uf,ayv->xyuvbef", eyep, eye1, eye2, m)
              - np.einsum("ab,ye,vf,axu->xyuvbef", eyep, eye1, eye2, m))
        jac = np.concatenate([j1, j2.reshape(-1, p * d1 * d2), j3], axis=0)
        delta, *_ = np.linalg.lstsq(jac, -resid, rcond=None)
        m = m + delta.reshape(p, d1, d2)
    return m


def _assemble(d1b, d2b, mixed):
    p, d1, d2 = mixed.shape
    ops = np.zeros((p, d1 + d2, d1 + d2))
    ops[:, :d1, :d1] = d1b
    ops[:, d1:, d1:] = d2b
    ops[:, :d1, d1:] = mixed
    ops[:, d1:, :d1] = np.transpose(mixed, (0, 2, 1))
    return ops


def falsify(n: int, p: int, trials: int, seed: int = 0,
            config: RunConfig | None = None, d1: int | None = None) -> FalsifyReport:
    """Seeded counterexample hunt.

    Each trial draws an adapted form plus a small mixed perturbation, projects
    the mixed block onto the curvature vanishing patterns, gates on the nullity
    hypotheses, and then demands that the mixed span vanished.  Any violation
    is a build-stopping finding.
    """
    if trials < 1:
        raise TrialsZero("trials must be positive")
    cfg = config or RunConfig()
    d1 = d1 if d1 is not None else n // 2
    d2 = n - d1
    split = OrthogonalSplitting.from_coordinates(n, [range(d1), range(d1, n)])
    gate_cfg = NullityConfig(mode="search", starts=4, seed=cfg.seed,
                             rank_tol=cfg.rank_tol)
    root = np.random.SeedSequence(seed)
    converged = kept = violations = 0
    worst_curv = worst_s = worst_one = worst_two = 0.0
    min_margin = None
    for trial_seed in root.spawn(trials):
        rng = np.random.default_rng(trial_seed)
        d1b = np.stack([linalg.symmetrize(rng.standard_normal((d1, d1))) for _ in range(p)])
        d2b = np.stack([linalg.symmetrize(rng.standard_normal((d2, d2))) for _ in range(p)])
        mixed0 = 1e-2 * rng.standard_normal((p, d1, d2))
        mixed = project_to_curvature_conditions(d1b, d2b, mixed0)
        form = SymmetricBilinearForm(_assemble(d1b, d2b, mixed))
        curv = curvature_conditions(form, split)
        if curv > cfg.curvature_tol:
            continue
        converged += 1
        worst_curv = max(worst_curv, curv)
        rep = _forms.nullity_profile(form, gate_cfg)
        if not rep.hypothesis_ok:
            continue
        kept += 1
        min_margin = rep.margin() if min_margin is None else min(min_margin, rep.margin())
        s_norm = linalg.operator_norm(mixed.reshape(p, d1 * d2))
        worst_s = max(worst_s, s_norm)
        x, _ = max_rank_direction(form, split, seed=cfg.seed, rank_tol=cfg.rank_tol)
        steps = verify_proof_steps(form, split, x, rank_tol=cfg.rank_tol, report=rep)
        worst_one = max(worst_one, steps.step_one)
        worst_two = max(worst_two, steps.step_two)
        if s_norm > cfg.span_tol:
            violations += 1
    return FalsifyReport(n, p, d1, trials, converged, kept, violations,
                         worst_curv, worst_s, worst_one, worst_two, min_margin)
