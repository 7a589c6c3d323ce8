"""Numerical compatibility test for noisy assemblages.

A noisy assemblage is compatible when there are PSD operators ``F_s``, one
per section, whose marginals ``sum_{s : s(pi(z)) = z} F_s`` reproduce every
effect. Feasibility is searched with Dykstra's alternating projections
between that affine marginal set and the PSD cone. With symmetry data the
search runs over symmetric points only: one commutant-valued operator per
section orbit and one marginal constraint per outcome orbit.

The oracle answers "compatible" when it finds a PSD point with marginal
residual below ``tol``, "incompatible" when the dual certificate already
bounds the robustness below ``eta``, and "inconclusive" otherwise.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .bundle import (ORBIT_SECTION_CAP, Assemblage, SymmetryData, act_on_sections, check_symmetry,
                     section_blocks, section_index)
from .errors import InfeasibleCertificate, NotSymmetric, NotUniform, TooManySections
from .groups import commutant_basis, hermitian_basis, small_generating_set
from .incompat import dual_certificate, noisy_assemblage, robustness
from .numerics import project_psd_batch

log = logging.getLogger(__name__)

ORACLE_TOL = 1e-7
ITER_BUDGET = 200_000
VARIABLE_CAP = 10**5
CHECK_EVERY = 25


@dataclass
class OracleResult:
    verdict: str            # compatible | incompatible | inconclusive
    eta: float
    residual: float
    iterations: int
    reduced: bool
    certificate_bound: float | None = None
    witness: np.ndarray | None = None   # full-size PSD point when compatible

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "eta": self.eta, "residual": self.residual,
                "iterations": self.iterations, "reduced": self.reduced,
                "certificate_bound": self.certificate_bound}


# ---------------------------------------------------------------- full size

class FullProblem:
    """Marginal map over every section, without symmetry."""

    def __init__(self, a: Assemblage, cap: int = VARIABLE_CAP):
        bundle = a.bundle
        n = bundle.section_count()
        if n > cap:
            raise TooManySections(f"{n} sections exceed the oracle cap {cap}")
        self.assemblage = a
        self.sections = next(section_blocks(bundle, block=n))
        n_out = bundle.n_outcomes
        inc = np.zeros((n_out, n))
        for x in range(bundle.n_measurements):
            inc[self.sections[:, x], np.arange(n)] = 1.0
        self.incidence = inc
        self.gram_pinv = np.linalg.pinv(inc @ inc.T)
        self.d = a.dim

    @property
    def n_variables(self) -> int:
        return self.sections.shape[0]

    def marginals(self, f: np.ndarray) -> np.ndarray:
        d = self.d
        return (self.incidence @ f.reshape(len(f), d * d)).reshape(-1, d, d)

    def project_affine(self, f: np.ndarray, target: np.ndarray) -> np.ndarray:
        d = self.d
        r = (self.marginals(f) - target).reshape(-1, d * d)
        corr = self.incidence.T @ (self.gram_pinv @ r)
        return f - corr.reshape(-1, d, d)

    def trivial_point(self, target: np.ndarray) -> np.ndarray:
        """Product weights ``prod_x Tr(A_{s(x)})/d`` times the identity."""
        tr = np.real(np.trace(target, axis1=1, axis2=2)) / self.d
        w = np.prod(tr[self.sections], axis=1)
        return w[:, None, None] * np.eye(self.d)[None]

    def expand(self, f):
        return f


# ---------------------------------------------------------------- reduced

class ReducedProblem:
    """Symmetric feasibility problem on orbit representatives.

    Variables are real coefficients of a Hermitian basis of the commutant of
    ``U(G_s)`` at each representative section ``s``. The inner product weighs
    each block by its orbit size, so projections agree with the full problem.
    """

    def __init__(self, a: Assemblage, s: SymmetryData, cap: int = VARIABLE_CAP,
                 orbit_cap: int = ORBIT_SECTION_CAP, tol: float = 1e-8):
        if not check_symmetry(a, s, tol)[0]:
            raise NotSymmetric("assemblage is not symmetric under the supplied action")
        bundle = a.bundle
        total = bundle.section_count()
        if total > orbit_cap:
            raise TooManySections(f"{total} sections exceed the orbit cap {orbit_cap}")
        g = s.group
        secs = next(section_blocks(bundle, block=total))
        image_idx = np.empty((g.order, total), dtype=np.int64)
        for gi in range(g.order):
            image_idx[gi] = section_index(bundle, act_on_sections(s, gi, secs))
        canon = image_idx.min(axis=0)
        reps = np.unique(canon)
        if len(reps) > cap:
            raise TooManySections(f"{len(reps)} section orbits exceed the oracle cap {cap}")
        self.assemblage, self.symmetry = a, s
        self.d = d = a.dim
        self.sections = secs
        self.rep_index = reps
        self.reps = [tuple(int(v) for v in secs[r]) for r in reps]
        # outcome orbit representatives and their weights |G|/|G_z|
        out_img = s.outcome_action.images
        out_canon = out_img.min(axis=0)
        self.outcome_reps = np.unique(out_canon)
        self.outcome_weights = [int(np.sum(out_canon == z)) for z in self.outcome_reps]
        self.orbit_sizes, self.stabilizers, self.bases = [], [], []
        for r in reps:
            stab = np.nonzero(image_idx[:, r] == r)[0]
            self.stabilizers.append(stab)
            self.orbit_sizes.append(int(np.sum(canon == r)))
            gens = small_generating_set(g, stab)
            self.bases.append(hermitian_basis(commutant_basis(g.elements[gens], d)))
        self.offsets = np.cumsum([0] + [len(b) for b in self.bases])
        self.weights = np.concatenate([np.full(len(b), w, float) for b, w in zip(self.bases, self.orbit_sizes)])
        # linear map: coefficients -> marginals at the outcome representatives
        cols = []
        u = g.elements
        for j, r in enumerate(reps):
            sec_imgs = image_idx[:, r]
            contains = np.zeros((g.order, len(self.outcome_reps)), dtype=bool)
            imgs = act_on_sections(s, 0, secs[sec_imgs])  # identity action: the image sections
            for i, z in enumerate(self.outcome_reps):
                contains[:, i] = np.any(imgs == z, axis=1)
            scale = 1.0 / len(self.stabilizers[j])
            for h in self.bases[j]:
                conj = np.einsum("gij,jk,glk->gil", u, h, u.conj())
                col = np.einsum("gi,gjk->ijk", contains.astype(float), conj) * scale
                cols.append(np.concatenate([col.real.ravel(), col.imag.ravel()]))
        self.lin = np.array(cols).T
        winv = 1.0 / self.weights
        self.lin_w = self.lin * winv[None, :]
        self.gram_pinv = np.linalg.pinv(self.lin_w @ self.lin.T)
        self._full_map = (image_idx, canon)

    @property
    def n_variables(self) -> int:
        return len(self.reps)

    def _target_vec(self, target):
        t = target[self.outcome_reps]
        return np.concatenate([t.real.ravel(), t.imag.ravel()])

    def blocks(self, c: np.ndarray) -> np.ndarray:
        out = np.zeros((len(self.reps), self.d, self.d), dtype=complex)
        for j, b in enumerate(self.bases):
            out[j] = np.einsum("k,kij->ij", c[self.offsets[j]:self.offsets[j + 1]], np.array(b))
        return out

    def coefficients(self, blocks: np.ndarray) -> np.ndarray:
        c = np.empty(self.offsets[-1])
        for j, b in enumerate(self.bases):
            c[self.offsets[j]:self.offsets[j + 1]] = np.real(np.einsum("kij,ij->k", np.conj(np.array(b)), blocks[j]))
        return c

    def marginal_residual(self, c: np.ndarray, target: np.ndarray) -> float:
        return float(np.max(np.abs(self.lin @ c - self._target_vec(target))))

    def project_affine(self, c: np.ndarray, target: np.ndarray) -> np.ndarray:
        r = self.lin @ c - self._target_vec(target)
        return c - self.lin_w.T @ (self.gram_pinv @ r)

    def project_psd(self, c: np.ndarray) -> np.ndarray:
        return self.coefficients(project_psd_batch(self.blocks(c)))

    def trivial_point(self, target: np.ndarray) -> np.ndarray:
        tr = np.real(np.trace(target, axis1=1, axis2=2)) / self.d
        blocks = np.array([np.prod(tr[list(s)]) * np.eye(self.d) for s in self.reps])
        return self.coefficients(blocks)

    def expand(self, c: np.ndarray) -> np.ndarray:
        """Full-size point ``F_{g(s)} = U_g F_s U_g^dagger`` from the representative blocks."""
        image_idx, canon = self._full_map
        blocks = self.blocks(c)
        u = self.symmetry.group.elements
        full = np.zeros((len(canon), self.d, self.d), dtype=complex)
        done = np.zeros(len(canon), dtype=bool)
        for j, r in enumerate(self.rep_index):
            for gi in range(len(u)):
                t = image_idx[gi, r]
                if not done[t]:
                    full[t] = u[gi] @ blocks[j] @ u[gi].conj().T
                    done[t] = True
        return full


def reduce_by_symmetry(a: Assemblage, s: SymmetryData, cap: int = VARIABLE_CAP) -> ReducedProblem:
    return ReducedProblem(a, s, cap)


def symmetrize(a: Assemblage, s: SymmetryData, f: np.ndarray) -> np.ndarray:
    """Group average ``(1/|G|) sum_g U_g F_{g^-1(s)} U_g^dagger`` of a full-size point."""
    bundle = a.bundle
    secs = next(section_blocks(bundle, block=bundle.section_count()))
    g = s.group
    out = np.zeros_like(f)
    for gi in range(g.order):
        src = section_index(bundle, act_on_sections(s, int(g.inv[gi]), secs))
        u = g.elements[gi]
        out += np.einsum("ij,njk,lk->nil", u, f[src], u.conj())
    return out / g.order


# ---------------------------------------------------------------- solver

def _dykstra_full(prob: FullProblem, target, budget, tol):
    x = prob.project_affine(prob.trivial_point(target), target)
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    res = np.inf
    for it in range(1, budget + 1):
        y = project_psd_batch(x + p)
        p = x + p - y
        x_new = prob.project_affine(y + q, target)
        q = y + q - x_new
        x = x_new
        if it % CHECK_EVERY == 0 or it == 1:
            res = float(np.max(np.abs(prob.marginals(y) - target)))
            if res < tol:
                return y, res, it
    return None, res, budget


def _dykstra_reduced(prob: ReducedProblem, target, budget, tol):
    x = prob.project_affine(prob.trivial_point(target), target)
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    res = np.inf
    for it in range(1, budget + 1):
        y = prob.project_psd(x + p)
        p = x + p - y
        x_new = prob.project_affine(y + q, target)
        q = y + q - x_new
        x = x_new
        if it % CHECK_EVERY == 0 or it == 1:
            res = prob.marginal_residual(y, target)
            if res < tol:
                return y, res, it
    return None, res, budget


def compatibility_oracle(a: Assemblage, eta: float, kind: str = "white", sym: SymmetryData | None = None,
                         iter_budget: int = ITER_BUDGET, tol: float = ORACLE_TOL,
                         use_certificate: bool = True, problem=None) -> OracleResult:
    target = noisy_assemblage(a, eta, kind).effects
    bound = None
    if use_certificate:
        try:
            rep = robustness(a, sym)
            if rep.alpha_bound == "exact" and rep.formula_certified is not False:
                cert = dual_certificate(a, rep, kind)
                bound = cert.upper_bound
        except (NotUniform, InfeasibleCertificate, TooManySections) as exc:
            log.debug("no certificate: %s", exc)
        if bound is not None and eta > bound + 1e-9:
            return OracleResult("incompatible", eta, float("nan"), 0, sym is not None, bound)
    if problem is None:
        problem = ReducedProblem(a, sym) if sym is not None else FullProblem(a)
    if isinstance(problem, ReducedProblem):
        point, res, its = _dykstra_reduced(problem, target, iter_budget, tol)
    else:
        point, res, its = _dykstra_full(problem, target, iter_budget, tol)
    if point is not None:
        return OracleResult("compatible", eta, res, its, isinstance(problem, ReducedProblem), bound,
                            problem.expand(point))
    return OracleResult("inconclusive", eta, res, its, isinstance(problem, ReducedProblem), bound)
