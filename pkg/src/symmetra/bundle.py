"""Outcome bundles, sections, assemblages and their symmetry checks.

A bundle is the disjoint union of all measurement outcomes together with the
map sending each outcome to its measurement. A section picks one outcome per
measurement and is stored as a tuple (or an integer row) of outcome indices,
ordered by measurement.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import TooManySections
from .groups import (FiniteMatrixGroup, PermAction, action_by_conjugation, commutant_basis,
                     hermitian_basis, orbits, small_generating_set, stabilizer)
from .numerics import as_cmat

SECTION_CAP = 10**8
ORBIT_SECTION_CAP = 10**7

Section = tuple


@dataclass(frozen=True)
class OutcomeBundle:
    projection: tuple[int, ...]

    def __post_init__(self):
        proj = self.projection
        if not proj:
            raise ValueError("bundle needs at least one outcome")
        m = max(proj) + 1
        if sorted(set(proj)) != list(range(m)):
            raise ValueError("every measurement needs a nonempty fibre")

    @classmethod
    def from_fibre_sizes(cls, sizes) -> "OutcomeBundle":
        return cls(tuple(x for x, k in enumerate(sizes) for _ in range(k)))

    @property
    def n_outcomes(self) -> int:
        return len(self.projection)

    @property
    def n_measurements(self) -> int:
        return max(self.projection) + 1

    @cached_property
    def fibres(self) -> tuple[tuple[int, ...], ...]:
        out = [[] for _ in range(self.n_measurements)]
        for z, x in enumerate(self.projection):
            out[x].append(z)
        return tuple(tuple(f) for f in out)

    @cached_property
    def fibre_sizes(self) -> tuple[int, ...]:
        return tuple(len(f) for f in self.fibres)

    @cached_property
    def position(self) -> np.ndarray:
        """Position of each outcome inside its fibre."""
        pos = np.empty(self.n_outcomes, dtype=np.int64)
        for f in self.fibres:
            pos[list(f)] = np.arange(len(f))
        return pos

    @cached_property
    def proj_array(self) -> np.ndarray:
        return np.asarray(self.projection, dtype=np.int64)

    def section_count(self) -> int:
        return math.prod(self.fibre_sizes)

    def is_section(self, sec) -> bool:
        return len(sec) == self.n_measurements and all(
            self.projection[z] == x for x, z in enumerate(sec))


@dataclass(eq=False)
class Assemblage:
    bundle: OutcomeBundle
    effects: np.ndarray  # (n_outcomes, d, d)
    name: str = ""

    def __post_init__(self):
        self.effects = np.asarray(self.effects, dtype=complex)
        if self.effects.ndim != 3 or self.effects.shape[0] != self.bundle.n_outcomes:
            raise ValueError("one square effect matrix per outcome is required")
        if self.effects.shape[1] != self.effects.shape[2]:
            raise ValueError("effects must be square")

    @classmethod
    def from_measurements(cls, measurements, name: str = "") -> "Assemblage":
        sizes = [len(m) for m in measurements]
        effects = np.array([as_cmat(e) for m in measurements for e in m])
        return cls(OutcomeBundle.from_fibre_sizes(sizes), effects, name)

    @property
    def dim(self) -> int:
        return self.effects.shape[1]

    @property
    def n_outcomes(self) -> int:
        return self.bundle.n_outcomes

    @property
    def n_measurements(self) -> int:
        return self.bundle.n_measurements

    def measurements(self) -> list[list[np.ndarray]]:
        return [[self.effects[z] for z in f] for f in self.bundle.fibres]

    def traces(self) -> np.ndarray:
        return np.real(np.trace(self.effects, axis1=1, axis2=2))

    def min_effect_eigenvalue(self) -> float:
        h = 0.5 * (self.effects + np.conj(np.swapaxes(self.effects, 1, 2)))
        return float(np.min(np.linalg.eigvalsh(h)))

    def is_rank_one_projective(self, tol: float = 1e-9) -> bool:
        e = self.effects
        idem = np.max(np.abs(np.einsum("nij,njk->nik", e, e) - e)) <= tol
        return bool(idem and np.allclose(self.traces(), 1.0, atol=tol))

    def section_sum(self, sec) -> np.ndarray:
        return self.effects[list(sec)].sum(axis=0)

    def conjugated(self, u: np.ndarray) -> "Assemblage":
        e = np.einsum("ij,njk,lk->nil", u, self.effects, u.conj())
        return Assemblage(self.bundle, e, self.name)

    def relabeled(self, measurement_perm, outcome_perms=None) -> "Assemblage":
        """Reorder measurements (and optionally outcomes inside each fibre)."""
        meas = self.measurements()
        out = []
        for k, x in enumerate(measurement_perm):
            fib = meas[x]
            if outcome_perms is not None:
                fib = [fib[i] for i in outcome_perms[k]]
            out.append(fib)
        return Assemblage.from_measurements(out, self.name)


@dataclass(eq=False)
class SymmetryData:
    group: FiniteMatrixGroup
    outcome_action: PermAction
    measurement_action: PermAction | None = None
    extra: dict = field(default_factory=dict)


def check_normalization(a: Assemblage, tol: float = 1e-9) -> tuple[bool, float]:
    ident = np.eye(a.dim)
    residual = 0.0
    for f in a.bundle.fibres:
        residual = max(residual, float(np.max(np.abs(a.effects[list(f)].sum(axis=0) - ident))))
    return residual <= tol, residual


def check_covariance(bundle: OutcomeBundle, act: PermAction) -> tuple[bool, PermAction | None]:
    """Do all group elements map fibres onto fibres? Returns the induced action on measurements."""
    proj = bundle.proj_array
    meas_img = proj[act.images]  # (|G|, n_outcomes)
    m = bundle.n_measurements
    induced = np.empty((act.images.shape[0], m), dtype=np.int64)
    for x, f in enumerate(bundle.fibres):
        block = meas_img[:, list(f)]
        if not np.all(block == block[:, :1]):
            return False, None
        induced[:, x] = block[:, 0]
    if not np.all(np.sort(induced, axis=1) == np.arange(m)):
        return False, None
    return True, PermAction(act.group, induced)


def check_symmetry(a: Assemblage, s: SymmetryData, tol: float = 1e-9) -> tuple[bool, float]:
    """Check ``A_z == U_g A_{g^-1(z)} U_g^dagger`` for every ``g`` and ``z``."""
    g = s.group
    inv_img = s.outcome_action.images[g.inv]  # g^-1(z)
    residual = 0.0
    for gi in range(g.order):
        u = g.elements[gi]
        moved = np.einsum("ij,njk,lk->nil", u, a.effects[inv_img[gi]], u.conj())
        residual = max(residual, float(np.max(np.abs(moved - a.effects))))
    return residual <= tol, residual


def symmetry_by_conjugation(a: Assemblage, group: FiniteMatrixGroup, tol: float = 1e-8) -> SymmetryData:
    """Symmetry data whose outcome action is read off from conjugating the effects."""
    act = action_by_conjugation(group, a.effects, tol=tol)
    ok, meas = check_covariance(a.bundle, act)
    if not ok:
        raise ValueError("conjugation action does not respect the bundle")
    return SymmetryData(group, act, meas)


def symmetry_from_permutations(a: Assemblage, group: FiniteMatrixGroup, outcome_permutations) -> SymmetryData:
    act = PermAction(group, np.asarray(outcome_permutations, dtype=np.int64))
    act.validate()
    ok, meas = check_covariance(a.bundle, act)
    if not ok:
        raise ValueError("outcome permutations do not respect the bundle")
    return SymmetryData(group, act, meas)


def is_uniform(s: SymmetryData) -> bool:
    return len(orbits(s.outcome_action)) == 1


@dataclass(frozen=True)
class RigidityReport:
    rigid: bool
    representatives: tuple[int, ...]
    commutant_dims: tuple[int, ...]
    ranks: tuple[int | None, ...]

    @property
    def rank_one(self) -> bool:
        return self.rigid and all(r == 1 for r in self.ranks)


def _spanning_projection(basis: list[np.ndarray], tol: float = 1e-8):
    """For a 2-dim commutant: the projection ``P`` with span{P, 1-P} equal to it, or None."""
    d = basis[0].shape[0]
    ident = np.eye(d)
    herm = hermitian_basis(basis)
    for h in herm:
        t = h - np.trace(h).real / d * ident
        if np.max(np.abs(t)) > tol:
            break
    else:
        return None
    w, v = np.linalg.eigh(t)
    # two distinct eigenvalues are needed for a projection + complement
    groups = [[0]]
    for i in range(1, d):
        if w[i] - w[groups[-1][-1]] > 1e-6:
            groups.append([i])
        else:
            groups[-1].append(i)
    if len(groups) != 2:
        return None
    vecs = v[:, groups[1]]
    p = vecs @ vecs.conj().T
    # both P and 1 - P must lie in the span of the commutant basis
    mats = np.array([b.ravel() for b in basis]).T
    for cand in (p, ident - p):
        coef, *_ = np.linalg.lstsq(mats, cand.ravel(), rcond=None)
        if np.max(np.abs(mats @ coef - cand.ravel())) > 1e-7:
            return None
    return p


def stabilizer_commutant(group: FiniteMatrixGroup, stab) -> list[np.ndarray]:
    gens = small_generating_set(group, stab)
    return commutant_basis(group.elements[gens], group.dim)


def is_rigid(a: Assemblage, s: SymmetryData) -> RigidityReport:
    """Rigidity test at one outcome per orbit, via the stabiliser's commutant."""
    reps, dims, ranks = [], [], []
    rigid = True
    for orb in orbits(s.outcome_action):
        z = orb[0]
        basis = stabilizer_commutant(s.group, stabilizer(s.outcome_action, z))
        reps.append(z)
        dims.append(len(basis))
        rank = None
        if len(basis) == 2:
            p = _spanning_projection(basis)
            if p is None:
                rigid = False
            else:
                r = int(round(np.trace(p).real))
                # report the rank of whichever of P, 1-P the effect is closest to
                eff = a.effects[z] if a is not None else p
                alt = np.eye(a.dim if a is not None else p.shape[0]) - p
                if np.linalg.norm(eff - alt) < np.linalg.norm(eff - p):
                    r = p.shape[0] - r
                rank = r
        else:
            rigid = False
        ranks.append(rank)
    return RigidityReport(rigid, tuple(reps), tuple(dims), tuple(ranks))


# ----------------------------------------------------------------- sections

def enumerate_sections(bundle: OutcomeBundle, cap: int = SECTION_CAP):
    """Lexicographic stream of sections (tuples of outcome indices)."""
    if bundle.section_count() > cap:
        raise TooManySections(f"{bundle.section_count()} sections exceed cap {cap}")
    return itertools.product(*bundle.fibres)


def section_blocks(bundle: OutcomeBundle, block: int = 65536, cap: int = SECTION_CAP,
                   start: int = 0, stop: int | None = None):
    """Sections in lexicographic order as ``(n, |M|)`` integer blocks.

    ``start``/``stop`` select a contiguous index range so that scans can be
    split into independent chunks.
    """
    total = bundle.section_count()
    if total > cap:
        raise TooManySections(f"{total} sections exceed cap {cap}")
    stop = total if stop is None else min(stop, total)
    fib = [np.asarray(f, dtype=np.int64) for f in bundle.fibres]
    sizes = np.asarray(bundle.fibre_sizes, dtype=np.int64)
    strides = np.ones(len(sizes), dtype=np.int64)
    for x in range(len(sizes) - 2, -1, -1):
        strides[x] = strides[x + 1] * sizes[x + 1]
    for lo in range(start, stop, block):
        idx = np.arange(lo, min(lo + block, stop), dtype=np.int64)
        digits = (idx[:, None] // strides[None, :]) % sizes[None, :]
        yield np.stack([fib[x][digits[:, x]] for x in range(len(sizes))], axis=1)


def section_index(bundle: OutcomeBundle, sections: np.ndarray) -> np.ndarray:
    sizes = np.asarray(bundle.fibre_sizes, dtype=np.int64)
    strides = np.ones(len(sizes), dtype=np.int64)
    for x in range(len(sizes) - 2, -1, -1):
        strides[x] = strides[x + 1] * sizes[x + 1]
    return bundle.position[np.asarray(sections)] @ strides


def section_action(s: SymmetryData, g: int, sec) -> tuple[int, ...]:
    """``[g(s)](x) = g(s[g^-1(x)])``."""
    ginv = s.group.inv[g]
    m_img = s.measurement_action.images
    out_img = s.outcome_action.images
    return tuple(int(out_img[g, sec[m_img[ginv, x]]]) for x in range(len(sec)))


def act_on_sections(s: SymmetryData, g: int, sections: np.ndarray) -> np.ndarray:
    """Vectorised :func:`section_action` over an ``(n, |M|)`` block."""
    ginv = s.group.inv[g]
    src = s.measurement_action.images[ginv]
    return s.outcome_action.images[g][sections[:, src]]


def orbit_representatives(s: SymmetryData, bundle: OutcomeBundle, what: str = "outcomes",
                          cap: int = ORBIT_SECTION_CAP):
    """Lexicographically least representative per orbit and the orbit sizes.

    For ``what="sections"`` representatives are returned as tuples of outcomes.
    """
    if what == "outcomes":
        orbs = orbits(s.outcome_action)
        return [o[0] for o in orbs], [len(o) for o in orbs]
    if what != "sections":
        raise ValueError("what must be 'outcomes' or 'sections'")
    total = bundle.section_count()
    if total > cap:
        raise TooManySections(f"{total} sections exceed orbit cap {cap}")
    secs = next(section_blocks(bundle, block=total))
    canon = np.arange(total, dtype=np.int64)
    for g in range(s.group.order):
        canon = np.minimum(canon, section_index(bundle, act_on_sections(s, g, secs)))
    reps, sizes = np.unique(canon, return_counts=True)
    return [tuple(int(v) for v in secs[r]) for r in reps], sizes.tolist()
