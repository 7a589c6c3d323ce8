"""Building uniform, rigidly symmetric assemblages from a group.

The pipeline follows five steps: enumerate subgroup classes, keep those
whose restricted representation has a two-dimensional commutant, take the
two complementary projections spanning that commutant, generate their orbits
under conjugation, and group each orbit into measurements whose fibres are
permuted by the group.

The platonic qubit assemblages are also available directly from vertex
coordinates (:func:`platonic_assemblage`).
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .bundle import (Assemblage, OutcomeBundle, SymmetryData, check_covariance, check_normalization,
                     check_symmetry, is_rigid, is_uniform, symmetry_by_conjugation)
from .errors import NoPartition, ProjectivePhases
from .groups import (FiniteMatrixGroup, PermAction, SubgroupClass, close_generators,
                     commutant_basis, count_irreducible_subreps, element_key,
                     enumerate_subgroup_classes, orbits, small_generating_set)
from .numerics import is_projection

log = logging.getLogger(__name__)

ORBIT_TOL = 1e-8


@dataclass
class GeneratingProjection:
    projection: np.ndarray
    stabilizer: np.ndarray
    source: SubgroupClass | None
    orbit_size: int

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.projection).real))


@dataclass
class ConstructedAssemblage:
    assemblage: Assemblage
    symmetry: SymmetryData
    generator: GeneratingProjection
    mode: str

    @property
    def n_measurements(self) -> int:
        return self.assemblage.n_measurements

    @property
    def stabilizer_order(self) -> int:
        return len(self.generator.stabilizer)


@dataclass
class ConstructionResult:
    assemblages: list[ConstructedAssemblage] = field(default_factory=list)
    rejected: list[tuple[str, dict]] = field(default_factory=list)


# ------------------------------------------------------------------ step 2

def candidate_stabilizers(group: FiniteMatrixGroup, classes=None) -> list[SubgroupClass]:
    """Subgroup classes whose restricted representation has exactly two irreducible parts."""
    if classes is None:
        classes = enumerate_subgroup_classes(group)
    out = []
    for c in classes:
        try:
            norm = count_irreducible_subreps(group, c.indices)
        except ProjectivePhases:
            norm = None
        if norm is not None and norm != 2:
            continue
        gens = small_generating_set(group, c.indices)
        if len(commutant_basis(group.elements[gens], group.dim)) == 2:
            out.append(c)
    return out


# ------------------------------------------------------------------ step 3

def isotypic_projections(group: FiniteMatrixGroup, sub) -> tuple[np.ndarray, np.ndarray]:
    """The two complementary projections spanning the commutant of ``U(sub)``."""
    gens = small_generating_set(group, sub)
    basis = commutant_basis(group.elements[gens], group.dim)
    if len(basis) != 2:
        raise ValueError(f"commutant has dimension {len(basis)}, expected 2")
    from .bundle import _spanning_projection
    p = _spanning_projection(basis)
    if p is None:
        raise ValueError("commutant is not spanned by a projection and its complement")
    q = np.eye(group.dim) - p
    # deterministic order: smaller rank first, then by key
    pair = sorted([p, q], key=lambda m: (round(np.trace(m).real), element_key(m)))
    return pair[0], pair[1]


def orbit_of_projection(group: FiniteMatrixGroup, p: np.ndarray,
                        tol: float = ORBIT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Distinct conjugates ``U_g P U_g^dagger`` (first-seen order) and the stabiliser of ``P``."""
    e = group.elements
    conj = np.einsum("gij,jk,glk->gil", e, p, e.conj())
    orbit, keys = [], {}
    for m in conj:
        k = element_key(m)
        if k in keys:
            continue
        if any(np.max(np.abs(o - m)) <= tol for o in orbit[-4:]):
            continue
        keys[k] = len(orbit)
        orbit.append(m)
    orbit = np.array(orbit)
    stab = np.nonzero(np.max(np.abs(conj - p), axis=(1, 2)) <= tol)[0]
    if len(orbit) * len(stab) != group.order:
        raise ValueError("orbit-stabiliser count failed; tolerance problem")
    return orbit, stab


# ------------------------------------------------------------------ step 4

def _proportional_to_identity(m: np.ndarray, tol: float = 1e-8) -> float | None:
    d = m.shape[0]
    c = np.trace(m).real / d
    return c if np.max(np.abs(m - c * np.eye(d))) <= tol else None


def _mutually_orthogonal(orbit, idx, tol=1e-8) -> bool:
    for a, b in itertools.combinations(idx, 2):
        if np.max(np.abs(orbit[a] @ orbit[b])) > tol:
            return False
    return True


def _fibre_size(orbit: np.ndarray, mode: str, n: int | None) -> int:
    d = orbit.shape[1]
    rank = int(round(np.trace(orbit[0]).real))
    if mode == "projective":
        if d % rank:
            raise NoPartition(f"rank-{rank} projections cannot sum to identity in dimension {d}")
        return d // rank
    if mode == "povm":
        if not n or n < 2:
            raise ValueError("povm mode needs n >= 2 outcomes")
        return n
    raise ValueError(f"unknown mode {mode!r}")


def _exact_cover(orbit: np.ndarray, size: int, mode: str, budget: int = 200000):
    """First exact cover (canonical order) of the orbit by valid fibres."""
    m = len(orbit)
    if m % size:
        raise NoPartition("orbit size is not a multiple of the fibre size")
    covered = np.zeros(m, dtype=bool)
    fibres: list[tuple[int, ...]] = []
    steps = [0]

    def valid(idx):
        if mode == "projective" and not _mutually_orthogonal(orbit, idx):
            return False
        return _proportional_to_identity(orbit[list(idx)].sum(axis=0)) is not None

    def rec():
        steps[0] += 1
        if steps[0] > budget:
            raise NoPartition("exact cover search exceeded its budget")
        free = np.nonzero(~covered)[0]
        if free.size == 0:
            return True
        z = int(free[0])
        rest = free[1:]
        if mode == "projective":
            rest = [w for w in rest if np.max(np.abs(orbit[z] @ orbit[w])) <= 1e-8]
        for combo in itertools.combinations(rest, size - 1):
            idx = (z, *map(int, combo))
            if not valid(idx):
                continue
            covered[list(idx)] = True
            fibres.append(idx)
            if rec():
                return True
            fibres.pop()
            covered[list(idx)] = False
        return False

    if not rec():
        raise NoPartition("no exact cover of the orbit exists")
    return fibres


def _covariant_fibre_systems(group, orbit, act: PermAction, size: int, mode: str,
                             max_systems: int = 16):
    """All fibre systems permuted by the group, found from the fibre through outcome 0.

    That fibre must be a union of orbits of the stabiliser of outcome 0, and
    its images under the group must partition the orbit.
    """
    m = len(orbit)
    if m % size:
        return []
    stab0 = np.nonzero(act.images[:, 0] == 0)[0]
    sub_orbits = [o for o in orbits(act, stab0) if o != [0]]
    if mode == "projective":
        sub_orbits = [o for o in sub_orbits
                      if all(np.max(np.abs(orbit[0] @ orbit[w])) <= 1e-8 for w in o)]
    systems = []
    seen = set()

    def rec(start, chosen, count):
        if len(systems) >= max_systems:
            return
        if count == size - 1:
            fib = tuple(sorted([0] + [w for o in chosen for w in o]))
            if mode == "projective" and not _mutually_orthogonal(orbit, fib):
                return
            if _proportional_to_identity(orbit[list(fib)].sum(axis=0)) is None:
                return
            images = {tuple(sorted(act.images[g, list(fib)].tolist())) for g in range(group.order)}
            flat = [z for f in images for z in f]
            if len(flat) != m or len(set(flat)) != m:
                return
            key = frozenset(images)
            if key not in seen:
                seen.add(key)
                systems.append(sorted(images))
            return
        for i in range(start, len(sub_orbits)):
            o = sub_orbits[i]
            if count + len(o) <= size - 1:
                rec(i + 1, chosen + [o], count + len(o))

    rec(0, [], 0)
    return systems


def group_into_measurements(orbit: np.ndarray, mode: str = "projective", n: int | None = None,
                            group: FiniteMatrixGroup | None = None):
    """Partition an orbit of projections into measurements.

    Without ``group`` the first exact cover in canonical order is returned.
    With ``group`` only fibre systems permuted by the group are considered;
    the result is then a list of candidate groupings.
    Returns ``(bundle, effects)`` or a list of them (group-aware mode).
    """
    orbit = np.asarray(orbit, dtype=complex)
    size = _fibre_size(orbit, mode, n)
    if group is None:
        fibres = _exact_cover(orbit, size, mode)
        return _package(orbit, fibres)
    act = _conjugation_action_on_orbit(group, orbit)
    systems = _covariant_fibre_systems(group, orbit, act, size, mode)
    if not systems:
        raise NoPartition("no covariant grouping of the orbit")
    return [_package(orbit, fibres) for fibres in systems]


def _package(orbit, fibres):
    order = [z for f in fibres for z in f]
    bundle = OutcomeBundle.from_fibre_sizes([len(f) for f in fibres])
    effects = []
    for f in fibres:
        c = _proportional_to_identity(orbit[list(f)].sum(axis=0))
        effects.extend(orbit[z] / c for z in f)
    return bundle, np.array(effects), order


def _conjugation_action_on_orbit(group, orbit):
    from .groups import action_by_conjugation
    return action_by_conjugation(group, orbit)


def verify_covariance_of_grouping(bundle: OutcomeBundle, effects: np.ndarray,
                                  group: FiniteMatrixGroup) -> tuple[bool, SymmetryData | None]:
    """Step 5: does conjugation permute the fibres? Packages the symmetry data if so."""
    from .groups import action_by_conjugation
    act = action_by_conjugation(group, effects)
    ok, meas = check_covariance(bundle, act)
    if not ok:
        return False, None
    return True, SymmetryData(group, act, meas)


# --------------------------------------------------------------- pipeline

def construct_assemblages(group: FiniteMatrixGroup, mode: str = "projective", n: int | None = None,
                          classes=None) -> ConstructionResult:
    """Run the whole construction for one group; results sorted by ``|M|``."""
    result = ConstructionResult()
    cands = candidate_stabilizers(group, classes)
    orbit_keys = set()
    gens: list[GeneratingProjection] = []
    for c in cands:
        for p in isotypic_projections(group, c.indices):
            orbit, stab = orbit_of_projection(group, p)
            key = frozenset(element_key(o) for o in orbit)
            if key in orbit_keys:
                continue
            orbit_keys.add(key)
            gens.append(GeneratingProjection(p, stab, c, len(orbit)))
    label = f"povm({n})" if mode == "povm" else mode
    for gp in gens:
        orbit, _ = orbit_of_projection(group, gp.projection)
        info = {"orbit_size": len(orbit), "stabilizer_order": len(gp.stabilizer), "rank": gp.rank}
        try:
            groupings = group_into_measurements(orbit, mode, n, group=group)
        except NoPartition as exc:
            result.rejected.append(("no-partition", {**info, "detail": str(exc)}))
            continue
        for bundle, effects, _ in groupings:
            a = Assemblage(bundle, effects, name=f"{group.name} {label} |M|={bundle.n_measurements}".strip())
            ok, sym = verify_covariance_of_grouping(bundle, effects, group)
            if not ok:
                result.rejected.append(("not-covariant", info))
                continue
            reason = _validate(a, sym)
            if reason:
                result.rejected.append((reason, info))
                continue
            result.assemblages.append(ConstructedAssemblage(a, sym, gp, label))
    result.assemblages.sort(key=lambda r: (r.n_measurements, r.stabilizer_order, r.generator.rank))
    return result


def _validate(a: Assemblage, sym: SymmetryData) -> str | None:
    if not check_normalization(a)[0]:
        return "not-normalised"
    if a.min_effect_eigenvalue() < -1e-9:
        return "not-psd"
    if not check_symmetry(a, sym)[0]:
        return "not-symmetric"
    if not is_uniform(sym):
        return "not-uniform"
    if not is_rigid(a, sym).rigid:
        return "not-rigid"
    return None


# --------------------------------------------------------------- platonic

PHI = (1 + 5**0.5) / 2
SIGMA = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)

SOLIDS = ("octahedron", "cube", "icosahedron", "dodecahedron", "cuboctahedron", "icosidodecahedron")


def _cyclic(v):
    return [v, (v[1], v[2], v[0]), (v[2], v[0], v[1])]


def _signs(v):
    opts = [(c,) if c == 0 else (c, -c) for c in v]
    return list(itertools.product(*opts))


def platonic_vertices(solid: str) -> np.ndarray:
    pts = set()
    if solid == "octahedron":
        base = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
        raw = [s for b in base for s in _signs(b)]
    elif solid == "cube":
        raw = _signs((1, 1, 1))
    elif solid == "icosahedron":
        raw = [s for c in _cyclic((0, 1, PHI)) for s in _signs(c)]
    elif solid == "dodecahedron":
        raw = _signs((1, 1, 1)) + [s for c in _cyclic((0, PHI, 1 / PHI)) for s in _signs(c)]
    elif solid == "cuboctahedron":
        raw = [s for c in set(itertools.permutations((1, 1, 0))) for s in _signs(c)]
    elif solid == "icosidodecahedron":
        raw = [s for c in _cyclic((0, 0, PHI)) for s in _signs(c)]
        raw += [s for c in _cyclic((0.5, PHI**2 / 2, PHI / 2)) for s in _signs(c)]
    else:
        raise ValueError(f"unknown solid {solid!r}; choose from {SOLIDS}")
    for v in raw:
        v = np.asarray(v, float)
        pts.add(tuple(np.round(v / np.linalg.norm(v), 12)))
    return np.array(sorted(pts))


def platonic_axes(solid: str) -> np.ndarray:
    """One unit vector per antipodal vertex pair, first nonzero coordinate positive."""
    axes = []
    for v in platonic_vertices(solid):
        nz = v[np.nonzero(np.abs(v) > 1e-9)[0][0]]
        if nz > 0:
            axes.append(v)
    return np.array(sorted(map(tuple, axes), reverse=True))


def spin_projector(n) -> np.ndarray:
    n = np.asarray(n, float)
    return 0.5 * (np.eye(2) + np.einsum("k,kij->ij", n, SIGMA))


def platonic_assemblage(solid: str) -> Assemblage:
    """Antipodal vertex pairs as qubit measurements with effects ``(1 +- n.sigma)/2``."""
    meas = [[spin_projector(n), spin_projector(-n)] for n in platonic_axes(solid)]
    return Assemblage.from_measurements(meas, name=solid)


def _su2(axis, angle):
    n = np.asarray(axis, float)
    n = n / np.linalg.norm(n)
    return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * np.einsum("k,kij->ij", n, SIGMA)


def platonic_group(solid: str, projective: bool = False) -> FiniteMatrixGroup:
    """Binary polyhedral group (or, projectively, the rotation group) of a solid."""
    if solid in ("octahedron", "cube", "cuboctahedron"):
        gens = [_su2([0, 0, 1], np.pi / 2), _su2([1, 1, 1], 2 * np.pi / 3)]
        name = "rotations of the octahedron" if projective else "binary octahedral"
    elif solid in ("icosahedron", "dodecahedron", "icosidodecahedron"):
        gens = [_su2([0, 1, PHI], 2 * np.pi / 5), _su2([1, 1, 1], 2 * np.pi / 3)]
        name = "rotations of the icosahedron" if projective else "binary icosahedral"
    else:
        raise ValueError(f"unknown solid {solid!r}")
    return close_generators(gens, projective=projective, name=name)


def platonic_symmetry(solid: str, projective: bool = False) -> tuple[Assemblage, SymmetryData]:
    a = platonic_assemblage(solid)
    return a, symmetry_by_conjugation(a, platonic_group(solid, projective))


def check_projection_orbit(orbit) -> bool:
    return all(is_projection(p)[0] for p in orbit)
