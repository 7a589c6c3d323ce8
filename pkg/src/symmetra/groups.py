"""Finite matrix groups built by closing a set of unitary generators.

Elements are stored as a ``(n, d, d)`` complex stack together with a full
multiplication table, so all later group computations (subgroups, orbits,
stabilisers, conjugacy) are done on integer indices.

With ``projective=True`` matrices differing by a global phase are identified.
This is how projective representations (rotation groups acting on a qubit,
Clifford-type groups) are handled: the index-level group is then the
collineation group, and character theory is refused on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import NotUnitary, OrderExceeded, ProjectivePhases, TooLarge
from .numerics import as_cmat, is_unitary

KEY_SCALE = 1e8
MATCH_TOL = 1e-6
SUBGROUP_ORDER_CAP = 5000
MULT_TABLE_CAP = 20000


def _normalize_phase(stack: np.ndarray) -> np.ndarray:
    """Rotate each matrix so that its first non-negligible entry is real positive."""
    flat = stack.reshape(stack.shape[0], -1)
    first = np.argmax(np.abs(flat) > 1e-4, axis=1)
    lead = flat[np.arange(flat.shape[0]), first]
    return stack * (np.conj(lead) / np.abs(lead))[:, None, None]


def element_key(m: np.ndarray) -> bytes:
    """Quantized lookup key: real and imaginary parts rounded to 1e-8."""
    parts = np.concatenate([m.real.ravel(), m.imag.ravel()])
    q = np.round(parts * KEY_SCALE).astype(np.int64)
    q[q == 0] = 0
    return q.tobytes()


class _Index:
    """Fingerprint index over a fixed element stack with exact confirmation."""

    def __init__(self, elements: np.ndarray, projective: bool):
        self.elements = elements
        self.projective = projective
        rng = np.random.default_rng(12345)
        d = elements.shape[1]
        self.weights = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        fp = self._fingerprint(elements)
        self.order = np.argsort(fp, kind="stable")
        self.sorted_fp = fp[self.order]
        self.keys = {element_key(m): i for i, m in enumerate(elements)}

    def _fingerprint(self, stack):
        return np.einsum("nij,ij->n", stack, self.weights).real

    def lookup(self, stack: np.ndarray) -> np.ndarray:
        """Indices of ``stack`` members (``-1`` where absent)."""
        if self.projective:
            stack = _normalize_phase(stack)
        fp = self._fingerprint(stack)
        pos = np.searchsorted(self.sorted_fp, fp)
        n = len(self.sorted_fp)
        best = np.full(len(fp), -1, dtype=np.int64)
        best_err = np.full(len(fp), np.inf)
        for shift in (-1, 0):
            cand_pos = np.clip(pos + shift, 0, n - 1)
            cand = self.order[cand_pos]
            err = np.max(np.abs(self.elements[cand] - stack), axis=(1, 2))
            better = err < best_err
            best[better] = cand[better]
            best_err[better] = err[better]
        miss = best_err > MATCH_TOL
        for i in np.nonzero(miss)[0]:
            best[i] = self._slow(stack[i])
        return best

    def _slow(self, m):
        k = self.keys.get(element_key(m))
        if k is not None:
            return k
        err = np.max(np.abs(self.elements - m), axis=(1, 2))
        j = int(np.argmin(err))
        return j if err[j] <= MATCH_TOL else -1


@dataclass(eq=False)
class FiniteMatrixGroup:
    elements: np.ndarray
    inv: np.ndarray
    identity: int
    generators: tuple[int, ...]
    projective: bool = False
    name: str = ""
    _index: _Index = field(repr=False, default=None)
    _mult: np.ndarray | None = field(repr=False, default=None)

    @property
    def order(self) -> int:
        return self.elements.shape[0]

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    @cached_property
    def keys(self) -> list[bytes]:
        return [element_key(m) for m in self.elements]

    @property
    def has_table(self) -> bool:
        return self.order <= MULT_TABLE_CAP

    @property
    def mult(self) -> np.ndarray:
        """Multiplication table ``mult[g, h] = index of U_g U_h``, built on first use."""
        if self._mult is None:
            n = self.order
            if n > MULT_TABLE_CAP:
                raise TooLarge(f"multiplication table for order {n}")
            mult = np.empty((n, n), dtype=np.int32)
            for i in range(n):
                row = self.lookup(np.einsum("ij,njk->nik", self.elements[i], self.elements))
                if np.any(row < 0):
                    raise OrderExceeded("products left the element set; tolerance too tight?")
                mult[i] = row
            self._mult = mult
        return self._mult

    def products(self, a, b) -> np.ndarray:
        """Indices of ``U_a U_b`` for broadcastable index arrays ``a`` and ``b``."""
        a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
        if self.has_table:
            return self.mult[a, b]
        flat = self.lookup(np.einsum("nij,njk->nik", self.elements[a.ravel()], self.elements[b.ravel()]))
        if np.any(flat < 0):
            raise OrderExceeded("products left the element set; tolerance too tight?")
        return flat.reshape(a.shape)

    def index_of(self, m) -> int:
        """Index of matrix ``m`` in the group, or ``-1``."""
        return int(self._index.lookup(np.asarray(m, dtype=complex)[None])[0])

    def lookup(self, stack: np.ndarray) -> np.ndarray:
        return self._index.lookup(stack)

    @cached_property
    def conj_table(self) -> np.ndarray:
        """``conj_table[x, g]`` is the index of ``x g x^-1``."""
        if self.order > 20000:
            raise TooLarge(f"conjugation table for order {self.order}")
        return self.mult[self.mult, self.inv[:, None]]

    @cached_property
    def element_orders(self) -> np.ndarray:
        orders = np.ones(self.order, dtype=np.int64)
        power = np.arange(self.order)
        active = power != self.identity
        k = 1
        while active.any():
            k += 1
            power = power.copy()
            power[active] = self.products(power[active], np.nonzero(active)[0])
            done = active & (power == self.identity)
            orders[done] = k
            active &= ~done
        return orders

    def power(self, g: int, k: int) -> int:
        out = self.identity
        for _ in range(k):
            out = int(self.products(out, g))
        return out

    def subgroup(self, gens) -> np.ndarray:
        """Sorted indices of the subgroup generated by the index set ``gens``."""
        if self.has_table:
            return close_subgroup(self.mult, self.identity, gens)
        gens = np.unique(np.asarray(list(gens), dtype=np.int64))
        mask = np.zeros(self.order, dtype=bool)
        mask[self.identity] = True
        frontier = np.array([self.identity])
        while frontier.size and gens.size:
            prods = self.products(frontier[:, None], gens[None, :]).ravel()
            new = np.unique(prods[~mask[prods]])
            mask[new] = True
            frontier = new
        return np.nonzero(mask)[0]

    def is_ordinary_on(self, sub, tol: float = 1e-8) -> bool:
        """True iff ``U_g U_h == U_{gh}`` exactly (no phases) for ``g, h`` in ``sub``."""
        sub = np.asarray(sub)
        e = self.elements
        for g in sub:
            prod = np.einsum("ij,njk->nik", e[g], e[sub])
            if np.max(np.abs(prod - e[self.products(g, sub)])) > tol:
                return False
        return True

    def check_associativity(self, samples: int = 200, seed: int = 0) -> bool:
        rng = np.random.default_rng(seed)
        t = rng.integers(0, self.order, size=(samples, 3))
        lhs = self.products(self.products(t[:, 0], t[:, 1]), t[:, 2])
        rhs = self.products(t[:, 0], self.products(t[:, 1], t[:, 2]))
        return bool(np.all(lhs == rhs))


def close_subgroup(mult: np.ndarray, identity: int, gens) -> np.ndarray:
    gens = np.unique(np.asarray(list(gens), dtype=np.int64))
    mask = np.zeros(mult.shape[0], dtype=bool)
    mask[identity] = True
    frontier = np.array([identity])
    if gens.size == 0:
        return frontier
    while frontier.size:
        prods = mult[frontier][:, gens].ravel()
        new = np.unique(prods[~mask[prods]])
        mask[new] = True
        frontier = new
    return np.nonzero(mask)[0]


def close_generators(gens, max_order: int = 50000, projective: bool = False,
                     name: str = "", tol: float = 1e-9) -> FiniteMatrixGroup:
    """Breadth-first closure of unitary generators into a finite group."""
    gens = [as_cmat(g) for g in gens]
    if not gens:
        raise ValueError("need at least one generator (use the identity for the trivial group)")
    d = gens[0].shape[0]
    for g in gens:
        if g.shape != (d, d):
            raise ValueError("generators must share one dimension")
        if not is_unitary(g, tol):
            raise NotUnitary("generator is not unitary")
    gstack = np.array(gens)
    if projective:
        gstack = _normalize_phase(gstack)
    ident = np.eye(d, dtype=complex)[None]
    elements = [ident[0]]
    seen = {element_key(ident[0]): 0}
    frontier = ident
    while frontier.shape[0]:
        prods = np.einsum("gij,njk->gnik", gstack, frontier).reshape(-1, d, d)
        if projective:
            prods = _normalize_phase(prods)
        fresh = []
        for m in prods:
            k = element_key(m)
            if k in seen:
                continue
            seen[k] = len(elements)
            elements.append(m)
            fresh.append(m)
            if len(elements) > max_order:
                raise OrderExceeded(f"closure exceeded {max_order} elements")
        frontier = np.array(fresh).reshape(-1, d, d)
    elements = np.array(elements)
    index = _Index(elements, projective)
    gaps = np.diff(index.sorted_fp)
    for j in np.nonzero(gaps < 1e-6)[0]:
        a, b = index.order[j], index.order[j + 1]
        if np.max(np.abs(elements[a] - elements[b])) <= MATCH_TOL:
            raise OrderExceeded("duplicate elements after closure (key rounding boundary)")
    inv = index.lookup(np.conj(np.swapaxes(elements, 1, 2)))
    if np.any(inv < 0):
        raise OrderExceeded("inverse missing from the element set; tolerance too tight?")
    gen_idx = tuple(int(i) for i in index.lookup(gstack))
    return FiniteMatrixGroup(elements=elements, inv=inv, identity=0, generators=gen_idx,
                             projective=projective, name=name, _index=index)


def trivial_group(d: int) -> FiniteMatrixGroup:
    return close_generators([np.eye(d)], name="trivial")


# ---------------------------------------------------------------- subgroups

@dataclass(frozen=True)
class SubgroupClass:
    representative: tuple[int, ...]
    order: int
    class_size: int

    @property
    def indices(self) -> np.ndarray:
        return np.array(self.representative)


def _conjugate_rows(group: FiniteMatrixGroup, sub: np.ndarray) -> np.ndarray:
    """Distinct conjugates of ``sub`` as sorted rows, lexicographically ordered."""
    rows = np.sort(group.conj_table[:, sub], axis=1)
    return np.unique(rows, axis=0)


def normalizer(group: FiniteMatrixGroup, sub) -> np.ndarray:
    sub = np.sort(np.asarray(sub))
    rows = np.sort(group.conj_table[:, sub], axis=1)
    return np.nonzero(np.all(rows == sub, axis=1))[0]


def cyclic_subgroups(group: FiniteMatrixGroup) -> list[tuple[int, np.ndarray]]:
    """One ``(generator, elements)`` pair per cyclic subgroup, in index order."""
    seen = set()
    out = []
    for g in range(group.order):
        c = group.subgroup([g])
        key = c.tobytes()
        if key not in seen:
            seen.add(key)
            out.append((g, c))
    return out


def enumerate_subgroup_classes(group: FiniteMatrixGroup,
                               max_order: int = SUBGROUP_ORDER_CAP) -> list[SubgroupClass]:
    """Conjugacy classes of subgroups, one representative each.

    Subgroups are grown from the trivial one by adjoining cyclic subgroups,
    taken up to conjugation by the normaliser of the current subgroup. Every
    conjugate of every class found is remembered, so a freshly generated
    subgroup is new exactly when it is absent from that set.
    """
    if group.order > max_order:
        raise TooLarge(f"group order {group.order} exceeds subgroup cap {max_order}")
    cyclics = cyclic_subgroups(group)
    cyc_id = np.empty(group.order, dtype=np.int64)
    cyc_lookup = {c.tobytes(): i for i, (_, c) in enumerate(cyclics)}
    for g in range(group.order):
        cyc_id[g] = cyc_lookup[group.subgroup([g]).tobytes()]
    cyc_gen = np.array([g for g, _ in cyclics])
    conj = group.conj_table
    known: set[bytes] = set()
    classes: list[SubgroupClass] = []

    def register(sub):
        rows = _conjugate_rows(group, sub)
        for r in rows:
            known.add(r.astype(np.int64).tobytes())
        rep = rows[0]
        classes.append(SubgroupClass(tuple(int(v) for v in rep), len(rep), len(rows)))
        return rep.astype(np.int64)

    queue = [register(np.array([group.identity]))]
    while queue:
        h = queue.pop(0)
        if len(h) == group.order:
            continue
        hmask = np.zeros(group.order, dtype=bool)
        hmask[h] = True
        hgens = small_generating_set(group, h) if len(h) > 1 else []
        norm = normalizer(group, h)
        # N(H)-orbits on cyclic subgroups
        orbit_ids = cyc_id[conj[np.ix_(norm, cyc_gen)]]  # (|N|, n_cyclic)
        visited = np.zeros(len(cyclics), dtype=bool)
        for ci, g in enumerate(cyc_gen):
            if visited[ci]:
                continue
            visited[orbit_ids[:, ci]] = True
            if hmask[g]:
                continue
            k = group.subgroup(hgens + [int(g)])
            if k.astype(np.int64).tobytes() in known:
                continue
            queue.append(register(k))
    classes.sort(key=lambda c: (c.order, c.representative))
    return classes


def all_subgroups_bruteforce(group: FiniteMatrixGroup) -> set[tuple[int, ...]]:
    """Every subgroup (not up to conjugacy), by adjoining single elements."""
    start = (group.identity,)
    found = {start}
    queue = [np.array(start)]
    while queue:
        h = queue.pop()
        hset = set(h.tolist())
        for g in range(group.order):
            if g in hset:
                continue
            k = tuple(group.subgroup(np.concatenate([h, [g]])).tolist())
            if k not in found:
                found.add(k)
                queue.append(np.array(k))
    return found


# ------------------------------------------------------------------ actions

@dataclass(eq=False)
class PermAction:
    """Permutation action of a group on ``n_points`` points."""

    group: FiniteMatrixGroup
    images: np.ndarray  # (|G|, n_points)

    @property
    def n_points(self) -> int:
        return self.images.shape[1]

    def validate(self) -> None:
        n = self.n_points
        srt = np.sort(self.images, axis=1)
        if not np.all(srt == np.arange(n)):
            raise ValueError("action rows are not permutations")
        g = self.group
        # (gh)(x) == g(h(x)) for all g, h
        for h in range(g.order):
            lhs = self.images[g.products(np.arange(g.order), h)]
            rhs = self.images[:, self.images[h]]
            if not np.array_equal(lhs, rhs):
                raise ValueError("action is not compatible with the multiplication table")

    def inverse_images(self) -> np.ndarray:
        return self.images[self.group.inv]

    def distinct_permutations(self) -> int:
        return len(np.unique(self.images, axis=0))


def stabilizer(act: PermAction, point: int) -> np.ndarray:
    return np.nonzero(act.images[:, point] == point)[0]


def orbit(act: PermAction, point: int) -> np.ndarray:
    return np.unique(act.images[:, point])


def orbits(act: PermAction, elements=None) -> list[list[int]]:
    """Orbits of the (sub)group ``elements`` (default: all), sorted by least member."""
    imgs = act.images if elements is None else act.images[np.asarray(elements)]
    n = act.n_points
    label = -np.ones(n, dtype=np.int64)
    out = []
    for x in range(n):
        if label[x] >= 0:
            continue
        orb = np.unique(imgs[:, x])
        label[orb] = len(out)
        out.append(orb.tolist())
    return out


def action_by_conjugation(group: FiniteMatrixGroup, mats: np.ndarray,
                          tol: float = 1e-8, chunk: int = 512) -> PermAction:
    """Action on a finite set of matrices by ``X -> U_g X U_g^dagger``.

    Raises ``ValueError`` if the set is not closed under conjugation.
    """
    mats = np.asarray(mats, dtype=complex)
    n, d = mats.shape[0], mats.shape[1]
    rng = np.random.default_rng(54321)
    w = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    fp = np.einsum("nij,ij->n", mats, w).real
    order = np.argsort(fp, kind="stable")
    sorted_fp = fp[order]
    e = group.elements
    images = np.empty((group.order, n), dtype=np.int64)
    for lo in range(0, group.order, chunk):
        u = e[lo:lo + chunk]
        conj = np.einsum("gij,njk,glk->gnil", u, mats, u.conj()).reshape(-1, d, d)
        pos = np.searchsorted(sorted_fp, np.einsum("nij,ij->n", conj, w).real)
        best = np.full(len(conj), -1, dtype=np.int64)
        best_err = np.full(len(conj), np.inf)
        for shift in (-1, 0, 1):
            cand = order[np.clip(pos + shift, 0, n - 1)]
            err = np.max(np.abs(mats[cand] - conj), axis=(1, 2))
            better = err < best_err
            best[better], best_err[better] = cand[better], err[better]
        for i in np.nonzero(best_err > tol)[0]:
            err = np.max(np.abs(mats - conj[i]), axis=(1, 2))
            j = int(np.argmin(err))
            if err[j] > tol:
                raise ValueError("matrix set is not closed under conjugation")
            best[i] = j
        images[lo:lo + len(u)] = best.reshape(len(u), n)
    return PermAction(group, images)


# ---------------------------------------------------------------- commutant

def commutant_basis(unitaries, dim: int | None = None, tol: float = 1e-8) -> list[np.ndarray]:
    """Frobenius-orthonormal basis of ``{X : X U = U X for all U}``."""
    mats = [as_cmat(u) for u in unitaries]
    if dim is None:
        if not mats:
            raise ValueError("dim required for an empty family")
        dim = mats[0].shape[0]
    ident = np.eye(dim)
    if not mats:
        return [np.eye(dim * dim)[k].reshape(dim, dim).astype(complex) for k in range(dim * dim)]
    # row-major vec: vec(A X B) = (A kron B^T) vec(X)
    blocks = [np.kron(ident, u.T) - np.kron(u, ident) for u in mats]
    system = np.vstack(blocks)
    _, s, vh = np.linalg.svd(system)
    scale = max(s[0], 1.0) if s.size else 1.0
    rank = int(np.sum(s > tol * scale))
    null = vh[rank:].conj()
    return [v.reshape(dim, dim) for v in null]


def hermitian_basis(basis: list[np.ndarray], tol: float = 1e-9) -> list[np.ndarray]:
    """Real-orthonormal Hermitian basis of a *-closed complex matrix space."""
    cands = []
    for b in basis:
        cands.append(0.5 * (b + b.conj().T))
        cands.append(0.5j * (b - b.conj().T))
    if not cands:
        return []
    vecs = np.array([np.concatenate([c.real.ravel(), c.imag.ravel()]) for c in cands])
    u, s, vh = np.linalg.svd(vecs, full_matrices=False)
    rank = int(np.sum(s > tol * max(s[0], 1.0)))
    d = basis[0].shape[0]
    out = []
    for row in vh[:rank]:
        m = (row[: d * d] + 1j * row[d * d:]).reshape(d, d)
        out.append(0.5 * (m + m.conj().T))
    return out


def count_irreducible_subreps(group: FiniteMatrixGroup, sub) -> int:
    """Character norm ``<chi, chi>`` of the representation restricted to ``sub``."""
    sub = np.asarray(sub)
    if group.projective or not group.is_ordinary_on(sub):
        raise ProjectivePhases("representation is not ordinary on this subgroup")
    tr = np.trace(group.elements[sub], axis1=1, axis2=2)
    return int(round(float(np.mean(np.abs(tr) ** 2))))


def commutant_dimension(group: FiniteMatrixGroup, sub) -> int:
    """Commutant dimension of ``U(sub)``; uses generators of ``sub`` for speed."""
    sub = np.asarray(sub)
    return len(commutant_basis(group.elements[small_generating_set(group, sub)], group.dim))


def small_generating_set(group: FiniteMatrixGroup, sub) -> list[int]:
    """Greedy generating set of the subgroup ``sub``."""
    sub = np.asarray(sub)
    target = len(sub)
    gens: list[int] = []
    current = np.array([group.identity])
    # prefer elements of large order
    order = sub[np.argsort(-group.element_orders[sub], kind="stable")]
    cur_mask = np.zeros(group.order, dtype=bool)
    cur_mask[current] = True
    for g in order:
        if len(current) == target:
            break
        if cur_mask[g]:
            continue
        gens.append(int(g))
        current = group.subgroup(gens)
        cur_mask[:] = False
        cur_mask[current] = True
    return gens or [group.identity]
