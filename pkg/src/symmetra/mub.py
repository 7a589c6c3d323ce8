"""Phase space over GF(d), displacement operators and the standard MUBs.

Conventions
-----------
* ``omega = exp(2 pi i / p)`` and ``tau = omega^((p+1)/2)`` for odd ``p``.
* ``D_u = tau^tr(u1 u2) X_{u1} Z_{u2}`` with ``X_a|x> = |x+a>`` and
  ``Z_b|x> = omega^tr(b x)|x>``.
* The symplectic form is ``<u, v> = tr(u2 v1 - u1 v2)``.
* For ``p = 2`` the displacement is the tensor product of qubit operators
  ``i^(q p) X^q Z^p``, with ``u1`` expanded in the field basis and ``u2`` in
  its trace-dual basis. Composition then holds with a phase ``i^e`` given by
  :func:`composition_phase`.

Points are pairs of field elements; lines are ``(ray, offset)`` pairs where
ray 0 is the vertical axis ``{(0, t)}`` and ray ``1 + m`` is ``{(t, m t)}``.
The line with offset ``c`` is the ray translated by ``(c, 0)`` (ray 0) or
``(0, c)`` (other rays).
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .bundle import Assemblage, SymmetryData, symmetry_by_conjugation
from .errors import EvenCharacteristic, NotHermitian, TooLarge
from .finite_field import FiniteField, field_of_order
from .groups import close_generators, commutant_basis
from .numerics import HERMITIAN_TOL, hermiticity_defect

SYMMETRY_ORDER_CAP = 10**5

Point = tuple[int, int]
Mat2 = tuple[int, int, int, int]  # (alpha, beta, gamma, delta) row-major


def omega(f: FiniteField) -> complex:
    return np.exp(2j * np.pi / f.p)


def tau(f: FiniteField) -> complex:
    if f.p == 2:
        return 1j
    return omega(f) ** ((f.p + 1) // 2)


def _require_odd(f: FiniteField) -> None:
    if f.p == 2:
        raise EvenCharacteristic("this construction needs odd characteristic")


# ----------------------------------------------------------- phase space

def points(f: FiniteField) -> list[Point]:
    return [(a, b) for a in f.elements for b in f.elements]


def padd(f: FiniteField, u: Point, v: Point) -> Point:
    return int(f.add[u[0], v[0]]), int(f.add[u[1], v[1]])


def symplectic(f: FiniteField, u: Point, v: Point) -> int:
    """``tr(u2 v1 - u1 v2)`` as an integer in ``0 .. p-1``."""
    return int(f.trace[f.sub(f.mul[u[1], v[0]], f.mul[u[0], v[1]])])


def apply_matrix(f: FiniteField, m: Mat2, u: Point) -> Point:
    a, b, c, d = m
    return (int(f.add[f.mul[a, u[0]], f.mul[b, u[1]]]), int(f.add[f.mul[c, u[0]], f.mul[d, u[1]]]))


def mat_mul(f: FiniteField, m: Mat2, n: Mat2) -> Mat2:
    a, b, c, d = m
    e, g, h, k = n
    return (int(f.add[f.mul[a, e], f.mul[b, h]]), int(f.add[f.mul[a, g], f.mul[b, k]]),
            int(f.add[f.mul[c, e], f.mul[d, h]]), int(f.add[f.mul[c, g], f.mul[d, k]]))


def det(f: FiniteField, m: Mat2) -> int:
    a, b, c, d = m
    return int(f.sub(f.mul[a, d], f.mul[b, c]))


def special_linear_group(f: FiniteField) -> list[Mat2]:
    return [m for m in itertools.product(f.elements, repeat=4) if det(f, m) == 1]


def ray_directions(f: FiniteField) -> list[Point]:
    return [(0, 1)] + [(1, m) for m in f.elements]


def ray_matrix(f: FiniteField, r: int) -> Mat2:
    """Unit-determinant matrix taking the vertical axis to ray ``r``."""
    if r == 0:
        return (1, 0, 0, 1)
    return (0, 1, int(f.neg[1]), r - 1)


def line_offset_vector(r: int, c: int) -> Point:
    return (c, 0) if r == 0 else (0, c)


def line_points(f: FiniteField, r: int, c: int) -> frozenset[Point]:
    direction = ray_directions(f)[r]
    shift = line_offset_vector(r, c)
    return frozenset(padd(f, shift, (int(f.mul[t, direction[0]]), int(f.mul[t, direction[1]])))
                     for t in f.elements)


def lines(f: FiniteField) -> list[tuple[int, int]]:
    return [(r, c) for r in range(f.d + 1) for c in f.elements]


@lru_cache(maxsize=16)
def _line_table(f: FiniteField) -> dict:
    return {line_points(f, r, c): (r, c) for r, c in lines(f)}


def striation(f: FiniteField, r: int) -> list[frozenset[Point]]:
    return [line_points(f, r, c) for c in f.elements]


def line_image(f: FiniteField, m: Mat2, v: Point, line: tuple[int, int]) -> tuple[int, int]:
    """The line ``F(l + v)``."""
    pts = line_points(f, *line)
    img = frozenset(apply_matrix(f, m, padd(f, u, v)) for u in pts)
    return _line_table(f)[img]


# ----------------------------------------------------------- operators

def _qubit_coords(f: FiniteField, u: Point):
    """Coordinates of ``u1`` in the field basis and of ``u2`` in the dual basis."""
    q = [int(f.trace[f.mul[e, u[0]]]) for e in f.dual_basis]
    p = [int(f.trace[f.mul[e, u[1]]]) for e in f.basis]
    return q, p


def shift_operator(f: FiniteField, a: int) -> np.ndarray:
    x = np.zeros((f.d, f.d), dtype=complex)
    for s in f.elements:
        x[f.add[s, a], s] = 1
    return x


def clock_operator(f: FiniteField, b: int) -> np.ndarray:
    w = omega(f)
    return np.diag([w ** int(f.trace[f.mul[b, s]]) for s in f.elements])


def displacement(f: FiniteField, u: Point) -> np.ndarray:
    if f.p == 2:
        q, p = _qubit_coords(f, u)
        phase = 1j ** sum(a * b for a, b in zip(q, p))
    else:
        phase = tau(f) ** int(f.trace[f.mul[u[0], u[1]]])
    return phase * shift_operator(f, u[0]) @ clock_operator(f, u[1])


def composition_phase(f: FiniteField, u: Point, v: Point) -> complex:
    """The phase ``c`` in ``D_u D_v = c D_{u+v}``."""
    if f.p != 2:
        return tau(f) ** symplectic(f, u, v)
    (q, p), (q2, p2) = _qubit_coords(f, u), _qubit_coords(f, v)
    e = 0
    for a, b, c, d in zip(q, p, q2, p2):
        e += a * b + c * d + 2 * b * c - ((a + c) % 2) * ((b + d) % 2)
    return 1j ** (e % 4)


# ----------------------------------------------------- SL(2) representation

def sl_representation(f: FiniteField, m: Mat2, v: Point = (0, 0)) -> np.ndarray:
    """``U(F, v) = U(F, 0) D_v`` for ``F`` of unit determinant (odd ``p``)."""
    _require_odd(f)
    if det(f, m) != 1:
        raise ValueError("matrix must have unit determinant")
    alpha, beta, gamma, delta = m
    t = tau(f)
    d = f.d
    u = np.zeros((d, d), dtype=complex)
    if beta != 0:
        binv = int(f.inv[beta])
        two = f.scalar(2)
        for x in f.elements:
            for y in f.elements:
                num = f.add[f.sub(f.mul[alpha, f.mul[y, y]], f.mul[two, f.mul[x, y]]), f.mul[delta, f.mul[x, x]]]
                u[x, y] = t ** int(f.trace[f.mul[num, binv]])
        u /= np.sqrt(d)
    else:
        ag = f.mul[alpha, gamma]
        for x in f.elements:
            u[f.mul[alpha, x], x] = t ** int(f.trace[f.mul[ag, f.mul[x, x]]])
    return u @ displacement(f, v)


def sl_covariance_phase(f: FiniteField, m: Mat2, v: Point, u: Point) -> complex:
    """Phase ``c`` with ``U(F,v) D_u U(F,v)^dagger = c D_{Fu}``; equals ``omega^<v,u>``."""
    return omega(f) ** symplectic(f, v, u)


# ----------------------------------------------------------- MUBs

def vacuum(d: int) -> np.ndarray:
    p0 = np.zeros((d, d), dtype=complex)
    p0[0, 0] = 1
    return p0


def quantum_net(f: FiniteField) -> dict[tuple[int, int], np.ndarray]:
    """Covariant map from lines to rank-one projections, anchored at the vertical axis."""
    _require_odd(f)
    p0 = vacuum(f.d)
    net = {}
    for r in range(f.d + 1):
        u_r = sl_representation(f, ray_matrix(f, r))
        q_ray = u_r @ p0 @ u_r.conj().T
        for c in f.elements:
            dv = displacement(f, line_offset_vector(r, c))
            net[(r, c)] = dv @ q_ray @ dv.conj().T
    return net


def _joint_eigenprojections(ops: list[np.ndarray], seed: int = 7) -> list[np.ndarray]:
    """Rank-one eigenprojections of a commuting unitary family, in lexicographic eigenvalue order."""
    d = ops[0].shape[0]
    rng = np.random.default_rng(seed)
    h = np.zeros((d, d), dtype=complex)
    for o in ops:
        c = rng.standard_normal() + 1j * rng.standard_normal()
        h += c * o + np.conj(c) * o.conj().T
    _, vecs = np.linalg.eigh(h)
    projs = []
    for k in range(d):
        v = vecs[:, k]
        label = []
        for o in ops:
            lam = v.conj() @ o @ v
            if np.linalg.norm(o @ v - lam * v) > 1e-8:
                raise ValueError("family is not jointly diagonalised")
            label.append(round(float(np.angle(lam)) % (2 * np.pi), 9) % round(2 * np.pi, 9))
        projs.append((tuple(label), np.outer(v, v.conj())))
    projs.sort(key=lambda t: t[0])
    return [p for _, p in projs]


def mub_assemblage(f: FiniteField | int) -> Assemblage:
    """The ``d+1`` bases as an assemblage; measurement ``r`` comes from ray ``r``."""
    if isinstance(f, int):
        f = field_of_order(f)
    if f.d > 32:
        raise TooLarge("MUB construction is limited to d <= 32")
    if f.p != 2:
        net = quantum_net(f)
        meas = [[net[(r, c)] for c in f.elements] for r in range(f.d + 1)]
    else:
        meas = []
        for r, direction in enumerate(ray_directions(f)):
            fam = [displacement(f, (int(f.mul[t, direction[0]]), int(f.mul[t, direction[1]])))
                   for t in f.elements if t]
            meas.append(_joint_eigenprojections(fam))
    return Assemblage.from_measurements(meas, name=f"MUBs d={f.d}")


def sl_generators(f: FiniteField) -> list[Mat2]:
    one, zero = 1, 0
    gens = [(zero, int(f.neg[1]), one, zero)]
    gens += [(one, b, zero, one) for b in f.basis]
    theta = f.primitive_element
    gens.append((theta, zero, zero, int(f.inv[theta])))
    return gens


def mub_symmetry_group(f: FiniteField | int) -> tuple[Assemblage, SymmetryData]:
    """The affine symplectic group acting on the MUB assemblage (odd ``p``)."""
    if isinstance(f, int):
        f = field_of_order(f)
    _require_odd(f)
    d = f.d
    expected = d**2 * d * (d * d - 1)
    if expected > SYMMETRY_ORDER_CAP:
        raise TooLarge(f"group of order {expected} exceeds {SYMMETRY_ORDER_CAP}")
    gens = [sl_representation(f, m) for m in sl_generators(f)]
    gens += [displacement(f, (b, 0)) for b in f.basis] + [displacement(f, (0, b)) for b in f.basis]
    group = close_generators(gens, max_order=expected, projective=True,
                             name=f"SL(2,{d}) x| F_{d}^2")
    a = mub_assemblage(f)
    return a, symmetry_by_conjugation(a, group)


def heisenberg_weyl_symmetry(f: FiniteField | int) -> tuple[Assemblage, SymmetryData]:
    """Displacements acting on the MUB assemblage, any prime power ``d``.

    Not uniform, so it certifies nothing, but it fixes two bases and shrinks
    exhaustive section scans by ``d^2``.
    """
    if isinstance(f, int):
        f = field_of_order(f)
    gens = [displacement(f, (b, 0)) for b in f.basis] + [displacement(f, (0, b)) for b in f.basis]
    group = close_generators(gens, max_order=f.d**2, projective=True, name=f"HW({f.d})")
    a = mub_assemblage(f)
    return a, symmetry_by_conjugation(a, group)


def line_stabilizer_orbits(f: FiniteField, line: tuple[int, int] = (0, 0)) -> list[frozenset[Point]]:
    """Orbits on phase space of the affine maps ``u -> F(u + v)`` fixing ``line``."""
    target = line_points(f, *line)
    maps = []
    for m in special_linear_group(f):
        for v in points(f):
            if frozenset(apply_matrix(f, m, padd(f, u, v)) for u in target) == target:
                maps.append((m, v))
    remaining = set(points(f))
    out = []
    while remaining:
        u = min(remaining)
        orb = frozenset(apply_matrix(f, m, padd(f, u, v)) for m, v in maps)
        out.append(orb)
        remaining -= orb
    return out


# ----------------------------------------------------------- Wigner

def characteristic_function(f: FiniteField, x: np.ndarray) -> dict[Point, complex]:
    return {v: complex(np.trace(displacement(f, v).conj().T @ x)) for v in points(f)}


def wigner_function(f: FiniteField, x, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """``W(u) = d^-2 sum_v omega^<u,v> Tr(D_v^dagger X)`` as a ``(d, d)`` array indexed by ``(u1, u2)``."""
    _require_odd(f)
    x = np.asarray(x, dtype=complex)
    if hermiticity_defect(x) > tol:
        raise NotHermitian("Wigner function needs a Hermitian operator")
    c = characteristic_function(f, x)
    w = omega(f)
    d = f.d
    out = np.zeros((d, d), dtype=complex)
    for u in points(f):
        out[u] = sum(w ** symplectic(f, u, v) * cv for v, cv in c.items()) / d**2
    if np.max(np.abs(out.imag)) > 1e-9:
        raise AssertionError("Wigner function of a Hermitian operator must be real")
    return out.real


def inverse_matrix(f: FiniteField, m: Mat2) -> Mat2:
    a, b, c, d = m
    return (d, int(f.neg[b]), int(f.neg[c]), a)


def wigner_point_map(f: FiniteField, m: Mat2, v: Point, u: Point) -> Point:
    """The point ``F^-1 u + v``: ``W`` of ``U(F,v) X U(F,v)^dagger`` at ``u`` is ``W_X`` there."""
    return padd(f, apply_matrix(f, inverse_matrix(f, m), u), v)


# ----------------------------------------------------------- even case

def _cnot(n: int, control: int, target: int) -> np.ndarray:
    dim = 2**n
    m = np.zeros((dim, dim))
    for s in range(dim):
        bits = [(s >> (n - 1 - k)) & 1 for k in range(n)]
        if bits[control]:
            bits[target] ^= 1
        m[sum(b << (n - 1 - k) for k, b in enumerate(bits)), s] = 1
    return m


def _phase_gate(n: int, j: int) -> np.ndarray:
    diag = [1j if (s >> (n - 1 - j)) & 1 else 1 for s in range(2**n)]
    return np.diag(diag)


def clifford_stabilizer_generators(n: int) -> list[np.ndarray]:
    """Phase gates on every qubit and CNOTs on every ordered qubit pair."""
    gens = [_phase_gate(n, j) for j in range(n)]
    gens += [_cnot(n, j, k) for j in range(n) for k in range(n) if j != k]
    return gens


def clifford_stabilizer_rigidity(n: int) -> bool:
    """Is the commutant of the ``|0...0>`` stabiliser spanned by ``P_0`` and ``1 - P_0``?"""
    if n > 3:
        raise TooLarge("limited to at most three qubits")
    dim = 2**n
    basis = commutant_basis(clifford_stabilizer_generators(n), dim)
    if len(basis) != 2:
        return False
    p0 = vacuum(dim)
    mats = np.array([b.ravel() for b in basis]).T
    for target in (p0, np.eye(dim) - p0):
        coef, *_ = np.linalg.lstsq(mats, target.ravel(), rcond=None)
        if np.max(np.abs(mats @ coef - target.ravel())) > 1e-8:
            return False
    return True
