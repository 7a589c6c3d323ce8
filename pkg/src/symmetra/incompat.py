"""Incompatibility robustness of uniform, rigidly symmetric assemblages.

For such assemblages the dual optimum has the form ``X_z = a 1 + b A_z``,
so the white-noise and complement-noise robustness reduce to two section
statistics:

* ``lambda`` the largest eigenvalue of any section sum ``sum_x A_{s(x)}``
* ``mu``     the smallest eigenvalue of any section sum

Both are found by an exhaustive scan or, as bounds, by greedy or ascent searches.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .bundle import SECTION_CAP, Assemblage, SymmetryData, check_symmetry, is_rigid, is_uniform
from .errors import EtaOutOfRange, InfeasibleCertificate, NotUniform, NotUniformOrRigid, TooManySections
from .numerics import eigvalsh_batch

CERT_TOL = 1e-9
TRACE_TOL = 1e-9
TARGET_BLOCK = 1 << 15


# ------------------------------------------------------------------ noise

def noisy_assemblage(a: Assemblage, eta: float, kind: str = "white") -> Assemblage:
    """White noise ``eta A + (1-eta) Tr(A) 1/d`` or its complement-noise analogue."""
    if not 0.0 <= eta <= 1.0:
        raise EtaOutOfRange(f"eta = {eta} is outside [0, 1]")
    d = a.dim
    tr = a.traces()[:, None, None]
    ident = np.eye(d)[None]
    noise = tr * ident / d
    if kind == "white":
        signal = a.effects
    elif kind == "complement":
        if d < 2:
            raise ValueError("complement noise needs d >= 2")
        signal = (tr * ident - a.effects) / (d - 1)
    else:
        raise ValueError(f"unknown noise kind {kind!r}")
    return Assemblage(a.bundle, eta * signal + (1 - eta) * noise, a.name)


def complement_assemblage(a: Assemblage) -> Assemblage:
    """``B_z = (Tr(A_z) 1 - A_z)/(d-1)``; complement noise on ``A`` is white noise on ``B``."""
    return noisy_assemblage(a, 1.0, "complement")


# -------------------------------------------------------------- constants

def _uniform_trace(a: Assemblage) -> float:
    tr = a.traces()
    t = a.dim * a.n_measurements / a.n_outcomes
    if np.max(np.abs(tr - t)) > TRACE_TOL:
        raise NotUniform("effect traces differ; the closed forms need Tr(A_z) = d|M|/|Omega|")
    return t


def normalization_constant_z(a: Assemblage) -> float:
    """``Z = sum_z Tr(A_z^2) - d |M|^2 / |Omega|``."""
    _uniform_trace(a)
    e = a.effects
    tr_sq = np.real(np.einsum("nij,nji->", e, e))
    return float(tr_sq - a.dim * a.n_measurements**2 / a.n_outcomes)


# ------------------------------------------------------------ statistics

@dataclass(frozen=True)
class SectionStatistic:
    value: float
    section: tuple[int, ...]
    method: str          # "exhaustive" | "greedy" | "ascent"
    bound: str           # "exact" | "lower" | "upper"

    def to_dict(self) -> dict:
        return {"value": self.value, "section": list(self.section), "method": self.method, "bound": self.bound}


def _fibre_arrays(a: Assemblage):
    return [np.asarray(f, dtype=np.int64) for f in a.bundle.fibres]


def _sums_over(effects, fibres):
    """All section sums over ``fibres`` in lexicographic order, with the section table."""
    d = effects.shape[1]
    sums = np.zeros((1, d, d), dtype=complex)
    secs = np.zeros((1, 0), dtype=np.int64)
    for f in fibres:
        sums = (sums[:, None] + effects[f][None]).reshape(-1, d, d)
        secs = np.concatenate([np.repeat(secs, len(f), axis=0),
                               np.tile(f, secs.shape[0])[:, None]], axis=1)
    return sums, secs


def _extremes_d3(stack):
    """Closed-form extreme eigenvalues of Hermitian 3x3 matrices (trigonometric root)."""
    a, b, c = (stack[:, i, i].real for i in range(3))
    d, e, f = stack[:, 0, 1], stack[:, 1, 2], stack[:, 0, 2]
    q = (a + b + c) / 3
    aa, bb, cc = a - q, b - q, c - q
    de, ee, fe = np.abs(d) ** 2, np.abs(e) ** 2, np.abs(f) ** 2
    p = np.sqrt((aa * aa + bb * bb + cc * cc + 2 * (de + ee + fe)) / 6)
    det = aa * bb * cc + 2 * np.real(d * e * np.conj(f)) - aa * ee - bb * fe - cc * de
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(p > 0, det / (2 * p**3), 0.0)
    phi = np.arccos(np.clip(r, -1.0, 1.0)) / 3
    return q + 2 * p * np.cos(phi + 2 * np.pi / 3), q + 2 * p * np.cos(phi)


def _spectrum_extremes(stack):
    w = eigvalsh_batch(stack)
    return w[:, 0], w[:, -1]


SCREEN_MARGIN = 1e-6


def _block_extremes(block):
    """``(lo_min, j, hi_max, i)`` for one block.

    For d=3 the closed form screens the block and LAPACK settles every
    entry within ``SCREEN_MARGIN`` of the screened extreme, so the result is
    as accurate as a direct ``eigvalsh`` call.
    """
    if block.shape[-1] != 3:
        lo, hi = _spectrum_extremes(block)
        j, i = int(np.argmin(lo)), int(np.argmax(hi))
        return lo[j], j, hi[i], i
    lo, hi = _extremes_d3(block)
    tol = SCREEN_MARGIN * max(1.0, float(np.max(np.abs(hi))))
    near_hi = np.flatnonzero(hi >= hi.max() - tol)
    near_lo = np.flatnonzero(lo <= lo.min() + tol)
    w_hi = np.linalg.eigvalsh(block[near_hi])[:, -1]
    w_lo = np.linalg.eigvalsh(block[near_lo])[:, 0]
    i, j = int(np.argmax(w_hi)), int(np.argmin(w_lo))
    return w_lo[j], int(near_lo[j]), w_hi[i], int(near_hi[i])


def scan_sections(effects: np.ndarray, bundle, cap: int = SECTION_CAP, workers: int = 1,
                  fibres=None):
    """Exhaustive ``(max maxEig, argmax, min minEig, argmin)`` over all section sums.

    Sections are split into a head (enumerated one at a time) and a tail
    (precomputed in a block), so memory stays at one block. Head ranges are
    independent and can run on ``workers`` threads. ``fibres`` restricts the
    choice per measurement, e.g. to one outcome on measurements pinned by
    :func:`section_fixings`.
    """
    if fibres is None:
        fibres = bundle.fibres
    fibres = [np.asarray(f, dtype=np.int64) for f in fibres]
    total = math.prod(len(f) for f in fibres)
    if total > cap:
        raise TooManySections(f"{total} sections exceed cap {cap}")
    k = len(fibres)
    tail_n = 1
    while k > 0 and tail_n * len(fibres[k - 1]) <= max(TARGET_BLOCK, len(fibres[-1])):
        k -= 1
        tail_n *= len(fibres[k])
    tail_sums, tail_secs = _sums_over(effects, fibres[k:])
    heads = list(itertools.product(*fibres[:k]))

    def work(chunk):
        best = (-np.inf, None, np.inf, None)
        for h in chunk:
            block = tail_sums + effects[list(h)].sum(axis=0) if h else tail_sums
            lo, j, hi, i = _block_extremes(block)
            if hi > best[0]:
                best = (hi, (h, i), best[2], best[3])
            if lo < best[2]:
                best = (best[0], best[1], lo, (h, j))
        return best

    if workers > 1 and len(heads) > 1:
        n = math.ceil(len(heads) / workers)
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(work, [heads[i:i + n] for i in range(0, len(heads), n)]))
    else:
        parts = [work(heads)]
    hi_part = max(parts, key=lambda p: p[0])
    lo_part = min(parts, key=lambda p: p[2])

    def sec(loc):
        h, i = loc
        return tuple(int(z) for z in (*h, *tail_secs[i]))

    return float(hi_part[0]), sec(hi_part[1]), float(lo_part[2]), sec(lo_part[3])


def section_fixings(a: Assemblage, sym: SymmetryData) -> list[tuple[int, int]]:
    """Pairs ``(x, z)`` such that every section is equivalent to one through all ``z``.

    Both extremes are invariant under the symmetry, since a group element
    maps a section sum to a unitary conjugate. If a subgroup ``H`` fixes
    measurement ``x`` and permutes its outcomes transitively, any section
    can be moved so that it picks ``z`` on ``x``; the argument repeats with
    the stabiliser of ``z`` in ``H``. Measurements with the largest fibre go
    first.
    """
    if sym.measurement_action is None:
        raise ValueError("symmetry data lacks a measurement action")
    meas = sym.measurement_action.images
    out = sym.outcome_action.images
    fib = a.bundle.fibres
    h = np.arange(sym.group.order)
    free = list(range(a.n_measurements))
    fixed = []
    while True:
        best = None
        for x in free:
            hx = h[meas[h, x] == x]
            f = fib[x]
            if len(f) > 1 and set(out[hx, f[0]].tolist()) >= set(f):
                if best is None or len(f) > len(fib[best[0]]):
                    best = (x, hx)
        if best is None:
            return fixed
        x, hx = best
        z = fib[x][0]
        fixed.append((x, z))
        free.remove(x)
        h = hx[out[hx, z] == z]


def restricted_fibres(a: Assemblage, fixings) -> list[tuple[int, ...]]:
    fib = list(a.bundle.fibres)
    for x, z in fixings:
        fib[x] = (z,)
    return fib


def section_extremes(a: Assemblage, cap: int = SECTION_CAP, workers: int = 1,
                     reduce_with: SymmetryData | None = None):
    """``(lambda, mu)`` as exact statistics from one exhaustive scan.

    ``reduce_with`` must be a symmetry of ``a``; it pins outcomes via
    :func:`section_fixings` and shrinks the scan accordingly.
    """
    fibres = None
    if reduce_with is not None:
        fibres = restricted_fibres(a, section_fixings(a, reduce_with))
    lam, s_lam, mu, s_mu = scan_sections(a.effects, a.bundle, cap, workers, fibres)
    return (SectionStatistic(lam, s_lam, "exhaustive", "exact"),
            SectionStatistic(mu, s_mu, "exhaustive", "exact"))


def lambda_exhaustive(a: Assemblage, cap: int = SECTION_CAP, workers: int = 1) -> SectionStatistic:
    return section_extremes(a, cap, workers)[0]


def mu_exhaustive(a: Assemblage, cap: int = SECTION_CAP, workers: int = 1) -> SectionStatistic:
    return section_extremes(a, cap, workers)[1]


def _greedy(a: Assemblage, sign: int, tie_tol: float = 1e-12):
    """Grow a section from outcome 0 of measurement 0, one measurement at a time.

    ``sign=+1`` maximises the running largest eigenvalue, ``sign=-1``
    minimises the running smallest one. Ties go to the lowest
    (measurement, outcome) index.
    """
    fibres = a.bundle.fibres
    e = a.effects
    chosen = {0: fibres[0][0]}
    current = e[fibres[0][0]].copy()
    while len(chosen) < len(fibres):
        cand = [(x, z) for x, f in enumerate(fibres) if x not in chosen for z in f]
        stack = current[None] + e[[z for _, z in cand]]
        lo, hi = _spectrum_extremes(stack)
        score = hi if sign > 0 else -lo
        best = np.max(score)
        pick = int(np.nonzero(score >= best - tie_tol)[0][0])
        x, z = cand[pick]
        chosen[x] = z
        current = current + e[z]
    sec = tuple(chosen[x] for x in range(len(fibres)))
    lo, hi = _spectrum_extremes(current[None])
    return sec, float(hi[0] if sign > 0 else lo[0])


def lambda_greedy(a: Assemblage) -> SectionStatistic:
    sec, val = _greedy(a, +1)
    return SectionStatistic(val, sec, "greedy", "lower")


def mu_greedy(a: Assemblage) -> SectionStatistic:
    sec, val = _greedy(a, -1)
    return SectionStatistic(val, sec, "greedy", "upper")


def ascent_starts(a: Assemblage, seed: int = 0, n_random: int = 300) -> list[list[int]]:
    """Greedy sections, the eigenvector sections of every effect, and seeded random ones."""
    e = a.effects
    fib = [np.asarray(f) for f in a.bundle.fibres]
    starts = [list(_greedy(a, +1)[0]), list(_greedy(a, -1)[0])]
    _, vecs = np.linalg.eigh(e)
    for psi in vecs[:, :, -1]:
        ex = np.real(np.einsum("i,nij,j->n", psi.conj(), e, psi))
        starts.append([int(f[np.argmax(ex[f])]) for f in fib])
        starts.append([int(f[np.argmin(ex[f])]) for f in fib])
    rng = np.random.default_rng(seed)
    starts += [[int(rng.choice(f)) for f in fib] for _ in range(n_random)]
    return starts


def _ascent(a: Assemblage, sign: int, starts, max_iter: int = 200):
    """Alternate between the extreme eigenvector of a section sum and the best section for it.

    Each step can only improve the extreme eigenvalue, so every start ends at
    a fixed point; the best fixed point is returned.
    """
    e = a.effects
    fib = [np.asarray(f) for f in a.bundle.fibres]
    best_sec, best_val = None, None
    for sec in starts:
        sec = list(sec)
        for _ in range(max_iter):
            w, v = np.linalg.eigh(e[sec].sum(axis=0))
            val, psi = (w[-1], v[:, -1]) if sign > 0 else (w[0], v[:, 0])
            ex = sign * np.real(np.einsum("i,nij,j->n", psi.conj(), e, psi))
            new = [int(f[np.argmax(ex[f])]) for f in fib]
            if sum(ex[new]) <= sum(ex[sec]) + 1e-14:
                break
            sec = new
        if best_val is None or sign * val > sign * best_val:
            best_sec, best_val = tuple(sec), float(val)
    return best_sec, best_val


def lambda_ascent(a: Assemblage, seed: int = 0, n_random: int = 300) -> SectionStatistic:
    sec, val = _ascent(a, +1, ascent_starts(a, seed, n_random))
    return SectionStatistic(val, sec, "ascent", "lower")


def mu_ascent(a: Assemblage, seed: int = 0, n_random: int = 300) -> SectionStatistic:
    sec, val = _ascent(a, -1, ascent_starts(a, seed, n_random))
    return SectionStatistic(val, sec, "ascent", "upper")


# ------------------------------------------------------------ closed forms

def alpha_star(a: Assemblage, z: float, lam: float) -> float:
    """``alpha* = (d/Z) (lambda - |M|^2/|Omega|)``."""
    return a.dim / z * (lam - a.n_measurements**2 / a.n_outcomes)


def beta_star(a: Assemblage, z: float, mu: float) -> float:
    """``beta* = (d(d-1)/Z) (|M|^2/|Omega| - mu)``."""
    d = a.dim
    return d * (d - 1) / z * (a.n_measurements**2 / a.n_outcomes - mu)


def alpha_star_rank_one(n_measurements: int, d: int, lam: float) -> float:
    m = n_measurements
    return (lam - m / d) / (m - m / d)


def beta_star_rank_one(n_measurements: int, d: int, mu: float) -> float:
    return 1 - mu * d / n_measurements


@dataclass
class RobustnessReport:
    Z: float
    lam: SectionStatistic
    mu: SectionStatistic
    alpha_star: float
    beta_star: float
    rank_one_projective: bool
    formula_certified: bool | None = None   # None: no symmetry data supplied
    notes: list[str] = field(default_factory=list)

    @property
    def alpha_bound(self) -> str:
        return "exact" if self.lam.bound == "exact" else "lower"

    @property
    def beta_bound(self) -> str:
        return "exact" if self.mu.bound == "exact" else "lower"

    def to_dict(self) -> dict:
        out = asdict(self)
        out["lam"] = self.lam.to_dict()
        out["mu"] = self.mu.to_dict()
        out["alpha_bound"] = self.alpha_bound
        out["beta_bound"] = self.beta_bound
        return out


def reduced_section_count(a: Assemblage, reduce_with: SymmetryData | None = None) -> int:
    if reduce_with is None:
        return a.bundle.section_count()
    return math.prod(len(f) for f in restricted_fibres(a, section_fixings(a, reduce_with)))


def robustness(a: Assemblage, sym: SymmetryData | None = None, method: str = "auto",
               cap: int = SECTION_CAP, strict: bool = False, workers: int = 1,
               reduce_with: SymmetryData | bool | None = None, seed: int = 0) -> RobustnessReport:
    """Closed-form ``alpha*`` and ``beta*`` with provenance flags.

    ``method`` is ``"exhaustive"``, ``"greedy"``, ``"ascent"`` (greedy plus
    eigenvector ascent from many starts) or ``"auto"``: exhaustive when the
    section count fits under ``cap``, ascent otherwise. ``reduce_with`` is a
    symmetry used only to shrink the exhaustive scan; ``True`` means ``sym``.
    With ``strict=True`` a symmetry that is not uniform and rigid raises
    instead of being flagged.
    """
    z = normalization_constant_z(a)
    notes = []
    certified = None
    if sym is not None:
        certified = bool(is_uniform(sym) and is_rigid(a, sym).rigid)
        if not certified:
            if strict:
                raise NotUniformOrRigid("closed forms are not guaranteed for this symmetry")
            notes.append("formula not certified: symmetry is not uniform and rigid")
    if reduce_with is True:
        reduce_with = sym
    if reduce_with is not None and not check_symmetry(a, reduce_with)[0]:
        raise ValueError("reduce_with is not a symmetry of the assemblage")
    if method == "auto":
        method = "exhaustive" if reduced_section_count(a, reduce_with) <= cap else "ascent"
    if method == "exhaustive":
        lam, mu = section_extremes(a, cap, workers, reduce_with)
    elif method == "greedy":
        lam, mu = lambda_greedy(a), mu_greedy(a)
        notes.append("greedy sections: alpha* and beta* are lower bounds")
    elif method == "ascent":
        lam, mu = lambda_ascent(a, seed), mu_ascent(a, seed)
        notes.append("ascent sections: alpha* and beta* are lower bounds")
    else:
        raise ValueError(f"unknown method {method!r}")
    return RobustnessReport(z, lam, mu, alpha_star(a, z, lam.value), beta_star(a, z, mu.value),
                            a.is_rank_one_projective(), certified, notes)


# ------------------------------------------------------------ certificate

@dataclass
class DualCertificate:
    a: float
    b: float
    first_constraint: float
    worst_section_min_eig: float
    upper_bound: float
    kind: str = "white"

    @property
    def feasible(self) -> bool:
        return self.first_constraint >= -CERT_TOL and self.worst_section_min_eig >= -CERT_TOL

    def per_outcome(self, effects: np.ndarray) -> np.ndarray:
        d = effects.shape[1]
        return self.a * np.eye(d)[None] + self.b * effects

    def to_dict(self) -> dict:
        return {**asdict(self), "feasible": self.feasible}


def dual_certificate(a: Assemblage, rep: RobustnessReport, kind: str = "white",
                     cap: int = SECTION_CAP, tol: float = CERT_TOL,
                     reduce_with: SymmetryData | None = None) -> DualCertificate:
    """Check the ansatz ``X_z = (1/Z)(lambda/|M| 1 - A_z)`` against every dual constraint.

    For ``kind="complement"`` the same check runs on the complement
    assemblage, whose white-noise robustness equals ``beta*`` of ``a``.
    The returned bound is an upper bound on the robustness by weak duality.
    Raises :class:`InfeasibleCertificate` if a constraint fails by more than ``tol``.
    """
    if kind == "complement":
        d = a.dim
        target = complement_assemblage(a)
        k = d * a.n_measurements**2 / a.n_outcomes
        lam = (k - rep.mu.value) / (d - 1)
        z = rep.Z / (d - 1) ** 2
    elif kind == "white":
        target, lam, z = a, rep.lam.value, rep.Z
    else:
        raise ValueError(f"unknown noise kind {kind!r}")
    e = target.effects
    m = target.n_measurements
    ca, cb = lam / (m * z), -1.0 / z
    x = ca * np.eye(target.dim)[None] + cb * e
    tr_a = target.traces()
    objective = 1 + float(np.real(np.einsum("nij,nji->", x, e)))
    first = objective - float(np.sum(tr_a * np.real(np.trace(x, axis1=1, axis2=2)))) / target.dim
    fibres = None
    if reduce_with is not None:
        # X_z is an affine function of A_z (or of the complement), so it shares the symmetry
        fibres = restricted_fibres(a, section_fixings(a, reduce_with))
    _, _, worst, _ = scan_sections(x, target.bundle, cap, fibres=fibres)
    cert = DualCertificate(ca, cb, first, worst, objective, kind)
    if first < -tol or worst < -tol:
        raise InfeasibleCertificate(
            f"certificate violates the dual constraints (first {first:.3e}, worst section {worst:.3e})")
    return cert
