import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symmetra.bundle import Assemblage, PermAction, SymmetryData, check_covariance
from symmetra.construct import platonic_symmetry, spin_projector
from symmetra.errors import EtaOutOfRange, InfeasibleCertificate, NotUniform, NotUniformOrRigid, TooManySections
from symmetra.groups import trivial_group
from symmetra.incompat import (
    _extremes_d3,
    alpha_star,
    beta_star,
    complement_assemblage,
    dual_certificate,
    lambda_ascent,
    lambda_exhaustive,
    lambda_greedy,
    mu_ascent,
    mu_exhaustive,
    mu_greedy,
    noisy_assemblage,
    normalization_constant_z,
    robustness,
    scan_sections,
    section_fixings,
)
from symmetra.mub import mub_assemblage
from symmetra.numerics import random_hermitian, random_unitary

SQ3, SQ5 = math.sqrt(3), math.sqrt(5)
SOLIDS_D2 = ["octahedron", "cube", "icosahedron", "dodecahedron", "cuboctahedron", "icosidodecahedron"]


def brute_extremes(a):
    """Independent oracle: every section, one eigvalsh call each."""
    hi, lo = -np.inf, np.inf
    for sec in itertools.product(*a.bundle.fibres):
        w = np.linalg.eigvalsh(a.effects[list(sec)].sum(axis=0))
        hi, lo = max(hi, w[-1]), min(lo, w[0])
    return hi, lo


def trine():
    ps = np.array([spin_projector([np.cos(t), np.sin(t), 0]) for t in (0, 2 * np.pi / 3, 4 * np.pi / 3)])
    return Assemblage.from_measurements([list(2 / 3 * ps)])


def _trivial_symmetry(a):
    g = trivial_group(a.dim)
    act = PermAction(g, np.arange(a.n_outcomes)[None])
    return SymmetryData(g, act, check_covariance(a.bundle, act)[1])


# ---------------------------------------------------------------- noise

def test_noisy_examples(octahedron):
    a, _ = octahedron
    zero = noisy_assemblage(a, 0.0)
    assert np.allclose(zero.effects, np.eye(2) / 2)
    assert np.allclose(noisy_assemblage(a, 1.0).effects, a.effects)
    comp = noisy_assemblage(a, 1.0, "complement")
    assert np.allclose(comp.effects, np.eye(2) - a.effects)
    with pytest.raises(EtaOutOfRange):
        noisy_assemblage(a, 1.5)
    with pytest.raises(ValueError):
        noisy_assemblage(a, 0.5, "pink")


# ------------------------------------------------------------- constants

def test_normalization_constant(octahedron):
    assert abs(normalization_constant_z(octahedron[0]) - 3) < 1e-12
    assert abs(normalization_constant_z(mub_assemblage(3)) - 8) < 1e-12
    assert abs(normalization_constant_z(trine()) - 2 / 3) < 1e-12


def test_nonuniform_traces_rejected():
    a = Assemblage.from_measurements([[np.diag([1.0, 0.0]), np.diag([0.0, 1.0])],
                                      [np.eye(2) * 0.25, np.eye(2) * 0.75]])
    with pytest.raises(NotUniform):
        normalization_constant_z(a)


# ------------------------------------------------------------ statistics

def test_octahedron_section_extremes(octahedron):
    a, _ = octahedron
    lam, mu = lambda_exhaustive(a), mu_exhaustive(a)
    assert abs(lam.value - (1.5 + SQ3 / 2)) < 1e-12
    assert abs(mu.value - (1.5 - SQ3 / 2)) < 1e-12
    assert lam.bound == mu.bound == "exact"
    assert a.bundle.is_section(lam.section)


def test_mub3_section_extremes():
    a = mub_assemblage(3)
    assert abs(lambda_exhaustive(a).value - (3 + SQ5) / 2) < 1e-9
    assert abs(mu_exhaustive(a).value) < 1e-9


@pytest.mark.parametrize("solid", ["octahedron", "cube", "icosahedron", "dodecahedron"])
def test_scan_matches_brute_force(solid):
    a, _ = platonic_symmetry(solid)
    hi, lo = brute_extremes(a)
    assert abs(lambda_exhaustive(a).value - hi) < 1e-12
    assert abs(mu_exhaustive(a).value - lo) < 1e-12


@pytest.mark.parametrize("d", [3, 4])
def test_scan_matches_brute_force_mub(d):
    a = mub_assemblage(d)
    hi, lo = brute_extremes(a)
    lam, s_lam, mu, s_mu = scan_sections(a.effects, a.bundle)
    assert abs(lam - hi) < 1e-12 and abs(mu - lo) < 1e-12
    assert abs(np.linalg.eigvalsh(a.section_sum(s_lam))[-1] - lam) < 1e-12
    assert abs(np.linalg.eigvalsh(a.section_sum(s_mu))[0] - mu) < 1e-12


@given(seed=st.integers(0, 2**32 - 1), degenerate=st.booleans())
@settings(max_examples=30, deadline=None)
def test_closed_form_d3_extremes(seed, degenerate):
    rng = np.random.default_rng(seed)
    stack = np.array([random_hermitian(3, rng) for _ in range(20)])
    if degenerate:
        u = random_unitary(3, rng)
        w = rng.choice([-1.0, 0.0, 2.0], size=(20, 1)) * np.ones((1, 3))
        w[::2, 0] += rng.standard_normal(10) * 1e-7
        stack = np.einsum("ij,nj,kj->nik", u, w, u.conj())
    lo, hi = _extremes_d3(stack)
    ref = np.linalg.eigvalsh(stack)
    scale = 1 + np.abs(ref).max()
    assert np.max(np.abs(lo - ref[:, 0])) < 1e-6 * scale
    assert np.max(np.abs(hi - ref[:, -1])) < 1e-6 * scale


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=10, deadline=None)
def test_d3_scan_exact_on_random_povms(seed):
    """The screened scan must agree with LAPACK to rounding, not to the screening margin."""
    rng = np.random.default_rng(seed)
    meas = []
    for _ in range(4):
        u = random_unitary(3, rng)
        meas.append([np.outer(u[:, k], u[:, k].conj()) for k in range(3)])
    a = Assemblage.from_measurements(meas)
    hi, lo = brute_extremes(a)
    lam, _, mu, _ = scan_sections(a.effects, a.bundle)
    assert abs(lam - hi) < 1e-12 and abs(mu - lo) < 1e-12


# ------------------------------------------------------------ heuristics

def _greedy_cases():
    return [platonic_symmetry(s)[0] for s in SOLIDS_D2] + [mub_assemblage(d) for d in (2, 3, 4, 5)]


@pytest.mark.parametrize("idx", range(10))
def test_greedy_equals_exhaustive(idx):
    a = _greedy_cases()[idx]
    assert abs(lambda_greedy(a).value - lambda_exhaustive(a).value) < 1e-9


@pytest.mark.parametrize("idx", range(10))
def test_heuristics_bracket_exhaustive(idx):
    a = _greedy_cases()[idx]
    lam, mu = lambda_exhaustive(a), mu_exhaustive(a)
    for lh in (lambda_greedy(a), lambda_ascent(a, n_random=20)):
        assert lh.value <= lam.value + 1e-12 and lh.bound == "lower"
    for mh in (mu_greedy(a), mu_ascent(a, n_random=20)):
        assert mh.value >= mu.value - 1e-12 and mh.bound == "upper"
    assert lambda_ascent(a, n_random=20).value >= lambda_greedy(a).value - 1e-12
    assert mu_ascent(a, n_random=20).value <= mu_greedy(a).value + 1e-12


def test_greedy_is_deterministic():
    a = mub_assemblage(4)
    assert lambda_greedy(a) == lambda_greedy(a)
    assert lambda_ascent(a, seed=3) == lambda_ascent(a, seed=3)


def test_auto_falls_back_to_ascent():
    a = mub_assemblage(4)
    rep = robustness(a, cap=100)
    assert rep.lam.method == "ascent" and rep.alpha_bound == "lower" and rep.beta_bound == "lower"
    exact = robustness(a)
    assert rep.alpha_star <= exact.alpha_star + 1e-12
    assert rep.beta_star <= exact.beta_star + 1e-12
    with pytest.raises(TooManySections):
        robustness(a, method="exhaustive", cap=100)


# ------------------------------------------------------------ closed forms

@pytest.mark.parametrize("solid,expected", [
    ("octahedron", 1 / SQ3),
    ("cube", 1 / SQ3),
    ("dodecahedron", (3 + SQ5) / 10),
    ("icosahedron", (1 + SQ5) / 6),
])
def test_alpha_star_platonic(solid, expected):
    a, s = platonic_symmetry(solid)
    rep = robustness(a, s)
    assert abs(rep.alpha_star - expected) < 1e-9
    assert rep.formula_certified is True and rep.rank_one_projective


def test_mub4_closed_forms():
    rep = robustness(mub_assemblage(4))
    assert abs(rep.alpha_star - (3 + 2 * SQ3) / 15) < 1e-9
    assert abs(rep.beta_star - (SQ5 + math.sqrt(10 - 2 * SQ5)) / 5) < 1e-9
    assert rep.formula_certified is None


def test_general_formula_matches_rank_one_forms():
    from symmetra.incompat import alpha_star_rank_one, beta_star_rank_one
    a = mub_assemblage(3)
    rep = robustness(a)
    assert abs(alpha_star_rank_one(4, 3, rep.lam.value) - rep.alpha_star) < 1e-12
    assert abs(beta_star_rank_one(4, 3, rep.mu.value) - rep.beta_star) < 1e-12


@pytest.mark.parametrize("make", [lambda: platonic_symmetry("octahedron")[0], lambda: mub_assemblage(3),
                                  lambda: mub_assemblage(4), lambda: platonic_symmetry("cube")[0]])
def test_beta_is_alpha_of_complement(make):
    a = make()
    assert abs(robustness(a).beta_star - robustness(complement_assemblage(a)).alpha_star) < 1e-9


def test_strict_mode(octahedron):
    a, _ = octahedron
    rep = robustness(a, _trivial_symmetry(a))
    assert rep.formula_certified is False and rep.notes
    with pytest.raises(NotUniformOrRigid):
        robustness(a, _trivial_symmetry(a), strict=True)


def test_report_ranges():
    for a in _greedy_cases():
        rep = robustness(a)
        assert 0 <= rep.alpha_star <= 1 + 1e-12 and 0 <= rep.beta_star <= 1 + 1e-12


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=15, deadline=None)
def test_invariance_under_conjugation_and_relabeling(seed):
    rng = np.random.default_rng(seed)
    a = [platonic_symmetry("cube")[0], mub_assemblage(3), mub_assemblage(4)][seed % 3]
    base = robustness(a)
    u = random_unitary(a.dim, rng)
    conj = robustness(a.conjugated(u))
    perm = rng.permutation(a.n_measurements)
    outs = [rng.permutation(len(a.bundle.fibres[x])) for x in perm]
    rel = robustness(a.relabeled(perm, outs))
    for other in (conj, rel):
        assert abs(other.alpha_star - base.alpha_star) < 1e-9
        assert abs(other.beta_star - base.beta_star) < 1e-9
        assert abs(other.Z - base.Z) < 1e-9


# ------------------------------------------------------------ reduction

def test_section_fixings_preserve_extremes(dodecahedron):
    a, s = dodecahedron
    fix = section_fixings(a, s)
    assert fix and all(z in a.bundle.fibres[x] for x, z in fix)
    full = robustness(a, method="exhaustive")
    red = robustness(a, s, method="exhaustive", reduce_with=True)
    assert abs(full.lam.value - red.lam.value) < 1e-12
    assert abs(full.mu.value - red.mu.value) < 1e-12


def test_reduce_with_must_be_a_symmetry(octahedron):
    a, s = octahedron
    bent = Assemblage(a.bundle, a.effects.copy())
    bent.effects[0], bent.effects[1] = spin_projector([0.6, 0, 0.8]), np.eye(2) - spin_projector([0.6, 0, 0.8])
    with pytest.raises(ValueError):
        robustness(bent, reduce_with=s)


# ------------------------------------------------------------ certificate

def test_certificate_octahedron(octahedron):
    a, s = octahedron
    rep = robustness(a, s)
    cert = dual_certificate(a, rep)
    assert cert.feasible
    assert abs(cert.upper_bound - 1 / SQ3) < 1e-9
    comp = dual_certificate(a, rep, "complement")
    assert abs(comp.upper_bound - rep.beta_star) < 1e-9


def test_certificate_mub3():
    a = mub_assemblage(3)
    rep = robustness(a)
    assert abs(dual_certificate(a, rep).upper_bound - (1 + 3 * SQ5) / 16) < 1e-9
    assert abs(dual_certificate(a, rep, "complement").upper_bound - 1) < 1e-9


def test_certificate_bound_equals_alpha_star():
    for a in _greedy_cases():
        rep = robustness(a)
        assert abs(dual_certificate(a, rep).upper_bound - rep.alpha_star) < 1e-9


def test_perturbed_certificate_fails(octahedron):
    a, s = octahedron
    rep = robustness(a, s)
    tilted = spin_projector([0.3, 0.3, math.sqrt(1 - 0.18)])
    eff = a.effects.copy()
    z_axis = int(np.argmax([np.real(np.trace(e @ np.diag([1, -1]))) for e in eff]))
    partner = [f for f in a.bundle.fibres if z_axis in f][0]
    other = partner[1] if partner[0] == z_axis else partner[0]
    eff[z_axis], eff[other] = tilted, np.eye(2) - tilted
    with pytest.raises(InfeasibleCertificate):
        dual_certificate(Assemblage(a.bundle, eff), rep)
