"""Acceptance criteria 1-10, one test each.

A summary line per criterion is printed at the end of the run (see conftest).
Expected values are typed in here as radicals, independently of the
reference tables shipped with the package.
"""

import itertools
import math
import time

import numpy as np
import pytest

from symmetra.bundle import check_covariance, check_symmetry, is_rigid, is_uniform
from symmetra.construct import construct_assemblages, platonic_assemblage, platonic_symmetry
from symmetra.finite_field import field_of_order
from symmetra.groups import orbits, stabilizer
from symmetra.incompat import dual_certificate, lambda_exhaustive, lambda_greedy, robustness
from symmetra.io import load_group
from symmetra.mub import (
    clifford_stabilizer_rigidity,
    composition_phase,
    displacement,
    mub_assemblage,
    mub_symmetry_group,
    padd,
    points,
    sl_representation,
    special_linear_group,
    wigner_function,
    wigner_point_map,
)
from symmetra.numerics import random_hermitian, random_unitary
from symmetra.oracle import compatibility_oracle
from symmetra.steering import dichotomic_isotropic_bound, dichotomic_werner_bound

pytestmark = pytest.mark.acceptance

S3, S5 = math.sqrt(3), math.sqrt(5)

TABLE1_D2 = {
    "octahedron": 1 / S3,
    "cube": 1 / S3,
    "cuboctahedron": math.sqrt(5 / 2) / 3,
    "icosahedron": (1 + S5) / 6,
    "dodecahedron": (3 + S5) / 10,
    "icosidodecahedron": math.sqrt(31 + 12 * S5) / 15,
}


def test_criterion_01_table1_qubit_rows():
    t = time.perf_counter()
    for solid, expected in TABLE1_D2.items():
        a = platonic_assemblage(solid)
        assert a.bundle.section_count() <= 2**15
        rep = robustness(a, method="exhaustive")
        assert abs(rep.alpha_star - expected) < 1e-9, solid
    assert time.perf_counter() - t < 60


def test_criterion_02_mub_d3():
    a = mub_assemblage(3)
    assert a.bundle.section_count() == 81
    rep = robustness(a, method="exhaustive")
    assert abs(rep.alpha_star - (1 + 3 * S5) / 16) < 1e-9
    assert abs(rep.mu.value) < 1e-9
    assert abs(rep.beta_star - 1) < 1e-9


def test_criterion_03_mub_d4():
    a = mub_assemblage(4)
    assert a.bundle.section_count() == 1024
    rep = robustness(a, method="exhaustive")
    assert abs(rep.alpha_star - (3 + 2 * S3) / 15) < 1e-9
    assert abs(rep.beta_star - (S5 + math.sqrt(10 - 2 * S5)) / 5) < 1e-9


def test_criterion_04_mub_d5():
    t = time.perf_counter()
    a = mub_assemblage(5)
    # six bases of five outcomes
    assert a.bundle.section_count() == 5**6
    rep = robustness(a, method="exhaustive")
    assert abs(rep.alpha_star - 0.3863) < 5e-4
    assert abs(rep.beta_star - 1) < 1e-9
    assert time.perf_counter() - t < 60


def test_criterion_05_greedy_is_optimal():
    cases = [platonic_assemblage(s) for s in TABLE1_D2] + [mub_assemblage(d) for d in (2, 3, 4, 5)]
    for a in cases:
        g, e = lambda_greedy(a), lambda_exhaustive(a)
        assert abs(g.value - e.value) < 1e-9, a.name


def test_criterion_06_octahedron_sandwich():
    t = time.perf_counter()
    a, s = platonic_symmetry("octahedron")
    assert compatibility_oracle(a, 0.55).verdict == "compatible"
    rep = robustness(a, s)
    cert = dual_certificate(a, rep)
    assert cert.feasible and cert.upper_bound < 0.60
    assert 0.55 < 1 / S3 < 0.60
    assert abs(cert.upper_bound - 1 / S3) < 1e-9
    assert compatibility_oracle(a, 0.60).verdict == "incompatible"
    assert time.perf_counter() - t < 60


def test_criterion_07_dichotomic_bounds():
    assert abs(dichotomic_isotropic_bound(3) - 0.4226) < 1e-4
    assert abs(dichotomic_isotropic_bound(4) - 0.3700) < 1e-4
    assert abs(dichotomic_werner_bound(3) - 0.7340) < 1e-4
    assert abs(dichotomic_werner_bound(4) - 0.8230) < 1e-4


def test_criterion_08_construction_pipeline():
    t = time.perf_counter()
    expected = {3: TABLE1_D2["octahedron"], 4: TABLE1_D2["cube"], 6: TABLE1_D2["cuboctahedron"]}
    res = construct_assemblages(load_group("binary_octahedral"))
    found = {c.n_measurements for c in res.assemblages}
    assert found == {3, 4, 6}
    for c in res.assemblages:
        rep = robustness(c.assemblage, c.symmetry)
        assert abs(rep.alpha_star - expected[c.n_measurements]) < 1e-9
    st25 = construct_assemblages(load_group("st25"))
    mubs = [c for c in st25.assemblages if c.n_measurements == 4 and c.assemblage.dim == 3]
    assert mubs
    rep = robustness(mubs[0].assemblage, mubs[0].symmetry)
    assert abs(rep.alpha_star - (1 + 3 * S5) / 16) < 1e-9 and abs(rep.beta_star - 1) < 1e-9
    assert time.perf_counter() - t < 600


def test_criterion_09_mub_symmetry():
    t = time.perf_counter()
    a, s = mub_symmetry_group(3)
    assert s.group.order == 216
    assert check_covariance(a.bundle, s.outcome_action)[0]
    assert check_symmetry(a, s)[0]
    assert is_uniform(s)
    assert is_rigid(a, s).rigid
    assert clifford_stabilizer_rigidity(1) and clifford_stabilizer_rigidity(2)
    assert time.perf_counter() - t < 300


def test_criterion_10_property_suites():
    rng = np.random.default_rng(10)
    # orbit-stabiliser counting on the dodecahedron vertices
    _, s = platonic_symmetry("dodecahedron")
    act = s.outcome_action
    for orb in orbits(act):
        assert len(orb) * len(stabilizer(act, orb[0])) == s.group.order
    # displacement composition, d <= 5
    for d in (2, 3, 4, 5):
        f = field_of_order(d)
        ops = {u: displacement(f, u) for u in points(f)}
        for u, v in itertools.product(ops, repeat=2):
            assert np.allclose(ops[u] @ ops[v], composition_phase(f, u, v) * ops[padd(f, u, v)], atol=1e-10)
    # unbiasedness, d <= 9
    for d in (2, 3, 4, 5, 7, 8, 9):
        a = mub_assemblage(d)
        ov = np.real(np.einsum("aij,bji->ab", a.effects, a.effects))
        cross = a.bundle.proj_array[:, None] != a.bundle.proj_array[None, :]
        assert np.max(np.abs(ov[cross] - 1 / d)) < 1e-9
    # Wigner normalisation and covariance, d in {3, 5}
    for d in (3, 5):
        f = field_of_order(d)
        x = random_hermitian(d, rng)
        w = wigner_function(f, x)
        assert abs(w.sum() - np.trace(x).real) < 1e-9
        m = special_linear_group(f)[int(rng.integers(d * (d * d - 1)))]
        v = (1, d - 1)
        u_op = sl_representation(f, m, v)
        wy = wigner_function(f, u_op @ x @ u_op.conj().T)
        assert all(abs(wy[u] - w[wigner_point_map(f, m, v, u)]) < 1e-9 for u in points(f))
    # alpha*/beta* under unitary conjugation
    for a in (platonic_assemblage("icosahedron"), mub_assemblage(3), mub_assemblage(4)):
        base = robustness(a)
        moved = robustness(a.conjugated(random_unitary(a.dim, rng)))
        assert abs(base.alpha_star - moved.alpha_star) < 1e-9
        assert abs(base.beta_star - moved.beta_star) < 1e-9
    # oracle monotonicity in eta
    a, s = platonic_symmetry("octahedron")
    verdicts = [compatibility_oracle(a, eta, sym=s).verdict for eta in (0.2, 0.4, 0.5, 0.57, 0.58, 0.7)]
    first_bad = verdicts.index("incompatible")
    assert all(v == "compatible" for v in verdicts[:first_bad])
    assert all(v == "incompatible" for v in verdicts[first_bad:])
