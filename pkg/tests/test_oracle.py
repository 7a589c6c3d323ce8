import math

import numpy as np
import pytest

from symmetra.bundle import PermAction, SymmetryData, check_covariance
from symmetra.groups import trivial_group
from symmetra.incompat import noisy_assemblage, robustness
from symmetra.mub import mub_symmetry_group
from symmetra.oracle import FullProblem, ReducedProblem, compatibility_oracle, reduce_by_symmetry, symmetrize

SQ3 = math.sqrt(3)


def _check_witness(a, eta, f, tol=1e-6):
    """Independent check of a joint measurement: PSD blocks with the right marginals."""
    target = noisy_assemblage(a, eta).effects
    prob = FullProblem(a)
    assert np.min(np.linalg.eigvalsh(f)) > -tol
    assert np.max(np.abs(prob.marginals(f) - target)) < tol


@pytest.fixture(scope="module")
def mub3():
    return mub_symmetry_group(3)


def test_zero_noise_is_compatible(octahedron, mub3):
    for a, s in (octahedron, mub3):
        res = compatibility_oracle(a, 0.0, sym=s)
        assert res.verdict == "compatible"


def test_octahedron_sandwich(octahedron):
    a, s = octahedron
    low = compatibility_oracle(a, 0.55)
    assert low.verdict == "compatible" and not low.reduced
    _check_witness(a, 0.55, low.witness)
    high = compatibility_oracle(a, 0.60)
    assert high.verdict == "incompatible"
    assert abs(high.certificate_bound - 1 / SQ3) < 1e-9


def test_octahedron_sandwich_reduced(octahedron):
    a, s = octahedron
    low = compatibility_oracle(a, 0.55, sym=s)
    assert low.verdict == "compatible" and low.reduced
    _check_witness(a, 0.55, low.witness)


def test_mub3_sandwich(mub3):
    a, s = mub3
    alpha = robustness(a, s).alpha_star
    low = compatibility_oracle(a, alpha - 0.02, sym=s)
    assert low.verdict == "compatible"
    _check_witness(a, alpha - 0.02, low.witness)
    assert compatibility_oracle(a, alpha + 0.02, sym=s).verdict == "incompatible"


def test_monotone_and_weak_duality(octahedron):
    a, s = octahedron
    grid = [0.1, 0.3, 0.45, 0.55, 0.56, 0.59, 0.62, 0.8]
    verdicts = [compatibility_oracle(a, eta, sym=s) for eta in grid]
    seen_incompatible = False
    for res in verdicts:
        if res.verdict == "compatible":
            assert not seen_incompatible
            assert res.eta <= res.certificate_bound + 1e-9
        elif res.verdict == "incompatible":
            seen_incompatible = True
    assert verdicts[0].verdict == "compatible" and verdicts[-1].verdict == "incompatible"


def test_inconclusive_without_certificate(octahedron):
    a, s = octahedron
    res = compatibility_oracle(a, 0.60, sym=s, iter_budget=200, use_certificate=False)
    assert res.verdict == "inconclusive"
    assert res.certificate_bound is None and res.residual > 0


def test_octahedron_reduction(octahedron):
    a, s = octahedron
    prob = reduce_by_symmetry(a, s)
    assert prob.n_variables == 1
    assert len(prob.outcome_reps) == 1


def test_dodecahedron_reduction(dodecahedron):
    a, s = dodecahedron
    prob = reduce_by_symmetry(a, s)
    assert a.bundle.section_count() == 2**10
    assert prob.n_variables == 24
    assert sum(prob.orbit_sizes) == 2**10
    assert len(prob.outcome_reps) == 1 and prob.outcome_weights == [20]


def test_trivial_group_does_not_reduce(octahedron):
    a, _ = octahedron
    g = trivial_group(2)
    act = PermAction(g, np.arange(a.n_outcomes)[None])
    s = SymmetryData(g, act, check_covariance(a.bundle, act)[1])
    assert ReducedProblem(a, s).n_variables == a.bundle.section_count()


def test_symmetrize(octahedron, rng):
    a, s = octahedron
    res = compatibility_oracle(a, 0.5)
    f = res.witness
    sf = symmetrize(a, s, f)
    assert np.allclose(symmetrize(a, s, sf), sf, atol=1e-12)
    _check_witness(a, 0.5, sf)
    # a reduced witness is already symmetric
    red = compatibility_oracle(a, 0.5, sym=s).witness
    assert np.allclose(symmetrize(a, s, red), red, atol=1e-10)
