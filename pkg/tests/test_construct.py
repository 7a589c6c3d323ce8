import numpy as np
import pytest

from symmetra.bundle import check_covariance, check_normalization, check_symmetry, is_rigid, is_uniform
from symmetra.construct import (candidate_stabilizers, construct_assemblages, group_into_measurements,
                                isotypic_projections, orbit_of_projection, platonic_assemblage, spin_projector,
                                verify_covariance_of_grouping)
from symmetra.errors import NoPartition
from symmetra.groups import close_generators, trivial_group
from symmetra.incompat import robustness
from symmetra.io import load_group
from symmetra.numerics import is_projection

from conftest import I2, SX, SY, SZ

CUBE_VERTEX = spin_projector(np.ones(3) / np.sqrt(3))


def _overlap_multiset(effects):
    g = np.real(np.einsum("aij,bji->ab", effects, effects))
    return np.sort(np.round(g.ravel(), 9))


def _all_checks(a, s):
    assert check_normalization(a)[0]
    assert a.min_effect_eigenvalue() >= -1e-9
    assert check_covariance(a.bundle, s.outcome_action)[0]
    assert check_symmetry(a, s)[0]
    assert is_uniform(s)
    assert is_rigid(a, s).rigid


def test_candidate_stabilizers(binary_octahedral, quaternion):
    orders = {c.order for c in candidate_stabilizers(binary_octahedral)}
    assert 8 in orders
    q = candidate_stabilizers(quaternion)
    assert len(q) == 3 and all(c.order == 4 for c in q)
    assert candidate_stabilizers(trivial_group(2)) == []


def test_isotypic_projections(binary_octahedral):
    c4 = close_generators([np.diag([1, 1j])])
    p, q = isotypic_projections(c4, np.arange(4))
    assert {tuple(np.round(np.diag(p).real, 12)), tuple(np.round(np.diag(q).real, 12))} == {(1, 0), (0, 1)}
    assert np.allclose(p + q, I2)
    g = binary_octahedral
    for c in candidate_stabilizers(g):
        if c.order == 8:
            p, q = isotypic_projections(g, c.indices)
            assert is_projection(p) == (True, 1)
            assert np.allclose(p + q, I2)
            # an octahedron axis: Bloch vector along a coordinate direction
            bloch = np.real([np.trace(p @ s) for s in (SX, SY, SZ)])
            assert np.allclose(np.sort(np.abs(bloch)), [0, 0, 1], atol=1e-9)


def test_orbit_of_projection(binary_octahedral):
    g = binary_octahedral
    orbit, stab = orbit_of_projection(g, I2)
    assert len(orbit) == 1 and len(stab) == 48
    orbit, stab = orbit_of_projection(g, (I2 + SZ) / 2)
    assert len(orbit) == 6 and len(stab) == 8
    orbit, stab = orbit_of_projection(g, CUBE_VERTEX)
    assert len(orbit) == 8 and len(orbit) * len(stab) == 48


def test_grouping_examples(binary_octahedral):
    g = binary_octahedral
    oct_orbit, _ = orbit_of_projection(g, (I2 + SZ) / 2)
    bundle, effects, _ = group_into_measurements(oct_orbit)
    assert bundle.fibre_sizes == (2, 2, 2)
    cube_orbit, _ = orbit_of_projection(g, CUBE_VERTEX)
    bundle, effects, _ = group_into_measurements(cube_orbit)
    assert bundle.fibre_sizes == (2, 2, 2, 2)
    trine = np.array([spin_projector([np.cos(t), np.sin(t), 0]) for t in (0, 2 * np.pi / 3, 4 * np.pi / 3)])
    bundle, effects, _ = group_into_measurements(trine, "povm", 3)
    assert bundle.fibre_sizes == (3,)
    assert np.allclose(effects, 2 / 3 * trine)
    with pytest.raises(NoPartition):
        group_into_measurements(trine, "projective")


def test_grouping_covariance(binary_octahedral, binary_icosahedral):
    orbit, _ = orbit_of_projection(binary_octahedral, (I2 + SZ) / 2)
    bundle, effects, _ = group_into_measurements(orbit)
    ok, sym = verify_covariance_of_grouping(bundle, effects, binary_octahedral)
    assert ok and sym.outcome_action.n_points == 6
    dodec = platonic_assemblage("dodecahedron")
    ok, _ = verify_covariance_of_grouping(dodec.bundle, dodec.effects, binary_icosahedral)
    assert ok
    # pairing non-antipodal vertices is not even a measurement
    from symmetra.bundle import Assemblage
    mixed = Assemblage(bundle, orbit[[0, 2, 1, 4, 3, 5]])
    assert not check_normalization(mixed)[0]


def test_construct_binary_octahedral(binary_octahedral):
    res = construct_assemblages(binary_octahedral)
    assert sorted({c.n_measurements for c in res.assemblages}) == [3, 4, 6]
    for c in res.assemblages:
        _all_checks(c.assemblage, c.symmetry)
    for solid, m in (("octahedron", 3), ("cube", 4), ("cuboctahedron", 6)):
        ref = platonic_assemblage(solid)
        c = next(c for c in res.assemblages if c.n_measurements == m)
        assert np.allclose(_overlap_multiset(c.assemblage.effects), _overlap_multiset(ref.effects), atol=1e-8)


def test_construct_binary_icosahedral(binary_icosahedral):
    res = construct_assemblages(binary_icosahedral)
    assert sorted({c.n_measurements for c in res.assemblages}) == [6, 10, 15]
    for solid, m in (("icosahedron", 6), ("dodecahedron", 10), ("icosidodecahedron", 15)):
        ref = platonic_assemblage(solid)
        c = next(c for c in res.assemblages if c.n_measurements == m)
        assert np.allclose(_overlap_multiset(c.assemblage.effects), _overlap_multiset(ref.effects), atol=1e-8)


def test_construct_is_deterministic(binary_octahedral):
    a = construct_assemblages(binary_octahedral)
    b = construct_assemblages(binary_octahedral)
    assert [c.n_measurements for c in a.assemblages] == [c.n_measurements for c in b.assemblages]
    for x, y in zip(a.assemblages, b.assemblages):
        assert np.array_equal(x.assemblage.effects, y.assemblage.effects)


@pytest.mark.parametrize("n, expected", [(3, {4}), (4, {2, 3})])
def test_construct_povm_st8(n, expected):
    res = construct_assemblages(load_group("st8"), "povm", n)
    assert {c.n_measurements for c in res.assemblages if c.generator.rank == 1} == expected
    for c in res.assemblages:
        assert check_normalization(c.assemblage)[0]
        _all_checks(c.assemblage, c.symmetry)


def test_construct_st25_gives_mubs():
    res = construct_assemblages(load_group("st25"))
    mubs = [c for c in res.assemblages if c.n_measurements == 4]
    assert mubs
    c = mubs[0]
    _all_checks(c.assemblage, c.symmetry)
    rep = robustness(c.assemblage, c.symmetry)
    assert rep.alpha_star == pytest.approx((1 + 3 * np.sqrt(5)) / 16, abs=1e-9)
    assert rep.beta_star == pytest.approx(1, abs=1e-9)
