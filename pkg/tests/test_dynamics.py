import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import spaces
from ghdyn.dynamics import (
    SelfMapSystem,
    c0_distance,
    gh0_distance,
    identity_system,
    is_local_conjugacy,
    pgh0_distance,
    restricted_c0,
    theorem_pointed_checks,
)
from ghdyn.errors import DomainEscape, NonInvertible, NonInvertibleNegativeOffset, SpaceMismatch
from ghdyn.gh import MapTable, gh_exact
from ghdyn.metric import PointSet, diameter
from ghdyn.systems import (
    circle_step,
    doubling_map,
    make_circle,
    rotation,
    singleton,
    torus_automorphism,
    two_point_family,
)


@st.composite
def systems(draw, max_size=4, pointed=True):
    X = draw(spaces(max_size=max_size))
    n = len(X)
    img = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    bp = draw(st.integers(0, n - 1)) if pointed else None
    return SelfMapSystem(X, img, bp)


def test_selfmap_basics():
    f = rotation(6, 2)
    assert f.bijective and len(f) == 6
    assert list(f.power(-1)) == [4, 5, 0, 1, 2, 3]
    assert list(f.power(3)) == [0, 1, 2, 3, 4, 5]
    T = f.orbit_table(-2, 2)
    assert T.shape == (5, 6)
    for k, n in enumerate(range(-2, 3)):
        assert (T[k] == f.power(n)).all()
    assert f.lipschitz_constant() == pytest.approx(1)


def test_selfmap_noninvertible():
    f = doubling_map(8)
    assert not f.bijective
    with pytest.raises(NonInvertible):
        f.inverse()
    with pytest.raises(NonInvertibleNegativeOffset):
        f.orbit_table(-1, 2)
    with pytest.raises(NonInvertible):
        SelfMapSystem(make_circle(4), [0, 0, 1, 2], bijective=True)
    with pytest.raises(SpaceMismatch):
        SelfMapSystem(make_circle(4), [0, 1, 2])


@given(systems(max_size=5))
def test_orbit_table_composes(f):
    T = f.orbit_table(0, 4)
    for k in range(4):
        assert (T[k + 1] == f.image[T[k]]).all()


def test_c0_examples():
    X = make_circle(12)
    assert c0_distance(rotation(12, 0), rotation(12, 3)) == pytest.approx(3 * circle_step(12))
    assert c0_distance(rotation(12, 5), rotation(12, 5)) == 0
    f = torus_automorphism(16)
    g = torus_automorphism(16, shift=(1, 0))
    assert c0_distance(f, g) == pytest.approx(circle_step(16))
    with pytest.raises(SpaceMismatch):
        c0_distance(rotation(12), rotation(8))
    assert X is rotation(12).space


def test_gh0_isometric_conjugates():
    # conjugating a rotation by a reflection gives the inverse rotation
    f, g = rotation(7, 2), rotation(7, -2)
    assert gh0_distance(f, g).upper == 0


def test_gh0_identities_equal_gh():
    X = make_circle(4)
    Y = make_circle(3)
    v = gh0_distance(identity_system(X), identity_system(Y)).upper
    assert v == pytest.approx(gh_exact(X, Y))


def test_gh0_versus_point():
    f = rotation(5, 1)
    pt = identity_system(singleton().space)
    assert gh0_distance(f, pt).upper == pytest.approx(diameter(f.space))


@settings(max_examples=30)
@given(systems(max_size=3, pointed=False), systems(max_size=3, pointed=False))
def test_gh0_matches_bruteforce(f, g):
    want = oracles.gh0(f.space.dist.tolist(), f.image.tolist(), g.space.dist.tolist(), g.image.tolist())
    assert gh0_distance(f, g).upper == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 7])
def test_pgh0_two_point(n):
    P = two_point_family(n)
    f = SelfMapSystem(P.space, [0, 0], 0)
    g = identity_system(singleton().space, 0)
    r = pgh0_distance(f, g)
    assert r.upper == pytest.approx(1 / n)
    assert pgh0_distance(g, f).upper == r.upper


def test_pgh0_swap_two_point_is_far():
    P = two_point_family(4)
    f = SelfMapSystem(P.space, [1, 0], 0)
    g = identity_system(singleton().space, 0)
    assert pgh0_distance(f, g).upper > 0.5


@settings(max_examples=25)
@given(systems(max_size=3), systems(max_size=3))
def test_pgh0_matches_bruteforce(f, g):
    want = oracles.pgh(
        f.space.dist.tolist(), f.basepoint, g.space.dist.tolist(), g.basepoint, f.image.tolist(), g.image.tolist()
    )
    assert pgh0_distance(f, g).upper == pytest.approx(want, abs=1e-12)


@settings(max_examples=40)
@given(systems(max_size=4), st.permutations(range(4)), st.data())
def test_pgh0_zero_iff_isometric_conjugacy(f, perm, data):
    n = len(f)
    if data.draw(st.booleans()):
        # relabelled copy: always conjugate
        p = np.array([v for v in perm if v < n])
        inv = np.argsort(p)
        from ghdyn.metric import FiniteMetricSpace

        Y = FiniteMetricSpace(f.space.labels, f.space.dist[np.ix_(inv, inv)])
        g = SelfMapSystem(Y, p[f.image[inv]], int(p[f.basepoint]))
    else:
        g = data.draw(systems(max_size=4))
    zero = pgh0_distance(f, g).upper == 0
    conj = oracles.pointed_isometric_conjugacy(
        f.space.dist.tolist(), f.basepoint, f.image.tolist(), g.space.dist.tolist(), g.basepoint, g.image.tolist()
    )
    assert zero == conj


def test_pgh0_explicit_maps_give_upper_bound():
    f = rotation(6, 1)
    r = pgh0_distance(f, f, maps=(np.arange(6)[None], np.arange(6)[None]))
    assert r.upper == 0


def test_local_conjugacy():
    f = rotation(8, 1)
    g = rotation(8, 1)
    h = MapTable((np.arange(8) + 3) % 8, 8)
    U = PointSet.whole(f.space)
    chk = is_local_conjugacy(h, f, g, U, U, isometric=True)
    assert chk.valid and chk.defect == 0 and chk.isometric_ok

    const = MapTable([0] * 8, 8)
    chk = is_local_conjugacy(const, f, g, U)
    assert chk.defect == pytest.approx(circle_step(8)) and not chk.valid

    partial = MapTable([0, 1, 2, -1, -1, -1, -1, -1], 8, partial=True)
    with pytest.raises(DomainEscape):
        is_local_conjugacy(partial, f, g, PointSet(f.space, [1, 2]))
    assert is_local_conjugacy(partial, f, g, PointSet(f.space, [0, 1])).defect == 0


def test_restricted_c0():
    f, g = rotation(10, 0), rotation(10, 1)
    assert restricted_c0(f, g, 0) == pytest.approx(circle_step(10))


@settings(max_examples=20)
@given(systems(max_size=3), st.data())
def test_pointed_items_on_shared_space(f, data):
    n = len(f)
    img = data.draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    g = SelfMapSystem(f.space, img, f.basepoint)
    out = theorem_pointed_checks(f, g)
    for key in ("1", "2", "4", "6"):
        assert out[key]["ok"] is True, (key, out[key])
    assert out["5"]["ok"] is None


def test_pointed_items_triangle():
    f = rotation(5, 1)
    g = rotation(5, 1)
    h = rotation(5, 1)
    out = theorem_pointed_checks(f, g, third=h)
    assert out["5"]["ok"] is True and out["5"]["d13"] == 0
