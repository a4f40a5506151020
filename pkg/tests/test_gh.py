import itertools
import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import spaces
from ghdyn.errors import EnumerationBudgetExceeded, NotAnApproximation, SizeMismatch
from ghdyn.gh import (
    MapTable,
    distortion,
    distortion_on,
    eps_inverse,
    gh_exact,
    gh_exact_witness,
    gh_hat_exact,
    gh_sandwich,
    gh_upper,
    is_gha,
    round_trip_defects,
)
from ghdyn.metric import PointSet, diameter, validate_metric
from ghdyn.systems import random_space

TWO = validate_metric([[0, 1], [1, 0]])
TWO_WIDE = validate_metric([[0, 2], [2, 0]])
PATH3 = validate_metric([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
PT = validate_metric([[0]])


def test_maptable_basics():
    m = MapTable([1, 0, 1], 2)
    assert m.dom_size == 3 and m.cod_size == 2 and m(0) == 1
    assert MapTable.identity(3).compose(MapTable([2, 1, 0], 3)) == MapTable([2, 1, 0], 3)
    assert MapTable([1, 0], 2).compose(m) == MapTable([0, 1, 0], 2)
    with pytest.raises(ValueError):
        MapTable([2], 2)
    with pytest.raises(SizeMismatch):
        m.compose(m)


def test_distortion_examples():
    assert distortion(MapTable.identity(3), PATH3, PATH3) == 0
    assert distortion(MapTable([0, 0], 2), TWO, TWO) == 1
    assert distortion(MapTable([0, 0, 1], 2), PATH3, TWO) == 1
    with pytest.raises(SizeMismatch):
        distortion(MapTable([0, 0], 2), PATH3, TWO)


def test_distortion_on_examples():
    i = MapTable([0, 0, 1], 2)
    assert distortion_on(i, PATH3, TWO, [1]) == 0
    assert distortion_on(i, PATH3, TWO, PointSet.whole(PATH3)) == distortion(i, PATH3, TWO)
    # 1 -> a, 2 -> b keeps d = 1; the pair {0, 1} is collapsed instead
    assert distortion_on(i, PATH3, TWO, PointSet(PATH3, [1, 2])) == 0
    assert distortion_on(i, PATH3, TWO, PointSet(PATH3, [0, 1])) == 1


def test_is_gha_examples():
    assert is_gha(MapTable.identity(3), PATH3, PATH3, 1e-3).valid
    c = is_gha(MapTable([0, 0], 2), TWO, TWO, 0.5)
    assert not c.valid and not c.surjectivity_ok
    assert ("uncovered", 1) in c.witnesses
    assert c.measured_covering_radius == 1
    assert is_gha(MapTable([0, 0], 1), TWO, PT, 1.1).valid


def test_eps_inverse_examples():
    perm = MapTable([2, 0, 1], 3)
    # relabelled copy of PATH3 so that perm is an isometry onto it
    Y = validate_metric(PATH3.dist[np.argsort(perm.image)][:, np.argsort(perm.image)])
    assert distortion(perm, PATH3, Y) == 0
    inv = eps_inverse(perm, PATH3, Y, 1e-3)
    assert inv.compose(perm) == MapTable.identity(3)
    assert round_trip_defects(perm, inv, PATH3, Y) == (0.0, 0.0)

    i = MapTable([0, 0], 1)
    ip = eps_inverse(i, TWO, PT, 1.1)
    assert ip == MapTable([0], 2)
    a, b = round_trip_defects(i, ip, TWO, PT)
    assert a <= diameter(TWO) <= 3 * 1.1 and b == 0

    with pytest.raises(NotAnApproximation):
        eps_inverse(MapTable([0, 0], 2), TWO, TWO, 0.5)


def test_gh_exact_examples():
    assert gh_exact(PATH3, PATH3) == 0
    assert gh_exact(PATH3, PT) == diameter(PATH3)
    # brute force over the 4 + 4 maps: identity has distortion 1, constant maps cost 2
    assert gh_exact(TWO, TWO_WIDE) == 1.0
    assert gh_exact(TWO, TWO_WIDE) == oracles.gh(TWO.dist.tolist(), TWO_WIDE.dist.tolist())


def test_gh_exact_witness_certifies():
    rng = np.random.default_rng(3)
    X, Y = random_space(rng, 4), random_space(rng, 3)
    v, i, j = gh_exact_witness(X, Y)
    assert is_gha(i, X, Y, v).valid and is_gha(j, Y, X, v).valid


def test_gh_exact_budget():
    X = random_space(np.random.default_rng(0), 6)
    with pytest.raises(EnumerationBudgetExceeded) as exc:
        gh_exact(X, X, max_enum=1000)
    assert exc.value.needed == 2 * 6**6


def test_gh_upper_examples():
    rng = np.random.default_rng(11)
    X = random_space(rng, 7)
    assert gh_upper(X, X, restarts=1) == 0
    assert gh_upper(X, PT) == diameter(X)
    assert gh_upper(PT, X) == diameter(X)


def test_gh_upper_bounds_exact_on_six_points():
    rng = np.random.default_rng(2024)
    for _ in range(5):
        X, Y = random_space(rng, 6), random_space(rng, 6)
        assert gh_upper(X, Y, restarts=8, seed=1) >= gh_exact(X, Y) - 1e-9


def test_gh_upper_is_deterministic():
    rng = np.random.default_rng(5)
    X, Y = random_space(rng, 6), random_space(rng, 5)
    assert gh_upper(X, Y, seed=3) == gh_upper(X, Y, seed=3)


def test_gh_hat_examples():
    assert gh_hat_exact(PATH3, PATH3) == 0
    assert gh_hat_exact(PATH3, PT) == diameter(PATH3) / 2
    with pytest.raises(EnumerationBudgetExceeded):
        gh_hat_exact(PATH3, PATH3, max_enum=100)


@given(spaces(max_size=3), spaces(max_size=3))
def test_gh_hat_matches_all_correspondences(X, Y):
    assert gh_hat_exact(X, Y) == pytest.approx(oracles.gh_hat(X.dist.tolist(), Y.dist.tolist()), abs=1e-12)


@given(spaces(max_size=4), spaces(max_size=4))
def test_gh_exact_matches_pair_enumeration(X, Y):
    assert gh_exact(X, Y) == pytest.approx(oracles.gh(X.dist.tolist(), Y.dist.tolist()), abs=1e-12)


@given(spaces(max_size=4), spaces(max_size=4))
def test_gh_exact_symmetric_and_reflexive(X, Y):
    assert gh_exact(X, Y) == gh_exact(Y, X)
    assert gh_exact(X, X) == 0


def test_sandwich_report(caplog):
    rng = np.random.default_rng(8)
    X, Y = random_space(rng, 3), random_space(rng, 4)
    rep = gh_sandwich(X, Y)
    assert rep.gh == gh_exact(X, Y) and rep.gh_hat == gh_hat_exact(X, Y)
    assert rep.holds


@given(spaces(min_size=1, max_size=5), spaces(min_size=1, max_size=4), st.data())
def test_distortion_zero_iff_isometric_embedding(X, Y, data):
    img = data.draw(st.lists(st.integers(0, len(Y) - 1), min_size=len(X), max_size=len(X)))
    i = MapTable(img, len(Y))
    iso = all(
        abs(Y.dist[img[a], img[b]] - X.dist[a, b]) <= 1e-12 for a, b in itertools.product(range(len(X)), repeat=2)
    )
    assert (distortion(i, X, Y) <= 1e-12) == iso
    sub = data.draw(st.lists(st.integers(0, len(X) - 1), max_size=len(X)))
    assert distortion_on(i, X, Y, sub) <= distortion(i, X, Y)
