import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import spaces
from ghdyn.errors import (
    AsymmetricMatrix,
    DuplicatePoints,
    EmptySet,
    NegativeDistance,
    NonzeroDiagonal,
    NotSquare,
    TriangleViolation,
)
from ghdyn.metric import PointSet, PointedSpace, ball, diameter, hausdorff, tube, validate_metric


def test_validate_singleton_and_pair():
    assert len(validate_metric([[0]])) == 1
    X = validate_metric([[0, 1], [1, 0]])
    assert X.d(0, 1) == 1.0
    assert X.labels == ("0", "1")


def test_triangle_violation_witness():
    with pytest.raises(TriangleViolation) as exc:
        validate_metric([[0, 1, 3], [1, 0, 1], [3, 1, 0]])
    assert exc.value.witness == (0, 2, 1)
    assert exc.value.excess == pytest.approx(1.0)


@pytest.mark.parametrize(
    "matrix, err",
    [
        ([[0, 1, 2]], NotSquare),
        ([[0, -1], [-1, 0]], NegativeDistance),
        ([[1, 1], [1, 0]], NonzeroDiagonal),
        ([[0, 1], [2, 0]], AsymmetricMatrix),
        ([[0, 0], [0, 0]], DuplicatePoints),
        ([[0, np.nan], [np.nan, 0]], NegativeDistance),
    ],
)
def test_validate_rejects(matrix, err):
    with pytest.raises(err):
        validate_metric(matrix)


def test_triangle_within_tolerance_accepted():
    validate_metric([[0, 1, 2 + 5e-10], [1, 0, 1], [2 + 5e-10, 1, 0]])


def test_space_is_immutable(path5):
    with pytest.raises(ValueError):
        path5.dist[0, 1] = 7
    with pytest.raises(AttributeError):
        path5.tol = 0.1


def test_ball_examples(path5):
    X = validate_metric([[0, 1], [1, 0]])
    assert ball(X, 0, 0.5).members == (0,)
    assert ball(X, 0, 2).members == (0, 1)
    assert ball(path5, 2, 1.5).members == (1, 2, 3)
    # open ball: radius exactly 1 excludes the neighbours
    assert ball(path5, 2, 1.0).members == (2,)


def test_tube_examples(path5):
    whole = PointSet.whole(path5)
    assert tube(path5, whole, 0.1) == whole
    P3 = path5.subspace([0, 1, 2])
    assert tube(P3, PointSet(P3, [0]), 1.5).members == (0, 1)
    assert len(tube(P3, PointSet(P3), 1.0)) == 0


def test_hausdorff_examples(path5):
    A = PointSet(path5, [0, 2])
    assert hausdorff(path5, A, A) == 0
    two = validate_metric([[0, 1], [1, 0]])
    assert hausdorff(two, PointSet(two, [0]), PointSet(two, [1])) == 1
    line = path5.subspace([0, 1, 2])
    assert hausdorff(line, PointSet(line, [0, 2]), PointSet(line, [1])) == 1
    with pytest.raises(EmptySet):
        hausdorff(line, PointSet(line), A)


def test_diameter_examples(path5):
    assert diameter(validate_metric([[0]])) == 0
    assert diameter(validate_metric([[0, 1], [1, 0]])) == 1
    assert diameter(path5) == 4


def test_pointset_and_pointed_space(path5):
    S = PointSet(path5, [3, 1, 3])
    assert S.members == (1, 3) and 3 in S and 2 not in S
    assert S.issubset(PointSet(path5, [1, 2, 3]))
    with pytest.raises(IndexError):
        PointSet(path5, [5])
    P = PointedSpace(path5, [0, 4])
    assert not P.single and P.basepoint == 0
    with pytest.raises(ValueError):
        PointedSpace(path5, [])


@st.composite
def subset_triples(draw):
    X = draw(spaces(min_size=1, max_size=6))
    sub = st.lists(st.integers(0, len(X) - 1), min_size=1, max_size=len(X))
    return X, [PointSet(X, draw(sub)) for _ in range(3)]


@given(subset_triples())
def test_hausdorff_is_pseudometric(data):
    X, (A, B, C) = data
    tol = 1e-12
    assert hausdorff(X, A, B) == hausdorff(X, B, A)
    assert hausdorff(X, A, A) == 0
    assert hausdorff(X, A, C) <= hausdorff(X, A, B) + hausdorff(X, B, C) + tol
    assert hausdorff(X, A, B) <= diameter(X)


@given(subset_triples(), st.floats(0.01, 2), st.floats(0.01, 2))
def test_tube_monotone(data, e1, e2):
    X, (A, _, _) = data
    lo, hi = sorted((e1, e2))
    assert tube(X, A, lo).issubset(tube(X, A, hi))
    assert A.issubset(tube(X, A, lo))


@given(spaces(min_size=2, max_size=6))
def test_validate_accepts_euclidean(X):
    Y = validate_metric(X.dist)
    assert np.array_equal(Y.dist, X.dist)
