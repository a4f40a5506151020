import numpy as np
import pytest

from ghdyn.metric import validate_metric
from ghdyn.systems import (
    circle_step,
    conjugating_shift,
    doubling_map,
    line_space,
    make_circle,
    make_torus,
    random_system,
    rotation,
    torus_automorphism,
    torus_cell,
    torus_translation,
    truncated_line,
    two_lobe_entry,
    two_lobe_limit,
    two_point_family,
)


def test_circle_distances():
    X = make_circle(8)
    s = circle_step(8)
    assert X.dist[0, 1] == pytest.approx(s)
    assert X.dist[0, 4] == pytest.approx(np.pi)
    assert X.dist[1, 7] == pytest.approx(2 * s)
    with pytest.raises(ValueError):
        make_circle(2)


def test_doubling_and_rotation():
    f = doubling_map(8)
    assert list(f.image) == [0, 2, 4, 6, 0, 2, 4, 6]
    assert not f.bijective
    assert doubling_map(9).bijective
    assert list(rotation(5, 2).image) == [2, 3, 4, 0, 1]


def test_torus_layout():
    N = 6
    T = make_torus(N)
    s = circle_step(N)
    assert T.dist[torus_cell(N, 0, 0), torus_cell(N, 1, 3)] == pytest.approx(3 * s)
    assert T.dist[torus_cell(N, 0, 0), torus_cell(N, 5, 1)] == pytest.approx(s)
    assert torus_cell(N, -1, 7) == 5 * N + 1


def test_torus_automorphism_values():
    N = 7
    f = torus_automorphism(N)
    assert f(torus_cell(N, 1, 0)) == torus_cell(N, 2, 1)
    assert f(torus_cell(N, 0, 1)) == torus_cell(N, 1, 1)
    g = torus_automorphism(N, shift=(1, 0))
    assert g(0) == torus_cell(N, 1, 0)


@pytest.mark.parametrize("N", [3, 4, 8, 16])
def test_torus_automorphism_inverse_exhaustive(N):
    f = torus_automorphism(N)
    inv = f.inverse().image
    assert (inv[f.image] == np.arange(N * N)).all()
    a, b = np.divmod(np.arange(N * N), N)
    # inverse matrix ((1, -1), (-1, 2))
    assert (inv == ((a - b) % N) * N + (2 * b - a) % N).all()


@pytest.mark.parametrize("v", [(1, 0), (0, 1), (2, 3)])
def test_conjugating_shift(v):
    N = 8
    f = torus_automorphism(N)
    g = torus_automorphism(N, shift=v)
    h = torus_translation(N, conjugating_shift(v))
    assert (f.image[h.image] == h.image[g.image]).all()


def test_small_families():
    P = two_point_family(3)
    assert P.space.dist[0, 1] == 3 and P.basepoint == 0
    L = truncated_line(2, 0.5)
    assert len(L.space) == 9 and L.basepoint == 4
    assert line_space([0, 2]).dist[0, 1] == 2
    with pytest.raises(ValueError):
        truncated_line(1, 2)


def test_two_lobe_family():
    L = two_lobe_limit()
    assert len(L.space) == 7 and L.basepoint == 3
    P, i, f = two_lobe_entry(4)
    assert len(P.space) == 8
    assert P.space.dist[3, 4] == pytest.approx(0.25)
    assert i(3) == i(4) == 3
    assert f(3) != f(4)


def test_generated_spaces_are_metrics():
    rng = np.random.default_rng(3)
    for X in (make_circle(9), make_torus(4), random_system(rng, 7).space, line_space([0, 0.3, 1.7])):
        validate_metric(X.dist, labels=X.labels)
