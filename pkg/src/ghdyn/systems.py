"""Example spaces and self-maps: circles, tori, the two-point family, line samples.

Generated spaces satisfy the metric axioms by construction and skip the
cubic-time validation.  Grid dynamics are exact integer maps.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .dynamics import SelfMapSystem
from .gh import MapTable
from .metric import FiniteMetricSpace, PointedSpace


def _circle_steps(N: int) -> np.ndarray:
    k = np.arange(N)
    diff = np.abs(k[:, None] - k[None, :])
    return np.minimum(diff, N - diff)


@lru_cache(maxsize=32)
def make_circle(N: int) -> FiniteMetricSpace:
    """``N`` equally spaced points on the circle of length ``2 pi`` with arclength."""
    if N < 3:
        raise ValueError("a circle needs at least 3 points")
    return FiniteMetricSpace([str(k) for k in range(N)], _circle_steps(N) * (2 * np.pi / N))


def circle_step(N: int) -> float:
    return 2 * np.pi / N


def doubling_map(N: int) -> SelfMapSystem:
    """``k -> 2k mod N``; a bijection only for odd ``N``."""
    img = (2 * np.arange(N)) % N
    return SelfMapSystem(make_circle(N), img, basepoint=0)


def rotation(N: int, shift: int = 1) -> SelfMapSystem:
    return SelfMapSystem(make_circle(N), (np.arange(N) + shift) % N, basepoint=0)


@lru_cache(maxsize=8)
def make_torus(N: int) -> FiniteMetricSpace:
    """``N x N`` grid on the flat torus with the max of the two arclength metrics.

    Cell ``(a, b)`` has index ``a * N + b``.
    """
    if N < 3:
        raise ValueError("a torus needs N >= 3")
    c = _circle_steps(N)
    d = np.maximum(c[:, None, :, None], c[None, :, None, :]).reshape(N * N, N * N)
    labels = [f"{a},{b}" for a in range(N) for b in range(N)]
    return FiniteMetricSpace(labels, d * (2 * np.pi / N))


def torus_cell(N: int, a: int, b: int) -> int:
    return (a % N) * N + (b % N)


def torus_automorphism(N: int, shift=(0, 0)) -> SelfMapSystem:
    """``(a, b) -> (2a + b, a + b) + shift  mod N``; a bijection for every ``N``."""
    a, b = np.divmod(np.arange(N * N), N)
    img = ((2 * a + b + shift[0]) % N) * N + (a + b + shift[1]) % N
    return SelfMapSystem(make_torus(N), img, basepoint=0, bijective=True)


def torus_translation(N: int, c) -> MapTable:
    a, b = np.divmod(np.arange(N * N), N)
    return MapTable(((a + c[0]) % N) * N + (b + c[1]) % N, N * N)


def conjugating_shift(v) -> tuple[int, int]:
    """``c`` with ``T_A(q + c) = T_A(q) + v + c``, i.e. ``c = (A - I)^-1 v``."""
    return (v[1], v[0] - v[1])


def singleton() -> PointedSpace:
    return PointedSpace(FiniteMetricSpace(["0"], [[0.0]]), (0,))


def two_point_family(n: float) -> PointedSpace:
    """``({0, n}, 0)``."""
    if n <= 0:
        raise ValueError("n must be positive")
    return PointedSpace(FiniteMetricSpace(["0", str(n)], [[0.0, n], [n, 0.0]]), (0,))


def truncated_line(R: float, step: float) -> PointedSpace:
    """Samples of ``[-R, R]`` at spacing ``step`` with basepoint 0."""
    if not 0 < step <= R:
        raise ValueError("need 0 < step <= R")
    k = int(np.floor(R / step + 1e-9))
    xs = np.arange(-k, k + 1) * step
    return PointedSpace(line_space(xs), (k,))


def line_space(xs) -> FiniteMetricSpace:
    xs = np.asarray(xs, dtype=float)
    return FiniteMetricSpace([f"{v:g}" for v in xs], np.abs(xs[:, None] - xs[None, :]))


def random_space(rng: np.random.Generator, n: int, dim: int = 2, scale: float = 1.0) -> FiniteMetricSpace:
    """``n`` uniform points in ``[0, scale]^dim`` with the Euclidean metric."""
    pts = rng.random((n, dim)) * scale
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    return FiniteMetricSpace([str(i) for i in range(n)], d)


def random_pointed(rng: np.random.Generator, n: int, scale: float = 1.0) -> PointedSpace:
    return PointedSpace(random_space(rng, n, scale=scale), (int(rng.integers(n)),))


def random_system(rng: np.random.Generator, n: int, scale: float = 1.0, pointed: bool = False) -> SelfMapSystem:
    X = random_space(rng, n, scale=scale)
    bp = int(rng.integers(n)) if pointed else None
    return SelfMapSystem(X, rng.integers(n, size=n), basepoint=bp)


# --- two-lobe family ------------------------------------------------------------------

LOBE_POSITIONS = (-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0)


def two_lobe_limit() -> PointedSpace:
    """Seven points on a line: a left lobe, the midpoint 0 and a right lobe."""
    return PointedSpace(line_space(LOBE_POSITIONS), (3,))


def two_lobe_entry(k: int):
    """Stage ``k``: the midpoint splits into two points ``1/k`` apart.

    Returns ``(space, i_k, f_k)`` where ``i_k`` collapses the pair onto the
    limit midpoint and ``f_k`` sends the two halves to opposite lobe ends,
    fixing everything else.
    """
    h = 0.5 / k
    xs = [-3.0, -2.0, -1.0, -h, h, 1.0, 2.0, 3.0]
    P = PointedSpace(line_space(xs), (3,))
    i = MapTable([0, 1, 2, 3, 3, 4, 5, 6], 7)
    f = MapTable([0, 1, 2, 0, 7, 5, 6, 7], 8)
    return P, i, f
