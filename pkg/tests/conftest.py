import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from ghdyn.metric import FiniteMetricSpace, PointedSpace

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def euclidean(points):
    p = np.asarray(points, dtype=float)
    return FiniteMetricSpace([str(k) for k in range(len(p))], np.sqrt(((p[:, None] - p[None]) ** 2).sum(-1)))


coords = st.tuples(st.integers(0, 20), st.integers(0, 20))


@st.composite
def spaces(draw, min_size=1, max_size=4, scale=0.1):
    pts = draw(st.lists(coords, min_size=min_size, max_size=max_size, unique=True))
    return euclidean(np.array(pts) * scale)


@st.composite
def pointed_spaces(draw, min_size=1, max_size=4, scale=0.1):
    X = draw(spaces(min_size, max_size, scale))
    return PointedSpace(X, (draw(st.integers(0, len(X) - 1)),))


@pytest.fixture
def path5():
    k = np.arange(5)
    return FiniteMetricSpace([str(v) for v in k], np.abs(k[:, None] - k[None]).astype(float))
