import pytest

from incred import load_fixture

_CACHE = {}


def _fixture(name):
    if name not in _CACHE:
        _CACHE[name] = load_fixture(name)
    return _CACHE[name]


@pytest.fixture(scope="session")
def example1():
    return _fixture("example1")


@pytest.fixture(scope="session")
def example2():
    return _fixture("example2")


@pytest.fixture(scope="session")
def example2_baseline():
    return _fixture("example2_baseline")


@pytest.fixture(scope="session")
def example3():
    return _fixture("example3")


@pytest.fixture(scope="session")
def example4():
    return _fixture("example4")


@pytest.fixture(scope="session")
def example5():
    return _fixture("example5")


@pytest.fixture(scope="session")
def example6():
    return _fixture("example6")


@pytest.fixture(scope="session")
def trivial_zero():
    return _fixture("trivial_zero")


# Deterministic probe points for gradient validation, per fixture function.
# On-kink probes sit exactly on guard surfaces (where the declared box is a
# hull of the adjacent slopes); all other probes keep a safety margin of at
# least ten sampling radii from every kink.

KINK_RADIUS = 1e-3     # piecewise-affine functions: any radius works
SMOOTH_RADIUS = 1e-5   # curved functions: keep curvature error under 1e-4

PROBES_1D = [(-3.0,), (-2.5,), (-2.0,), (-1.5,), (-1.2,), (-1.0,), (-0.75,),
             (-0.5,), (-0.25,), (0.0,), (0.1,), (0.25,), (0.5,), (0.75,),
             (1.0,), (1.2,), (1.5,), (2.0,), (2.5,), (3.0,)]

PROBES_SQUARE_RAMP = [
    (0.0, 0.0), (0.5, 0.5), (-0.5, 0.3), (0.2, -0.7), (-0.4, -0.4),
    (1.0, 0.0), (1.0, 0.5), (-1.0, 0.5), (0.5, 1.0), (0.5, -1.0),
    (1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0),
    (1.5, 0.5), (0.5, 1.5), (2.0, 0.0), (0.0, 2.0), (1.5, 1.5), (-2.0, -2.0),
]

PROBES_SQUARE_PYRAMID = [
    (0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.2), (-0.6, 0.2),
    (0.3, 0.3), (-0.5, -0.5), (0.5, -0.5),
    (1.0, 0.0), (1.0, 0.5), (0.5, 1.0), (0.0, -1.0),
    (1.0, 1.0), (-1.0, 1.0),
    (1.5, 0.5), (0.5, 1.5), (2.0, 0.0), (1.0, 2.0), (2.0, 1.0), (1.5, 1.5),
]

PROBES_SMOOTH_2D = [
    (0.0, 0.0), (0.5, 0.5), (-0.5, 0.5), (0.5, -0.5), (-0.5, -0.5),
    (1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (-1.0, -1.0), (2.0, 0.0),
    (0.0, 2.0), (2.0, 2.0), (-2.0, 1.0), (1.3, -0.7), (-1.7, 0.4),
    (0.1, 0.1), (0.9, -1.8), (-0.3, 1.6), (1.5, 1.5), (-2.0, -2.0),
]
