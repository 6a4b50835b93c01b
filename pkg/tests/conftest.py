import pytest

from src.fields import plane_box, torus
from src.fixtures import circle_decomposition, thickened_arcs
from src.geometry import MarkedBoundary, make_square, make_unit_disc
from src.solver import quick_schedule


@pytest.fixture
def box():
    """Boîte [-1, 1]² à 64 cellules (h = 1/32)."""
    return plane_box((-1.0, -1.0), (1.0, 1.0), 64)


@pytest.fixture
def small_torus():
    return torus((1.0, 1.0), 32)


@pytest.fixture
def unit_square():
    return make_square(1.0)


@pytest.fixture
def square_datum(unit_square):
    """p1=(0,1), p2=(0,0), p3=(1,0), p4=(1,1)."""
    return MarkedBoundary(unit_square, ((0.0, 1.0), (0.0, 0.0), (1.0, 0.0), (1.0, 1.0)))


@pytest.fixture
def ball_datum():
    return MarkedBoundary.from_fractions(make_unit_disc('ball'), [0.0, 1.0 / 3.0, 2.0 / 3.0])


@pytest.fixture
def pb_datum():
    return MarkedBoundary.from_fractions(make_unit_disc('pb'), [0.0, 1.0 / 3.0, 2.0 / 3.0])


@pytest.fixture
def triple():
    return circle_decomposition(64)


@pytest.fixture
def quad():
    return thickened_arcs(4, 64)


@pytest.fixture
def schedule():
    return quick_schedule(max_iterations=20, plateau_window=10)

