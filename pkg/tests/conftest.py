import numpy as np
import pytest

from fleetroute.model import Instance, Order, TravelMatrix, VehicleSpec, travel_matrix_from_coords


@pytest.fixture
def small_instance() -> Instance:
    """Three delivery orders around a depot, one roomy truck."""
    coords = [(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)]
    orders = (
        Order(id="a", node=1, wd=10, dd=10),
        Order(id="b", node=2, wd=10, dd=10),
        Order(id="c", node=3, wd=10, dd=10),
    )
    fleet = (VehicleSpec(id="t1", W=100, D=100),)
    return Instance(name="small", orders=orders, fleet=fleet,
                    travel=travel_matrix_from_coords(coords), coords=tuple(coords))


@pytest.fixture
def asym_travel() -> TravelMatrix:
    """Hand-set matrices for timeline arithmetic tests (asymmetric on purpose)."""
    time = np.array([[0.0, 5.0, 9.0],
                     [7.0, 0.0, 3.0],
                     [4.0, 6.0, 0.0]])
    return TravelMatrix(time=time, dist=time * 2.0)
