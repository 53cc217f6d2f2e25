import pytest

from attractorlab.cutoffs import periodic_drive
from attractorlab.floquet import make_periodic_operator, poincare_predicted
from attractorlab.spectral import make_spectrum


@pytest.fixture(scope="session")
def linear_spectrum_big():
    return make_spectrum("linear", {"c": 1.0}, 300)


@pytest.fixture(scope="session")
def shift_t1(linear_spectrum_big):
    return poincare_predicted(linear_spectrum_big, 1.0)


@pytest.fixture(scope="session")
def operator_t2():
    spec = make_spectrum("linear", {"c": 1.0}, 12)
    drive = periodic_drive(1.0, 2.0, 0.75)
    return make_periodic_operator(spec, drive, 12)
