import mpmath
import pytest

from eqtax.economy import belgium_2014

mpmath.mp.dps = 40

# Belgian 2014 aggregates, EUR
M_CAP = 60e9
M_LAB = 170.6e9
N_CAP = 1.73e5
N_LAB = 6.09e6
X_C = 100e3
X_POV = 13.25e3
DELTA_M = 16.4e9


@pytest.fixture
def belgium():
    return belgium_2014()


def rel(a, b):
    return abs(a - b) / abs(b)
