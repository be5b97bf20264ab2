import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from emgpr import SPEED_OF_LIGHT, ula_geometry

F_C = 3.5e9
WAVELENGTH = SPEED_OF_LIGHT / F_C
K0 = 2 * np.pi / WAVELENGTH


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def ula32():
    return ula_geometry(32, WAVELENGTH / 2, F_C, "y")


@pytest.fixture
def ula8():
    return ula_geometry(8, WAVELENGTH / 2, F_C, "y")
