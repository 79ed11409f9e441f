import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from harmion.basis import build_basis


@pytest.fixture(scope="session")
def small_basis():
    """Cheap basis for propagation tests; continuum good to a few eV."""
    return build_basis(80.0, 120, 7, "two_zone")


@pytest.fixture(scope="session")
def mid_basis():
    """Basis large enough for Rydberg states and low-continuum spectra."""
    return build_basis(200.0, 300, 7, "two_zone")
