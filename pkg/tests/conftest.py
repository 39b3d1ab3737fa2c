"""
Shared fixtures for the test suite
"""

import numpy as np
import pytest

from src.grid import make_grid
from src.states import coherent_state, compose_initial, fock_state


@pytest.fixture
def small_grid():
    return make_grid(256, 10.0)


@pytest.fixture
def wide_grid():
    return make_grid(512, 20.0)


@pytest.fixture
def vacuum_excited(small_grid):
    """|+> (x) |0>"""
    return compose_initial(fock_state(0, small_grid), [1.0, 0.0], small_grid)


@pytest.fixture
def coherent_superposition(small_grid):
    """(|+> + |->)/sqrt 2 (x) |nu = 1>"""
    field = coherent_state(1.0, small_grid)
    return compose_initial(field, np.array([1.0, 1.0]) / np.sqrt(2.0), small_grid)
