import sys
from pathlib import Path

import numpy as np
import pytest

from modules.cartan import build_su2_pauli
from modules.lie_algebra import SIGMA_X, SIGMA_Y, SIGMA_Z


def pytest_configure(config):
    """Add the project’s root directory to sys.path so test imports resolve."""
    project_dir = str(Path(__file__).resolve().parent)
    sys.path.insert(0, project_dir)


@pytest.fixture
def pauli():
    """Provide the anti-Hermitian Pauli generators as (σ_x, σ_y, σ_z)."""
    return SIGMA_X, SIGMA_Y, SIGMA_Z


@pytest.fixture
def su2_pair():
    """Provide the su(2) Cartan pair k = span{σ_z}, p = span{σ_x, σ_y}."""
    return build_su2_pauli()


@pytest.fixture
def rng():
    """Provide a seeded random generator."""
    return np.random.default_rng(1234)
