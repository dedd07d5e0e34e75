"""Test configuration and fixtures."""

import numpy as np
import pytest

from holonomy_lab.config import Settings
from holonomy_lab.frames import connection_field, cpn_connection_field, cpn_frame_field
from holonomy_lab.manifold import Chart
from holonomy_lab.schemas import ChartKind


@pytest.fixture
def rng():
    """Provide a seeded random generator."""
    return np.random.default_rng(20240611)


@pytest.fixture
def test_settings():
    """Provide settings with explicit defaults for testing."""
    return Settings(threads=2, fock_cutoff=40, holonomy_steps=512, stokes_steps=200)


@pytest.fixture
def cpn2():
    """Provide the CP^2 chart."""
    return Chart.cpn(2)


@pytest.fixture
def cpn2_field():
    """Provide the closed-form CP^2 connection."""
    return cpn_connection_field(2)


@pytest.fixture
def cpn2_frame():
    """Provide the CP^2 frame field."""
    return cpn_frame_field(2)


@pytest.fixture
def optical1_field():
    """Provide the closed-form displacer/squeezer connection."""
    return connection_field(Chart(ChartKind.OPTICAL1))


@pytest.fixture
def optical2_field():
    """Provide the closed-form two-mode connection."""
    return connection_field(Chart(ChartKind.OPTICAL2))


@pytest.fixture
def su2int_field():
    """Provide the closed-form interferometer connection."""
    return connection_field(Chart(ChartKind.SU2INT))


@pytest.fixture
def random_unitary(rng):
    """Provide a factory of Haar-like random unitaries."""

    def make(n: int) -> np.ndarray:
        z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        q, r = np.linalg.qr(z)
        return q * (np.diag(r) / np.abs(np.diag(r)))

    return make
