"""
Shared test fixtures for the polyloc test suite.

Provides the HTTP client, a seeded random generator and a reference
triangle network, and registers the Hypothesis profile used by the
property tests.
"""

import sys
import os

import numpy as np
import pytest
from fastapi.testclient import TestClient
from hypothesis import settings

# Add parent directory to path so imports work
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from main import app

settings.register_profile("polyloc", max_examples=25, deadline=None)
settings.load_profile("polyloc")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale runs (pytest -m slow)")


@pytest.fixture(name="client")
def fixture_client():
    """FastAPI TestClient for the polyloc app."""
    with TestClient(app) as c:
        yield c


@pytest.fixture(name="rng")
def fixture_rng():
    """Seeded numpy Generator so random tables are reproducible."""
    return np.random.default_rng(20240611)


@pytest.fixture(name="bell_network")
def fixture_bell_network():
    """Three phi+ sources measured in the product basis, triangle-product signs."""
    return {
        "n": 3,
        "sources": [{"kind": "bell", "label": "phi+"}] * 3,
        "povms": [{"kind": "product"}] * 3,
        "signs": {"preset": "triangle-product"},
    }
