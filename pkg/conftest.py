"""
Shared fixtures for the test suites
"""
import numpy as np
import pytest
from loguru import logger

from config.settings import settings
from src.geometry.cartan import CartanCoords, recompose
from src.lattices.enumeration import enumerate_psl2z
from src.lattices.lattice_spec import builtin_lattice


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run desk-scale reproductions")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale reproductions (minutes)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def four_workers(monkeypatch):
    """Raise the worker cap so n_jobs > 1 really runs the joblib paths"""
    monkeypatch.setattr(settings, "THREADS", 4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def psl2z():
    return builtin_lattice("psl2z")


@pytest.fixture(scope="session")
def psl2z_ball():
    """PSL2(Z) in the ball of radius 60"""
    return enumerate_psl2z(60.0, n_jobs=1)


@pytest.fixture
def warnings_logged():
    """Messages of WARNING records emitted during the test"""
    messages = []
    handler_id = logger.add(lambda m: messages.append(m.record["message"]), level="WARNING")
    yield messages
    logger.remove(handler_id)


@pytest.fixture
def random_element(rng):
    """Factory of floating elements k_theta a_t k_phi with t in [t_lo, t_hi]"""

    def make(t_lo=0.1, t_hi=4.0):
        coords = CartanCoords(
            theta=float(rng.uniform(-np.pi, np.pi)),
            t=float(rng.uniform(t_lo, t_hi)),
            phi=float(rng.uniform(-np.pi, np.pi)),
        )
        return recompose(coords), coords

    return make
