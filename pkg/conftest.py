"""
Shared pytest fixtures. Full-size reproduction runs are marked slow and only
run with --runslow.
"""

import numpy as np
import pytest

from hypext import choose_parameters
from hypext.experiments import random_instance, triangle_instance

collect_ignore = ['examples']


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False, help='run slow reproduction tests')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: full-size reproduction run, needs --runslow')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(scope='session')
def cfg_half():
    return choose_parameters(0.5)


@pytest.fixture
def triangle():
    return triangle_instance(2.0, 0.9)


@pytest.fixture
def half_map():
    pmap, xi = random_instance(2, 3, 0.5, np.random.default_rng(7))
    return pmap, xi
