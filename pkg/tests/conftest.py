import numpy as np
import pytest

from sensornet import reference_scenario
from sensornet.link import build_link_table


@pytest.fixture(scope="session")
def static_sc():
    return reference_scenario("reference_static")


@pytest.fixture(scope="session")
def dynamic_sc():
    return reference_scenario("reference_dynamic")


@pytest.fixture(scope="session")
def static_link(static_sc):
    return build_link_table(static_sc, "static")


@pytest.fixture(scope="session")
def dynamic_link(dynamic_sc):
    return build_link_table(dynamic_sc, "dynamic")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
