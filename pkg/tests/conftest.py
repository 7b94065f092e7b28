import pytest

from iabcache.config import NetworkConfig


@pytest.fixture(scope="session")
def cfg():
    return NetworkConfig()


@pytest.fixture(scope="session")
def light_cfg():
    # smaller file size so large caches stay inside the SBS power budget
    return NetworkConfig(file_bits=6e6)
