import pytest
from hypothesis import HealthCheck, settings

from backscatter_ee import NetworkParams, SensingParams, maximize_ee

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def net():
    return NetworkParams()


@pytest.fixture(scope="session")
def sense():
    return SensingParams.from_db(2000, -10.0)


@pytest.fixture(scope="session")
def optimum(net, sense):
    return maximize_ee(net, sense)


@pytest.fixture(scope="session")
def preset_tables():
    """Every figure preset at default settings, with the wall time of the whole suite."""
    import time

    from backscatter_ee.presets import PRESETS, run_preset

    start = time.perf_counter()
    tables = {name: run_preset(name) for name in PRESETS if name.startswith("fig")}
    return tables, time.perf_counter() - start
