import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_addoption(parser):
    parser.addoption(
        "--skip-benchmark", action="store_true", default=False,
        help="skip the end-to-end desk benchmark (acceptance criteria 6-9)",
    )


def pytest_collection_modifyitems(config, items):
    if not config.getoption("--skip-benchmark"):
        return
    marker = pytest.mark.skip(reason="--skip-benchmark given")
    for item in items:
        if "benchmark" in item.keywords:
            item.add_marker(marker)


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "benchmark: long-running end-to-end training benchmark"
    )
