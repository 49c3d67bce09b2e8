import os
import sys

import pytest

# Add project root to sys.path for absolute imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False, help="run acceptance-scale training tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale run, needs --run-slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="acceptance-scale run; use --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
