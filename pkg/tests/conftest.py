import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "jcover", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("jcover")


@pytest.fixture(scope="session", autouse=True)
def cache_dir(tmp_path_factory):
    """Every test run starts from an empty polynomial cache."""
    path = tmp_path_factory.mktemp("jcover-cache")
    old = os.environ.get("JCOVER_CACHE")
    os.environ["JCOVER_CACHE"] = str(path)
    yield path
    if old is None:
        os.environ.pop("JCOVER_CACHE", None)
    else:
        os.environ["JCOVER_CACHE"] = old


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
