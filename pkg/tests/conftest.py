import os
from pathlib import Path

import pytest

CACHE_ENV = "CONVEXSMOOTH_CM_CACHE"


def pytest_configure(config):
    # one c_m table build per checkout; the cache is keyed by a configuration hash
    if not os.environ.get(CACHE_ENV):
        cache = Path(config.rootpath) / ".pytest_cache" / "cm_table.json"
        cache.parent.mkdir(parents=True, exist_ok=True)
        os.environ[CACHE_ENV] = str(cache)


@pytest.fixture(scope="session")
def table():
    from convexsmooth.bounds import default_table

    return default_table()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.__dict__.get("acceptance_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip("]"))):
            terminalreporter.write_line(line)
