import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import fixtures  # noqa: E402
from clpool_bindings import bind_load_and_replay  # noqa: E402


@pytest.fixture(scope="session")
def handle():
    return bind_load_and_replay(fixtures.EVENTS, fixtures.POOL, fixtures.FEE)


@pytest.fixture(scope="session")
def deep_events(tmp_path_factory):
    path = tmp_path_factory.mktemp("pools") / "deep.csv"
    fixtures.write_single_position_pool(path, 10 ** 11)
    return path


@pytest.fixture(scope="session")
def shallow_events(tmp_path_factory):
    path = tmp_path_factory.mktemp("pools") / "shallow.csv"
    fixtures.write_single_position_pool(path, 10 ** 9)
    return path
