import os

import pytest

from liact import cli


def load_shipped(name):
    """Parse one of the golden scenario files into live objects."""
    path = os.path.join(str(cli.scenario_dir()), f"{name}.json")
    return cli.load_scenario(path)


@pytest.fixture
def shipped():
    return load_shipped
