import os

import pytest


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("COGSPEECH_CLI")
    if not path:
        pytest.skip("COGSPEECH_CLI is not set")
    return path
