import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import fast_config, fast_node  # noqa: E402


@pytest.fixture
def config():
    return fast_config()


@pytest.fixture
def node():
    return fast_node()
