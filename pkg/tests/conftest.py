import pytest

from helpers import toy_store


@pytest.fixture
def toy():
    return toy_store()
