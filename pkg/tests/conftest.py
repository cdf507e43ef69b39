import pytest
from hypothesis import settings

from submax.instances import corpus

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def small_corpus():
    return corpus()
