import os
import random
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from vdp.group import setup_group  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ALL_GROUPS = ("ristretto255", "schnorr2048", "toy61", "toy16", "toy101")
FAST_GROUPS = ("ristretto255", "toy61", "toy16")


@pytest.fixture(scope="session", params=ALL_GROUPS)
def any_pp(request):
    return setup_group(request.param)


@pytest.fixture(scope="session", params=FAST_GROUPS)
def pp(request):
    return setup_group(request.param)


@pytest.fixture
def toy():
    return setup_group("toy61")


@pytest.fixture
def rng():
    return random.Random(1234)
