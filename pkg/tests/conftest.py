from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from qlink.chain import QLinkChain
from qlink.model import worked_models

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

MODEL_NAMES = ("u1_n1", "u1_n2", "u2_n1", "u2_n2")


@lru_cache(maxsize=None)
def get_chain(name: str, L: int = 4, J: float = 1.0, mass: float = 0.5, g2: float = 1.0):
    spec = worked_models(L)[name].with_params(J=J, mass=mass, g2=g2)
    return QLinkChain(spec)


@pytest.fixture(params=MODEL_NAMES)
def model_name(request):
    return request.param


@pytest.fixture
def chain(model_name):
    return get_chain(model_name)
