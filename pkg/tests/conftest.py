import math
import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

from gfdlab.cusp import CuspMap, CuspParams  # noqa: E402
from gfdlab.presets import PresetParams, build_family  # noqa: E402
from gfdlab.spiral import SpiralMap, SpiralParams  # noqa: E402


@pytest.fixture(scope="session")
def lp_params():
    return CuspParams("lp_duality", p=2.0, eps=0.5)


@pytest.fixture(scope="session")
def lp_cusp(lp_params):
    return CuspMap(lp_params)


@pytest.fixture(scope="session")
def bounded_spiral():
    return SpiralMap(SpiralParams("bounded_sigma"))


@pytest.fixture(scope="session")
def lp_spiral():
    return SpiralMap(SpiralParams("lp", p=2.0))


@pytest.fixture(scope="session")
def presets():
    """Every preset family built with default parameters."""
    pp = PresetParams()
    names = ("cusp-lp-duality", "cusp-sigma-ls", "cusp-exp-k", "spiral-bounded-sigma", "spiral-lp",
             "triple-log", "power-log")
    return {n: build_family(n, pp) for n in names}


R0_CUSP = math.exp(-math.e)
