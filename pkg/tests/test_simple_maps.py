import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from gfdlab.core import UnsupportedError
from gfdlab.simple_maps import ConstantMap, IdentityMap, PowerLogMap, TripleLogMap


def test_identity_fields():
    b = IdentityMap().fields("disk", np.array([1.0, 3.0]), np.array([0.3, -2.0]))
    assert np.allclose(b.jac, 1.0) and np.allclose(b.K, 1.0)
    assert np.allclose(b.opnorm_sq, 1.0)
    assert np.all(b.sigma == 0)


def test_constant_fields():
    b = ConstantMap((2.0, 5.0)).fields("disk", np.array([4.0]), np.array([1.0]))
    assert np.array_equal(b.f[0], [2.0, 5.0])
    assert np.all(b.scaled_df == 0) and np.all(b.sigma == 0)


def test_wrong_region():
    with pytest.raises(ValueError):
        IdentityMap().fields("A1", 1.0, 0.0)


class TestTripleLog:
    def test_value(self):
        m = TripleLogMap()
        r = 1e-5
        b = m.fields("disk", None, 0.2, r)
        assert b.f[0, 0] == pytest.approx(math.log(math.log(math.log(math.e**math.e / r))), rel=1e-14)

    def test_zero_jacobian_and_equality(self):
        b = TripleLogMap().fields("disk", np.geomspace(0.01, 1e4, 50), 0.0)
        assert np.all(b.jac == 0)
        assert np.allclose(b.sigma, b.opnorm_sq, rtol=1e-13)

    def test_blowup_radius(self):
        L = TripleLogMap().blowup_log_radius(1.0)
        ref = brentq(lambda t: math.log(math.log(math.log(math.e**math.e) + t)) - 1.0, 0.0, 100.0, xtol=1e-14)
        assert L == pytest.approx(ref, rel=1e-12)
        assert L == pytest.approx(12.4359, rel=1e-5)

    def test_blowup_radius_underflows(self):
        assert TripleLogMap().blowup_log_radius(7.0) == math.inf

    def test_continuity_flag(self):
        m = TripleLogMap()
        assert not m.continuous_at((0.0, 0.0)) and m.continuous_at((0.1, 0.0))


class TestPowerLog:
    def test_invalid_alpha(self):
        with pytest.raises(ValueError):
            PowerLogMap(0.0)

    def test_blowup_unsupported(self):
        with pytest.raises(UnsupportedError):
            PowerLogMap().blowup_log_radius(2.0)

    def test_cartesian_zero_at_origin(self):
        out = PowerLogMap(2.0).eval_cartesian(np.array([0.0, 0.1]), np.array([0.0, 0.0]))
        assert np.array_equal(out[0], [0.0, 0.0])
        assert out[1, 0] == pytest.approx(math.log(10.0) ** -2, rel=1e-14)

    def test_derivative(self):
        m = PowerLogMap(1.5)
        L = 4.0
        b = m.fields("disk", L, 0.0)
        # d/dr L^-a = a L^(-a-1) / r
        assert b.scaled_df[0, 0, 0] == pytest.approx(1.5 * L**-2.5, rel=1e-14)


@given(st.floats(min_value=0.0, max_value=700.0))
def test_triple_log_derivative_matches_fd(L):
    m = TripleLogMap()
    h = 1e-5 * max(1.0, L)
    up = m.fields("disk", L + h, 0.0).f[0, 0]
    dn = m.fields("disk", L - h, 0.0).f[0, 0] if L > h else None
    if dn is None:
        return
    # r d/dr = -d/dL
    fd = -(up - dn) / (2 * h)
    assert fd == pytest.approx(m.fields("disk", L, 0.0).scaled_df[0, 0, 0], rel=1e-5)
