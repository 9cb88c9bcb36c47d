import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfdlab.core import OutOfDomainError
from gfdlab.cusp import CuspMap, CuspParams
from gfdlab.field_checks import modulus_samples
from gfdlab.lemmas import (
    DiffIneqInstance,
    ExpYoungCase,
    HypothesisOrderError,
    TripleJensenInstance,
    check_diff_ineq,
    cubes_in_annulus,
    diff_ineq_suite,
    exp_young_A,
    exp_young_constant,
    exp_young_margin,
    exp_young_suite,
    fit_log_exponent,
    reverse_holder_ratio,
    triple_jensen_check,
)
from gfdlab.simple_maps import ConstantMap, IdentityMap, PowerLogMap
from oracles import exp_young_constant_ref


class TestExpYoung:
    def test_kappa_one_lambda_one(self):
        C_ref, A_ref = exp_young_constant_ref(1.0, 1.0)
        assert exp_young_A(1.0) == pytest.approx(A_ref, rel=1e-9)
        assert exp_young_constant(1.0, 1.0) == pytest.approx(C_ref, rel=1e-9)
        assert exp_young_constant(1.0, 1.0) == pytest.approx(5.22741, rel=1e-6)
        assert exp_young_A(1.0) == pytest.approx(1.84726, abs=5e-6)

    @pytest.mark.parametrize("kappa,lam", [(0.5, 2.0), (2.0, 0.5), (3.5, 3.0)])
    def test_constant_matches_minimization(self, kappa, lam):
        C_ref, A_ref = exp_young_constant_ref(kappa, lam)
        assert exp_young_A(kappa) == pytest.approx(A_ref, rel=1e-9)
        assert exp_young_constant(kappa, lam) == pytest.approx(C_ref, rel=1e-8)

    def test_a_zero_holds(self):
        for b in (0.0, 1e-3, 1.0, 1e6):
            assert exp_young_margin(0.0, b, 1.3, 0.7) > 0

    def test_suite_no_violations(self):
        res = exp_young_suite(cases=20_000, seed=7)
        assert res["violations"] == 0 and res["min_log_margin"] > 0

    def test_suite_reproducible(self):
        assert exp_young_suite(cases=500, seed=3) == exp_young_suite(cases=500, seed=3)

    @pytest.mark.parametrize("kw", [dict(a=-1.0, b=1.0, kappa=1.0, lam=1.0), dict(a=1.0, b=1.0, kappa=0.0, lam=1.0),
                                    dict(a=math.inf, b=1.0, kappa=1.0, lam=1.0)])
    def test_case_validation(self, kw):
        with pytest.raises(ValueError):
            ExpYoungCase(**kw)

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            exp_young_constant(1.0, 0.0)


@given(st.floats(min_value=1e-6, max_value=1e6), st.floats(min_value=1e-6, max_value=1e6),
       st.floats(min_value=0.25, max_value=4.0), st.floats(min_value=0.25, max_value=4.0))
def test_exp_young_property(a, b, kappa, lam):
    # direct evaluation oracle, in logs to avoid overflow
    C = exp_young_constant(kappa, lam)
    rhs = np.logaddexp(lam * a ** (1 / kappa), math.log(C) + math.log(b) + kappa * math.log(math.log(math.e + b)))
    assert math.log(a) + math.log(b) < rhs


def power_instance(A, R=1.0, S=1.0):
    # Phi' = Phi / (A r): the equality case with Gamma = 0 and Psi = r
    return DiffIneqInstance(
        A, R, S,
        phi=lambda r: S * (r / R) ** (1 / A),
        dphi=lambda r: np.where(r > 0, S * (r / R) ** (1 / A) / (A * np.where(r > 0, r, 1.0)), 0.0),
        psi=lambda r: r, dpsi=lambda r: np.ones_like(r),
        gamma=lambda r: np.zeros_like(r), dgamma=lambda r: np.zeros_like(r),
    )


class TestDiffIneq:
    @pytest.mark.parametrize("A", [0.5, 1.0, 2.5])
    def test_closed_form_equality_case(self, A):
        rep = check_diff_ineq(power_instance(A))
        assert rep.holds
        assert abs(rep.max_excess) <= 1e-12
        assert rep.constant == pytest.approx(1.0)
        assert np.allclose(rep.bound, rep.phi, rtol=1e-12, atol=0)

    def test_zero_phi(self):
        z = lambda r: np.zeros_like(r)  # noqa: E731
        inst = DiffIneqInstance(1.0, 1.0, 1.0, z, z, lambda r: r, lambda r: np.ones_like(r), z, z)
        rep = check_diff_ineq(inst)
        assert rep.holds and rep.max_excess <= 0

    def test_power_gamma_special_case(self):
        # Psi = r, Gamma = c r^alpha: Phi from the equality ODE Phi' = (Phi - Gamma) / (A r)
        A, c, al = 2.0, 0.3, 1.5
        k = c / (1 - A * al)  # particular solution k r^alpha
        S = 1.0
        coef = S - k
        inst = DiffIneqInstance(
            A, 1.0, S,
            phi=lambda r: k * r**al + coef * r ** (1 / A),
            dphi=lambda r: k * al * r ** (al - 1) + coef / A * np.where(r > 0, r, 1.0) ** (1 / A - 1),
            psi=lambda r: r, dpsi=lambda r: np.ones_like(r),
            gamma=lambda r: c * r**al, dgamma=lambda r: c * al * r ** (al - 1),
        )
        rep = check_diff_ineq(inst)
        assert rep.holds

    def test_hypothesis_violated(self):
        # Phi = r against A Psi Phi' / Psi' = r / 2
        inst = DiffIneqInstance(0.5, 1.0, 1.0, lambda r: r, lambda r: np.ones_like(r), lambda r: r,
                                lambda r: np.ones_like(r), lambda r: np.zeros_like(r), lambda r: np.zeros_like(r))
        rep = check_diff_ineq(inst)
        assert rep.status == "hypothesis_violated" and rep.hypothesis_excess > 0.4

    def test_non_monotone(self):
        inst = DiffIneqInstance(1.0, 1.0, 1.0, lambda r: r * (1 - r) * 4 * (r < 2), lambda r: 4 - 8 * r,
                                lambda r: r, lambda r: np.ones_like(r), lambda r: np.zeros_like(r),
                                lambda r: np.zeros_like(r))
        with pytest.raises(HypothesisOrderError):
            check_diff_ineq(inst)

    def test_phi_above_s(self):
        with pytest.raises(HypothesisOrderError):
            check_diff_ineq(DiffIneqInstance(1.0, 1.0, 0.5, lambda r: r, lambda r: np.ones_like(r), lambda r: r,
                                             lambda r: np.ones_like(r), lambda r: np.zeros_like(r),
                                             lambda r: np.zeros_like(r)))

    def test_invalid_constants(self):
        with pytest.raises(ValueError):
            power_instance(0.0)

    def test_suite(self):
        reports = diff_ineq_suite(20, seed=0)
        assert len(reports) == 20
        assert all(r.status == "holds" for r in reports)
        assert all(r.hypothesis_excess <= 1e-8 for r in reports)


def constant_profile(R=0.5, r=0.01):
    return TripleJensenInstance(2, 1.0, lambda s: 1.0, R=R, r=r, domain_radius=1.0)


def log_profile(R=0.4, r=1e-4):
    return TripleJensenInstance(2, 1.0, lambda s: math.log(1 / s), R=R, r=r, domain_radius=0.5)


class TestTripleJensen:
    def test_constant_closed_form(self):
        rep = triple_jensen_check(constant_profile())
        C = math.e / 2  # int_0^1 s e ds
        assert rep.constant == pytest.approx(C, rel=1e-12)
        assert rep.lhs == pytest.approx(math.log(0.5 / 0.01), rel=1e-12)
        rhs = 0.5 * (math.log(math.log(C) - 2 * math.log(0.01)) - math.log(math.log(C) + 2 - 2 * math.log(0.5)))
        assert rep.rhs == pytest.approx(rhs, rel=1e-12)
        assert rep.margin >= -1e-6

    def test_log_profile_closed_form(self):
        rep = triple_jensen_check(log_profile())
        # exp(K) = 1/s, so C = int_0^d s (1/s) ds = d; LHS = loglog(1/r) - loglog(1/R)
        assert rep.constant == pytest.approx(0.5, rel=1e-10)
        assert rep.lhs == pytest.approx(math.log(math.log(1e4)) - math.log(math.log(1 / 0.4)), rel=1e-10)
        assert rep.margin >= -1e-6

    @pytest.mark.parametrize("make", [constant_profile, log_profile])
    def test_near_boundary(self, make):
        R = 0.3
        rep = triple_jensen_check(make(R=R, r=R / math.e**3 * (1 - 1e-9)))
        assert math.isfinite(rep.lhs) and math.isfinite(rep.rhs)
        assert rep.margin >= -1e-6

    def test_r_too_large(self):
        with pytest.raises(ValueError):
            triple_jensen_check(constant_profile(R=0.5, r=0.5 / math.e**3))

    def test_outer_radius_too_large(self):
        with pytest.raises(ValueError):
            triple_jensen_check(constant_profile(R=1.0, r=1e-3))

    def test_invalid(self):
        with pytest.raises(ValueError):
            TripleJensenInstance(1, 1.0, lambda s: 1.0, 0.5, 0.01, 1.0)


@settings(max_examples=25)
@given(st.floats(min_value=0.05, max_value=0.45), st.floats(min_value=1e-12, max_value=1.0))
def test_triple_jensen_margin_nonnegative(R, frac):
    r = R / math.e**3 * frac * (1 - 1e-9)
    for make in (constant_profile, log_profile):
        assert triple_jensen_check(make(R=R, r=r)).margin >= -1e-6


class TestReverseHolder:
    def test_constant_map(self):
        rep = reverse_holder_ratio(ConstantMap(), [(0.2, 0.1)], 0.05)
        assert rep.max_ratio == 0.0

    def test_identity(self):
        rep = reverse_holder_ratio(IdentityMap(), [(0.2, 0.1), (-0.3, 0.2)], 0.05)
        # mean |I|^2 = 1, K = 1, Sigma = 0: the ratio is 1^(2/3) / (1 + 0)
        assert rep.max_ratio == pytest.approx(1.0, rel=1e-12)
        assert rep.max_ratio <= 1.5

    def test_cusp_annulus_stable(self):
        fam = CuspMap(CuspParams("lp_duality"))
        centers = cubes_in_annulus(0.03, 0.064, 0.004)
        assert centers
        coarse = reverse_holder_ratio(fam, centers, 0.004, order=6, cells=2).max_ratio
        fine = reverse_holder_ratio(fam, centers, 0.004, order=6, cells=4).max_ratio
        assert math.isfinite(coarse) and coarse > 0
        assert abs(fine - coarse) <= 0.1 * coarse

    def test_cube_outside(self):
        fam = CuspMap(CuspParams("lp_duality"))
        with pytest.raises(OutOfDomainError):
            reverse_holder_ratio(fam, [(0.06, 0.0)], 0.01)

    def test_cubes_in_annulus_geometry(self):
        h = 0.01
        for x, y in cubes_in_annulus(0.05, 0.2, h):
            corners = [(x + sx * 2 * h, y + sy * 2 * h) for sx in (-1, 1) for sy in (-1, 1)]
            assert max(math.hypot(*c) for c in corners) <= 0.2 + 1e-12


class TestFitLogExponent:
    def test_exact_data(self):
        r = np.exp(-np.linspace(5, 40, 12))
        alpha, err = fit_log_exponent(list(zip(r, 1 / np.log(1 / r))))
        assert alpha == pytest.approx(1.0, abs=1e-3) and err < 1e-3

    def test_constant(self):
        r = np.exp(-np.linspace(5, 40, 12))
        alpha, _ = fit_log_exponent([(x, 0.3) for x in r])
        assert alpha == pytest.approx(0.0, abs=1e-12)

    def test_power_log_alpha_two(self):
        r = np.exp(-np.linspace(5, 40, 10))
        alpha, _ = fit_log_exponent(modulus_samples(PowerLogMap(2.0), (0.0, 0.0), r, angular=32, radial=16))
        assert 1.9 <= alpha <= 2.1

    def test_too_few(self):
        with pytest.raises(ValueError):
            fit_log_exponent([(1e-3, 0.1), (1e-9, 0.05)])

    def test_short_span(self):
        with pytest.raises(ValueError):
            fit_log_exponent([(10.0**-k / 3, 0.1) for k in range(1, 9)][:8], min_decades=10)

    def test_nonpositive(self):
        r = np.exp(-np.linspace(5, 40, 12))
        with pytest.raises(ValueError):
            fit_log_exponent([(x, 0.0) for x in r])


@given(st.floats(min_value=1e-6, max_value=1e6), st.floats(min_value=0.1, max_value=4.0))
def test_fit_scale_equivariant(c, alpha):
    r = np.exp(-np.linspace(5, 40, 12))
    w = np.log(1 / r) ** -alpha
    a1, _ = fit_log_exponent(list(zip(r, w)))
    a2, _ = fit_log_exponent(list(zip(r, c * w)))
    assert a1 == pytest.approx(alpha, abs=1e-9)
    assert a2 == pytest.approx(a1, abs=1e-9)
