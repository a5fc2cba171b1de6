import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import factorial, poch

from freeconv.classical_id import (
    CMFunction,
    Jet,
    boolean_density_cm,
    boolean_h,
    boolean_h_prime,
    classical_id_verdict,
    cm_calculus_check,
    cm_check,
    cm_exp,
    cm_inverse_linear,
    cm_power,
    cm_reciprocal,
    cm_sin_modulated,
    cm_x_exp,
)
from freeconv.errors import DomainError, ParameterError
from freeconv.stable_laws import boolean_stable_density

X = np.logspace(-2, 2, 25)


def test_jet_derivatives_of_inverse_linear():
    vals, bnd = cm_inverse_linear().jet(X, 8).derivative_values()
    for n in range(9):
        exact = (-1) ** n * factorial(n) / (1 + X) ** (n + 1)
        assert np.max(np.abs(vals[n].real - exact) / np.abs(exact)) < 1e-12
        assert np.all(bnd[n] >= 0)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(0.05, 20))
def test_jet_power_derivatives(p, x):
    vals, _ = Jet.power(np.array([x]), p, 6).derivative_values()
    for n in range(7):
        # d^n x^p = p (p-1) ... (p-n+1) x^(p-n) = (-1)^n (-p)_n x^(p-n)
        exact = (-1) ** n * poch(-p, n) * x ** (p - n)
        assert abs(vals[n, 0].real - exact) <= 1e-11 * max(1.0, abs(exact))


def test_jet_reciprocal_and_product_roundtrip():
    h = boolean_h(0.3).jet(X, 6)
    one = h * h.reciprocal()
    assert np.max(np.abs(one.c[0] - 1)) < 1e-14
    # higher coefficients vanish up to the propagated rounding bound
    assert np.all(np.abs(one.c[1:]) <= one.err[1:])


def test_density_jet_value_matches_closed_form():
    f = boolean_density_cm(0.4)
    assert np.max(np.abs(f(X) - boolean_stable_density(0.4, 1.0, X)) / f(X)) < 1e-13


@pytest.mark.parametrize("f", [cm_exp(), cm_power(0.5), cm_inverse_linear()])
def test_known_cm_functions_pass(f):
    rep = cm_check(f, 10)
    assert rep.passed and all(rep.sign_table)


@pytest.mark.parametrize("f", [cm_x_exp(), cm_sin_modulated()])
def test_known_non_cm_functions_fail_at_first_order(f):
    rep = cm_check(f, 10)
    assert not rep.passed and rep.first_failing_order() == 1


def test_cm_check_arguments():
    with pytest.raises(DomainError):
        cm_check(cm_exp(), 4, np.array([0.0, 1.0]))
    with pytest.raises(ParameterError):
        cm_check(cm_exp(), 13)


def test_report_json():
    d = json.loads(cm_check(cm_x_exp(), 4).to_json())
    assert d["schema"] == 1 and d["passed"] is False
    assert d["first_violation"]["order"] == 1 and len(d["sign_table"]) == 5


@pytest.mark.parametrize("op", ["product", "sum"])
def test_calculus_closure(op):
    rep = cm_calculus_check(cm_exp(), cm_inverse_linear(), 10, operation=op)
    assert rep.inputs_pass and rep.result.passed and rep.consistent


def test_calculus_product_with_failing_input_is_vacuous():
    rep = cm_calculus_check(cm_exp(), cm_x_exp(), 6, operation="product")
    assert not rep.inputs_pass and rep.consistent


def test_composition_with_bernstein_inner():
    rep = cm_calculus_check(cm_reciprocal(), boolean_h(0.4), 10, operation="compose")
    assert rep.inputs_pass and rep.result.passed and rep.consistent
    # the composed jet of 1/h agrees with the direct reciprocal jet
    h = boolean_h(0.4)
    inner = h.jet(X, 8)
    comp = cm_reciprocal().jet(inner.c[0].real, 8).compose_into(inner)
    direct = CMFunction("1/h", lambda t, N: h.jet(t, N).reciprocal()).jet(X, 8)
    assert np.max(np.abs(comp.c - direct.c) / np.abs(direct.c)) < 1e-12


def test_h_prime_fails_at_order_zero_above_half():
    rep = cm_check(boolean_h_prime(0.6), 10)
    assert rep.first_failing_order() == 0
    assert rep.first_violation[1] == pytest.approx(0.01)
    # h'(x) = 1.2 x^0.2 + 1.2 cos(0.6 pi) x^-0.4 is negative at 0.01
    x = 0.01
    assert 1.2 * x**0.2 + 1.2 * math.cos(0.6 * math.pi) * x**-0.4 < 0
    assert cm_check(boolean_h_prime(0.4), 10).passed


@pytest.mark.parametrize("alpha", [0.1, 0.25, 0.4, 0.5])
def test_verdict_certified_up_to_half(alpha):
    v = classical_id_verdict(alpha)
    assert v.verdict == "ID(*) certified via CM" and v.cm.passed
    assert v.to_dict()["schema"] == 1


def test_verdict_above_half_and_failure_order():
    v = classical_id_verdict(0.7)
    assert v.verdict == "no conclusion"
    assert v.cm.first_failing_order() == 2


def test_verdict_parameters():
    with pytest.raises(ParameterError):
        classical_id_verdict(0.4, rho=0.5)
    with pytest.raises(ParameterError):
        classical_id_verdict(1.2)
