import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma

from freeconv.errors import DomainError, ParameterError
from freeconv.stable_laws import (
    StableLaw,
    boolean_stable_K,
    boolean_stable_density,
    boolean_stable_handle,
    classical_stable_density,
    classical_stable_laplace,
    free_stable_F,
    free_stable_handle,
    talbot_invert,
)
from freeconv.transform_core import stieltjes_invert


def positive_stable_series(alpha, x, terms=80):
    """Density of exp(-s^alpha) from its convergent series in x^-alpha."""
    k = np.arange(1, terms + 1)[:, None]
    x = np.asarray(x, dtype=float)[None, :]
    t = (-1.0) ** (k + 1) * gamma(k * alpha + 1) / gamma(k + 1) * np.sin(k * np.pi * alpha) \
        * x ** (-k * alpha - 1)
    return t.sum(axis=0) / np.pi


def test_parameter_ranges():
    with pytest.raises(ParameterError):
        StableLaw("boolean", 2.5, 0.5)
    with pytest.raises(ParameterError):
        StableLaw("free", 1.5, 0.5)
    with pytest.raises(ParameterError):
        StableLaw("classical", 0.5, 0.3)
    with pytest.raises(ParameterError):
        StableLaw("free", 0.5, 1.0, shift=1.0)
    with pytest.raises(ParameterError):
        StableLaw("boolean", 0.5, 1.0, scale=0.0)


def test_law_json_roundtrip():
    law = StableLaw("boolean", 0.7, 0.3, shift=-1.0, scale=2.0)
    assert StableLaw.from_json(law.to_json()) == law


@pytest.mark.parametrize("alpha,rho", [(0.4, 0.3), (1.0, 0.2), (1.5, 0.6)])
def test_energy_function_forms(alpha, rho):
    z = 0.7 + 1.3j
    if alpha < 1:
        ref = -cmath.exp(1j * math.pi * rho * alpha) * z ** (1 - alpha)
    elif alpha == 1:
        ref = -2j * rho + 2 * (2 * rho - 1) / math.pi * cmath.log(z)
    else:
        ref = cmath.exp(1j * (alpha - 2) * rho * math.pi) * z ** (1 - alpha)
    assert abs(complex(boolean_stable_K(alpha, rho, z)) - ref) < 1e-14


def test_affine_wrapper():
    law = StableLaw("boolean", 0.5, 1.0, shift=2.0, scale=3.0)
    m = law.handle()
    base = boolean_stable_handle(alpha=0.5, rho=1.0)
    z = np.array([1 + 1j, -2 + 0.5j])
    # delta_a Boolean-convolved with D_b: K(z) = a + b K_base(z / b)
    assert np.max(np.abs(m.K(z) - (2.0 + 3.0 * base.K(z / 3.0)))) < 1e-13


def test_density_value_at_one():
    assert abs(boolean_stable_density(0.5, 1.0, 1.0) - 1 / (2 * math.pi)) < 1e-15


def test_density_two_sided_matches_inversion():
    x = np.array([-4.0, -0.3, 0.2, 5.0])
    b = boolean_stable_handle(alpha=0.3, rho=0.6)
    assert np.max(np.abs(stieltjes_invert(b, x).values - boolean_stable_density(0.3, 0.6, x))) < 1e-8


def test_density_rejects_zero_and_large_alpha():
    with pytest.raises(DomainError):
        boolean_stable_density(0.5, 1.0, 0.0)
    with pytest.raises(ParameterError):
        boolean_stable_density(1.2, 0.5, 1.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0, 1), st.floats(-20, 20), st.floats(1e-2, 20))
def test_free_stable_F_inverts_H(alpha, rho, x, y):
    z = complex(x, y)
    w = complex(free_stable_F(alpha, rho, z))
    H = w - cmath.exp(1j * alpha * rho * math.pi) * cmath.exp((1 - alpha) * cmath.log(w))
    assert abs(H - z) < 1e-9 * max(1.0, abs(z))
    assert w.imag >= z.imag - 1e-9


def test_free_stable_handle_phi_and_cauchy_case():
    s = free_stable_handle(1.0, 0.5)
    assert abs(complex(s.F(1j)) - 2j) < 1e-15
    h = free_stable_handle(0.5, 1.0)
    z = 2 + 1j
    assert abs(complex(h.phi(z)) + 1j * cmath.sqrt(z)) < 1e-14


def test_levy_closed_form_normalised():
    x = np.logspace(-3, 8, 20001)
    f = classical_stable_density(0.5, x)
    mass = np.trapezoid(f * x, np.log(x)) if hasattr(np, "trapezoid") else np.trapz(f * x, np.log(x))
    tail = 2 * f[-1] * x[-1]  # closure for x^-3/2
    assert abs(mass + tail - 1) < 1e-6


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_talbot_matches_series(alpha):
    x = np.linspace(0.8, 10, 12)
    got = talbot_invert(lambda s: np.exp(-s**alpha), x)
    assert np.max(np.abs(got - positive_stable_series(alpha, x))) < 1e-8


def test_laplace_domain():
    assert abs(complex(classical_stable_laplace(0.5, 4.0)) - math.exp(-2)) < 1e-15
    with pytest.raises(DomainError):
        classical_stable_laplace(0.5, -1.0)
