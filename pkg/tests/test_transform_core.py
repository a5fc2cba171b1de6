import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freeconv.errors import AtomicMeasureError, DomainError
from freeconv.stable_laws import boolean_stable_density, boolean_stable_handle
from freeconv.transform_core import (
    GriddedDensity,
    boolean_shift,
    cauchy_law,
    cauchy_transform,
    dilate,
    f_transform,
    k_transform,
    point_mass,
    psi_transform,
    reciprocal_handle,
    s_transform,
    standard_grid,
    stieltjes_invert,
)

upper = st.builds(complex, st.floats(-50, 50), st.floats(1e-3, 50))


def G_half(z):
    # b_{1/2}^1 by hand: F(z) = z + i sqrt(z), principal root
    return 1.0 / (z + 1j * cmath.sqrt(z))


def test_cauchy_transform_of_half_law_at_i():
    b = boolean_stable_handle(alpha=0.5, rho=1.0)
    g = complex(cauchy_transform(b, 1j))
    assert abs(g - G_half(1j)) < 1e-15
    assert abs(g - (-(math.sqrt(2) - 1) / 2 - 0.5j)) < 1e-12


def test_k_transform_of_half_law_at_i():
    b = boolean_stable_handle(alpha=0.5, rho=1.0)
    assert abs(complex(k_transform(b, 1j)) - (1 - 1j) / math.sqrt(2)) < 1e-14


def test_transforms_reject_lower_half_plane():
    b = boolean_stable_handle(alpha=0.5, rho=1.0)
    with pytest.raises(DomainError):
        f_transform(b, -1j)


@settings(max_examples=60, deadline=None)
@given(upper, st.floats(0.05, 2.0), st.floats(0.0, 1.0))
def test_nevanlinna_property(z, alpha, rho):
    b = boolean_stable_handle(alpha=alpha, rho=rho)
    F = complex(b.F(z))
    assert F.imag >= z.imag * (1 - 1e-12)


def test_normalization_at_infinity():
    for a, r in ((0.3, 1.0), (0.8, 0.4), (1.0, 0.7), (1.6, 0.5)):
        b = boolean_stable_handle(alpha=a, rho=r)
        y = 1e20
        assert abs(complex(b.F(1j * y)) / (1j * y) - 1) < 1e-5


def test_dilation_rescales_density():
    b = boolean_stable_handle(alpha=0.4, rho=1.0)
    d = dilate(b, 3.0)
    x = np.logspace(-1, 1, 15)
    got = stieltjes_invert(d, x).values
    assert np.max(np.abs(got - boolean_stable_density(0.4, 1.0, x / 3.0) / 3.0)) < 1e-9


def test_boolean_shift_adds_constant_to_K():
    b = boolean_stable_handle(alpha=0.6, rho=0.5)
    z = standard_grid()
    assert np.max(np.abs(boolean_shift(b, 2.5).K(z) - (b.K(z) + 2.5))) < 1e-12


def test_point_mass_and_cauchy():
    d = point_mass(1.5)
    assert d.atom == 1.5
    assert abs(complex(d.G(2j)) - 1 / (2j - 1.5)) < 1e-15
    with pytest.raises(AtomicMeasureError):
        stieltjes_invert(d, np.array([1.0, 2.0]))
    c = cauchy_law()
    x = np.linspace(-3, 3, 13)
    assert np.max(np.abs(stieltjes_invert(c, x).values - 1 / (np.pi * (1 + x**2)))) < 1e-9


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_stieltjes_inversion_matches_closed_form(alpha):
    b = boolean_stable_handle(alpha=alpha, rho=1.0)
    x = np.logspace(-2, 2, 80)
    d = stieltjes_invert(b, x)
    assert np.max(np.abs(d.values - boolean_stable_density(alpha, 1.0, x))) < 1e-7


def test_stieltjes_inversion_two_sided_law():
    b = boolean_stable_handle(alpha=0.6, rho=0.4)
    x = np.r_[-np.logspace(1, -1, 10), np.logspace(-1, 1, 10)]
    d = stieltjes_invert(b, x)
    assert np.max(np.abs(d.values - boolean_stable_density(0.6, 0.4, x))) < 1e-7


def test_gridded_mass_with_closures():
    a = 0.3
    x = np.logspace(-40, 40, 4001)
    g = GriddedDensity(x, boolean_stable_density(a, 1.0, x), -a - 1, a - 1)
    assert abs(g.mass() - 1) < 1e-6


def test_gridded_roundtrips():
    x = np.logspace(-1, 1, 7)
    g = GriddedDensity(x, 1 / (1 + x) ** 2, -2.0, 0.0)
    back = GriddedDensity.from_json(g.to_json())
    assert np.array_equal(back.nodes, g.nodes) and np.array_equal(back.values, g.values)
    assert back.tail_exponent == -2.0 and back.head_exponent == 0.0
    text = g.to_csv()
    assert text.splitlines()[0] == "x,density"
    back = GriddedDensity.from_csv(text)
    assert np.allclose(back.values, g.values, rtol=1e-15)


def test_gridded_cauchy_matches_exact_transform():
    # density 2/(pi(1+x^2)) on (0, inf), sampled widely with 1/x^2 closures
    x = np.logspace(-8, 8, 20001)
    g = GriddedDensity(x, 2 / (np.pi * (1 + x**2)), -2.0, 0.0)
    z = 1.0 + 1.0j
    # independent value by direct quadrature in log coordinates
    u = np.linspace(np.log(1e-8), np.log(1e8), 400001)
    xs = np.exp(u)
    f = 2 / (np.pi * (1 + xs**2)) / (z - xs) * xs
    ref = np.trapezoid(f, u) if hasattr(np, "trapezoid") else np.trapz(f, u)
    assert abs(complex(g.cauchy(z)) - ref) < 1e-6


def test_psi_and_s_transform_of_half_law():
    # S of b_alpha^1 on (-1, 0) is (-w/(1+w))^(1/alpha - 1)
    for a in (0.5, 0.3):
        b = boolean_stable_handle(alpha=a, rho=1.0)
        w = np.array([-0.8, -0.5, -0.2])
        assert np.max(np.abs(s_transform(b, w) - (-w / (1 + w)) ** (1 / a - 1))) < 1e-9
    b = boolean_stable_handle(alpha=0.5, rho=1.0)
    z = np.array([-2.0 + 0j, -0.5 + 0j])
    # psi(z) = (1/z) G(1/z) - 1 evaluated on the negative axis from its defining integral
    psi = psi_transform(b, z)
    assert np.all(np.abs(psi.imag) < 1e-12) and np.all(psi.real < 0)


def test_reciprocal_of_free_half_law_is_positive_and_normalized():
    from freeconv.stable_laws import free_stable_handle

    s = free_stable_handle(0.5, 1.0)
    r = reciprocal_handle(s)
    assert r.positive
    assert abs(complex(r.F(1e9j)) / 1e9j - 1) < 1e-3
