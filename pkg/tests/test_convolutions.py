import math
import warnings

import numpy as np
import pytest

from freeconv.convolutions import (
    boolean_convolve,
    boolean_power,
    classical_mult_convolve,
    free_convolve,
    free_mult_convolve,
    free_power,
    identity_points,
    log_grid,
    reciprocal_pushforward,
    verify_boolean_reproducing,
    verify_scaling_identity,
)
from freeconv.divisibility import belinschi_nica, numeric_phi
from freeconv.errors import DomainError, PreconditionError
from freeconv.stable_laws import (
    boolean_stable_density,
    boolean_stable_handle,
    classical_stable_density,
    free_stable_handle,
)
from freeconv.transform_core import (
    GriddedDensity,
    dilate,
    point_mass,
    standard_grid,
    stieltjes_invert,
)

Z = standard_grid()


def b(alpha, rho=1.0):
    return boolean_stable_handle(alpha=alpha, rho=rho)


@pytest.mark.parametrize("alpha,rho", [(0.3, 0.2), (0.5, 1.0), (0.8, 0.6), (1.5, 0.5)])
def test_boolean_strict_stability(alpha, rho):
    m = b(alpha, rho)
    k1 = boolean_convolve(m, m).handle.K(Z)
    k2 = dilate(m, 2 ** (1 / alpha)).K(Z)
    assert np.max(np.abs(k1 - k2) / np.abs(k2)) < 1e-12


def test_boolean_power_zero_and_negative():
    assert boolean_power(b(0.5), 0).handle.atom == 0.0
    with pytest.raises(DomainError):
        boolean_power(b(0.5), -1)


def test_free_convolution_residual_and_phi_additivity():
    m1, m2 = b(0.5), b(0.3)
    r = free_convolve(m1, m2)
    assert r.method == "subordination_fixpoint" and r.max_residual < 1e-10
    # points whose preimage under F stays in the upper half-plane, where a
    # generic handle can be evaluated
    z = np.array([1 + 5j, -3 + 4j, 0.5 + 8j])
    lhs = numeric_phi(r.handle, z)
    rhs = numeric_phi(m1, z) + numeric_phi(m2, z)
    assert np.max(np.abs(lhs - rhs)) < 1e-8


def test_free_power_two_is_self_convolution():
    m = b(0.5)
    p = free_power(m, 2.0).handle
    q = free_convolve(m, m, diagnose=False).handle
    assert np.max(np.abs(p.F(Z) - q.F(Z))) < 1e-9


def test_free_power_of_free_stable_is_dilation():
    s = free_stable_handle(0.5, 1.0)
    p = free_power(s, 2.0).handle
    # phi scales by t and phi(z) = -i z^(1/2): s^{[+]2} = D_4 s
    assert np.max(np.abs(p.F(Z) - dilate(s, 4.0).F(Z))) < 1e-9


def test_free_power_below_one():
    assert free_power(b(0.5), 0.5).handle is not None
    with pytest.raises(PreconditionError):
        free_power(b(0.9), 0.5)


def test_mult_reproducing_exact_cases():
    for s, t in ((1, 1), (1, 2)):
        rep = verify_boolean_reproducing(1.0, s, t, tol=1e-9)
        assert rep.passed, rep.to_dict()


def test_mult_reproducing_general_rho():
    rep = verify_boolean_reproducing(0.3, 1, 1, tol=1e-9)
    assert rep.passed, rep.to_dict()


def test_mult_diagnostic_and_identity():
    r = free_mult_convolve(b(0.5), b(0.5))
    assert r.method == "s_transform" and r.max_residual < 1e-8
    z = identity_points()
    delta = free_mult_convolve(b(0.5), point_mass(3.0), diagnose=False).handle
    assert np.max(np.abs(delta.F(z) - dilate(b(0.5), 3.0).F(z))) < 1e-9


def test_mult_rejects_real_line_factor():
    with pytest.raises(PreconditionError):
        free_mult_convolve(b(0.5, 0.3), b(0.5))


def test_scaling_identity():
    rep = verify_scaling_identity(b(0.5), b(0.4), 2.0, tol=1e-8, grid=identity_points())
    assert rep.passed, rep.to_dict()


def test_product_density_matches_reproduced_law():
    p = free_mult_convolve(b(0.5), b(0.5), diagnose=False).handle
    x = np.logspace(-1, 1, 12)
    assert np.max(np.abs(stieltjes_invert(p, x).values - boolean_stable_density(1 / 3, 1, x))) < 1e-8


def test_classical_mult_identity_half():
    u = log_grid()
    n = GriddedDensity(u, classical_stable_density(0.5, u), -1.5, None)
    res = classical_mult_convolve(n, reciprocal_pushforward(n))
    sel = (res.nodes > 0.05) & (res.nodes < 20)
    x = res.nodes[sel]
    assert np.max(np.abs(res.values[sel] - x**-0.5 / (math.pi * (1 + x)))) < 1e-8


def test_classical_mult_warns_on_mass_loss():
    x = np.logspace(-1, 1, 50)
    d = GriddedDensity(x, np.full(50, 0.1))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = classical_mult_convolve(d, d)
    assert any(issubclass(w.category, RuntimeWarning) for w in caught) or abs(res.mass_loss) <= 1e-4


def test_reciprocal_pushforward_is_involution():
    x = np.logspace(-2, 2, 101)
    d = GriddedDensity(x, boolean_stable_density(0.4, 1.0, x), -1.4, -0.6)
    back = reciprocal_pushforward(reciprocal_pushforward(d))
    assert np.allclose(back.nodes, d.nodes, rtol=1e-14)
    assert np.allclose(back.values, d.values, rtol=1e-12)
    assert back.tail_exponent == pytest.approx(-1.4) and back.head_exponent == pytest.approx(-0.6)


def test_belinschi_nica_bercovici_pata_half():
    m = belinschi_nica(b(0.5), 1.0)
    z = np.array([1 + 2j, -2 + 3j, 4 + 6j])
    assert np.max(np.abs(numeric_phi(m, z) + 1j * np.sqrt(z))) < 1e-9


def _bn_points():
    rng = np.random.default_rng(11)
    return rng.uniform(-5, 5, 10) + 1j * rng.uniform(1, 10, 10)


def test_belinschi_nica_composition_adds_parameters():
    z = _bn_points()
    m = b(0.5)
    twice = belinschi_nica(belinschi_nica(m, 1.0), 1.0)
    assert np.max(np.abs(twice.F(z) - belinschi_nica(m, 2.0).F(z))) < 1e-6


@pytest.mark.xfail(strict=True, reason="the composition law is B_s o B_t = B_(s+t); "
                                       "B_(s+t+st) is a different law (B_3 vs B_2 here)")
def test_belinschi_nica_composition_s_plus_t_plus_st():
    z = _bn_points()
    m = b(0.5)
    twice = belinschi_nica(belinschi_nica(m, 1.0), 1.0)
    assert np.max(np.abs(twice.F(z) - belinschi_nica(m, 3.0).F(z))) < 1e-6


def test_free_self_convolution_phi_additivity_high_im():
    m = b(0.5)
    rng = np.random.default_rng(3)
    z = rng.uniform(-5, 5, 20) + 1j * rng.uniform(5, 50, 20)
    r = free_convolve(m, m, diagnose=False).handle
    assert np.max(np.abs(numeric_phi(r, z) - 2 * numeric_phi(m, z))) < 1e-8


def test_free_convolution_with_point_mass_translates():
    m = b(0.4, 0.3)
    r = free_convolve(m, point_mass(1.5), diagnose=False).handle
    z = Z[Z.imag > 0.1]
    assert np.max(np.abs(r.F(z) - m.F(z - 1.5))) < 1e-10
