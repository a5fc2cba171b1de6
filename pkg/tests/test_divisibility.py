import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from freeconv.divisibility import (
    branch_angles,
    classify_fid,
    distance_to_boundary,
    f0_diverges,
    indicator_probe,
    numeric_phi,
    ray_noninjectivity_witness,
    ui_boundary_diagnostic,
    verify_fid_numeric,
)
from freeconv.errors import DomainError, ParameterError
from freeconv.stable_laws import boolean_stable_handle
from freeconv.transform_core import cauchy_law, point_mass


def independent_fid(alpha, rho):
    # the classification written out as three separate regions
    if alpha <= 0.5:
        return True
    if alpha <= 2 / 3 and alpha * (2 - rho) <= 1 and alpha * (1 + rho) <= 1:
        return True
    return alpha == 1 and rho == 0.5


@pytest.mark.parametrize("alpha,rho,rule", [
    (0.5, 0.0, "alpha_le_half"), (0.5, 1.0, "alpha_le_half"), (2 / 3, 0.5, "middle_band"),
    (2 / 3, 0.45, "none"), (0.55, 0.2, "middle_band"), (0.55, 0.1, "none"),
    (0.6, 2 / 3, "middle_band"), (0.6, 0.7, "none"), (1.0, 0.5, "cauchy"),
    (1.0, 0.49, "none"), (1.5, 0.2, "none"), (2.0, 0.5, "none"),
])
def test_closed_form_rules(alpha, rho, rule):
    v = classify_fid(alpha, rho)
    assert v.rule == rule and v.decision == (rule != "none")


@settings(max_examples=300, deadline=None)
@given(st.floats(0.01, 2.0), st.floats(0.0, 1.0))
def test_classification_matches_independent_predicate(alpha, rho):
    assume(distance_to_boundary(alpha, rho) > 1e-9)
    assert classify_fid(alpha, rho).decision == independent_fid(alpha, rho)


def test_classify_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        classify_fid(2.5, 0.5)
    with pytest.raises(ParameterError):
        classify_fid(0.5, 1.2)


def test_verdict_json_has_schema():
    v = classify_fid(0.7, 0.5)
    d = json.loads(v.to_json())
    assert d["schema"] == 1 and d["decision"] is False and d["rule"] == "none"


@pytest.mark.parametrize("alpha,rho", [(0.3, 0.5), (0.5, 1.0), (0.6, 0.5)])
def test_numeric_verdict_accepts_fid_laws(alpha, rho):
    v = verify_fid_numeric(boolean_stable_handle(alpha=alpha, rho=rho))
    assert v.decision and v.rule == "numeric"
    assert v.min_neg_im_phi >= -1e-9 and v.flagged_fraction <= 0.01


@pytest.mark.parametrize("alpha,rho", [(0.8, 0.5), (0.6, 0.9), (0.6, 0.05)])
def test_numeric_verdict_rejects_with_witness(alpha, rho):
    m = boolean_stable_handle(alpha=alpha, rho=rho)
    v = verify_fid_numeric(m)
    assert not v.decision and v.witness is not None
    if v.witness["kind"] == "im_phi":
        assert v.witness["value"] > 1e-9


def test_f0_fast_path_and_full_sweep_agree():
    m = boolean_stable_handle(alpha=1.5, rho=0.2)
    assert f0_diverges(m)
    fast = verify_fid_numeric(m)
    assert not fast.decision and fast.witness["kind"] == "f0_divergence"
    slow = verify_fid_numeric(m, fast_path=False)
    assert not slow.decision


def test_numeric_verdict_on_cauchy_and_point_mass():
    assert verify_fid_numeric(boolean_stable_handle(alpha=1.0, rho=0.5)).decision
    assert verify_fid_numeric(cauchy_law()).decision
    assert verify_fid_numeric(point_mass(2.0)).decision


def test_numeric_phi_of_half_law():
    m = boolean_stable_handle(alpha=0.5, rho=1.0)
    z = np.array([0.3 + 0.2j, -4 + 0.01j, 10 + 3j])
    # F(w) = w + i sqrt(w); with u = sqrt(w), u^2 + i u - z = 0 and phi = -i u
    u = (-1j + np.sqrt(4 * z - 1)) / 2
    assert np.all(u.real > 0)
    assert np.max(np.abs(numeric_phi(m, z) + 1j * u)) < 1e-10


def test_numeric_phi_rejects_lower_half_plane():
    with pytest.raises(DomainError):
        numeric_phi(point_mass(0.0), np.array([1 - 1j]))


def test_branch_angles():
    a, r = 0.6, 0.3
    ang = branch_angles(a, r)
    phi = a * r * math.pi
    assert ang.theta1 == pytest.approx(-phi / (1 - a))
    assert ang.theta2 == pytest.approx((math.pi - phi) / (1 - a))
    assert ang.theta3 == pytest.approx((phi + math.pi) / a) and ang.theta4 is None
    assert branch_angles(0.4, 0.5).theta3 is None


@pytest.mark.parametrize("alpha,rho", [(0.6, 0.3), (0.8, 0.95), (0.7, 0.1)])
def test_ray_witness_collides(alpha, rho):
    w = ray_noninjectivity_witness(alpha, rho)
    assert w.r1 < w.r2 and abs(w.r1 - w.r2) > 1e-3
    assert w.residual < 1e-10
    # independent evaluation of the continued F on the ray
    for r in (w.r1, w.r2):
        val = (r - r ** (1 - alpha)) * cmath.exp(1j * w.theta)
        assert abs(val - w.value) < 1e-10


def test_ray_witness_needs_obstructed_parameters():
    with pytest.raises(ParameterError):
        ray_noninjectivity_witness(0.4, 0.5)
    with pytest.raises(ParameterError):
        ray_noninjectivity_witness(0.6, 0.5)


@pytest.mark.parametrize("alpha,rho", [(0.3, 0.2), (0.4, 1.0), (0.5, 0.5)])
def test_ui_boundary_diagnostic_passes(alpha, rho):
    rep = ui_boundary_diagnostic(alpha, rho)
    assert rep.passed and rep.max_im <= 1e-10
    assert rep.to_dict()["schema"] == 1


def test_ui_boundary_diagnostic_domain():
    with pytest.raises(ParameterError):
        ui_boundary_diagnostic(0.6, 0.5)


def test_indicator_probe_patterns():
    assert indicator_probe(0.4, 0.7, [0.5, 1.0, 3.0]).all_fid
    assert indicator_probe(0.8, 0.5, [0.5, 1.0, 3.0]).none_fid


def test_agreement_on_a_grid_reaching_alpha_above_one():
    from freeconv.config import RunConfig
    from freeconv.suites import criterion_agreement

    ok, mismatches, _, det = criterion_agreement(
        RunConfig(), (0.3, 0.6, 0.8, 1.3, 1.8), (0.05, 0.25, 0.5, 0.75, 0.95))
    assert ok and mismatches == 0, [p for p in det["points"] if not p["witness_ok"]]
