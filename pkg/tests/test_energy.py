import numpy as np
import pytest

from fracyam.bubble import BubbleTrace, PowerTrace
from fracyam.constants import ParamPoint, constants
from fracyam.energy import (ExtensionField, GluedTestFunction, Q_form, boundary_mass, cutoff, energy_bar,
                            sharp_constant_check)
from fracyam.errors import DomainError
from fracyam.report import Status

P3 = ParamPoint(3, 0.5)


def test_cutoff_shape():
    t = np.array([0.0, 1.0, 2.5, 4.0, 9.0])
    chi, d1, d2 = cutoff(t)
    np.testing.assert_allclose(chi[[0, 1, 3, 4]], [1, 1, 0, 0])
    assert 0 < chi[2] < 1
    h = 1e-6
    assert d1[2] == pytest.approx((cutoff(2.5 + h)[0] - cutoff(2.5 - h)[0]) / (2 * h), rel=1e-6)
    # C^2 at the joins
    for edge in (1.0, 4.0):
        _, a1, a2 = cutoff(np.array([edge - 1e-9, edge + 1e-9]))
        assert abs(a1).max() < 1e-6 and abs(a2).max() < 1e-6


def test_form_is_symmetric_and_bilinear():
    U = ExtensionField(P3, PowerTrace(1.0, 1.0))
    V = ExtensionField(P3, PowerTrace(2.0, 0.7))
    a, b = Q_form(P3, U, V, level=0), Q_form(P3, V, U, level=0)
    assert a == pytest.approx(b, rel=1e-12)
    U3 = ExtensionField(P3, PowerTrace(1.0, 1.0, amp=3.0))
    assert Q_form(P3, U3, V, level=0) == pytest.approx(3 * a, rel=1e-12)


@pytest.mark.parametrize("n,g", [(3, 0.5), (7, 1.5)])
def test_bubble_attains_sharp_constant(n, g):
    reps = sharp_constant_check(ParamPoint(n, g), level=0)
    assert all(r.status is Status.PASS for r in reps)


def test_energy_scale_and_multiple_invariance():
    e1 = energy_bar(P3, ExtensionField(P3, BubbleTrace(P3, 1.0)), level=0)
    e2 = energy_bar(P3, ExtensionField(P3, BubbleTrace(P3, 0.25)), level=0)
    e3 = energy_bar(P3, ExtensionField(P3, BubbleTrace(P3, 1.0, amplitude=5.0)), level=0)
    assert e2 == pytest.approx(e1, rel=1e-8)
    assert e3 == pytest.approx(e1, rel=1e-12)


def test_zero_trace_rejected():
    with pytest.raises(DomainError):
        energy_bar(P3, ExtensionField(P3, PowerTrace(1.0, 1.0, amp=0.0)), level=0)


def test_glued_function_is_continuous_and_near_bubble():
    g = GluedTestFunction(P3, 0.5 / 16, 0.5)
    assert g.field.continuity_jump() < 1e-6
    Y = constants(P3).Y_sphere
    assert g.energy(level=0) == pytest.approx(Y, rel=0.05)
    assert g.energy(level=0) > Y
    assert boundary_mass(P3, g.field, level=0) > 0


def test_glued_stress_case_still_defined():
    # eps at the largest value allowed by C0 eps <= delta
    g = GluedTestFunction(P3, 0.25, 0.5)
    assert np.isfinite(g.energy(level=0))
