import io

import numpy as np
import pytest

from fracyam.bubble import (BubbleParams, BubbleTrace, CallableTrace, RadialProfile, W_closed_form,
                            W_derivatives_32, build_profile, extend, extension_jet, generic_extension_jet, w_eval)
from fracyam.constants import ParamPoint, constants
from fracyam.errors import DomainError

P72 = ParamPoint(7, 1.5)
P3 = ParamPoint(3, 0.5)


def test_center_value_and_monotone():
    b = BubbleParams(P3, 0.5, (0.1, 0.2, 0.3))
    s = np.array(b.sigma)
    e = np.array([1.0, 0, 0])
    vals = [w_eval(b, s + k * e) for k in range(3)]
    assert vals[0] == pytest.approx(constants(P3).alpha_n_gamma * 0.5 ** (-P3.nu))
    assert vals[0] > vals[1] > vals[2]


def test_sigma_length_checked():
    with pytest.raises(DomainError):
        BubbleParams(P3, 1.0, (0.0, 0.0))


def test_closed_form_against_power_representation():
    rng = np.random.default_rng(3)
    r, x = rng.uniform(0.05, 5, 20), rng.uniform(0.05, 5, 20)
    W = extension_jet(P72, BubbleTrace(P72), r, x)["W"]
    np.testing.assert_allclose(W, W_closed_form(1.0, r, x), rtol=1e-10)


def test_power_jets_against_generic_kernel_integral():
    p = ParamPoint(4, 0.75)
    r, x = np.array([0.0, 0.7, 2.0]), np.array([0.3, 1.0, 0.2])
    fast = extension_jet(p, BubbleTrace(p), r, x, order=1)
    slow = generic_extension_jet(p, CallableTrace(BubbleTrace(p)), r, x, order=0)
    np.testing.assert_allclose(fast["W"], slow["W"], rtol=1e-6)


def test_closed_form_derivatives():
    r, x, h = 0.8, 0.6, 1e-5
    dr, dN, drr = W_derivatives_32(1.0, r, x)
    assert dr == pytest.approx((W_closed_form(1.0, r + h, x) - W_closed_form(1.0, r - h, x)) / (2 * h), rel=1e-6)
    assert dN == pytest.approx((W_closed_form(1.0, r, x + h) - W_closed_form(1.0, r, x - h)) / (2 * h), rel=1e-6)
    assert W_derivatives_32(1.0, 0.0, 0.5)[0] == 0.0


def test_jet_derivatives_by_differences():
    p = P72
    r, x, h = np.array([0.9]), np.array([0.4]), 1e-5
    j = extension_jet(p, BubbleTrace(p), r, x, order=2)
    W = lambda rr, xx: extension_jet(p, BubbleTrace(p), rr, xx)["W"][0]
    assert j["r"][0] == pytest.approx((W(r + h, x) - W(r - h, x)) / (2 * h), rel=1e-6)
    assert j["NN"][0] == pytest.approx((W(r, x + h) - 2 * W(r, x) + W(r, x - h)) / h ** 2, rel=1e-4)


def test_scaling_of_closed_form():
    assert W_closed_form(2.0, 1.4, 0.6) == pytest.approx(2 ** (-P72.nu) * W_closed_form(1.0, 0.7, 0.3))


def test_constant_data_extends_to_one():
    v = extend(ParamPoint(4, 0.75), lambda s: np.ones_like(s), np.array([0.5, 2.0]), np.array([0.0, 3.0]))
    np.testing.assert_allclose(v, 1.0, atol=1e-8)


def test_growing_data_rejected():
    with pytest.raises(DomainError):
        extend(P3, lambda s: s ** 2, 1.0, 0.0)


def test_zero_height_rejected_for_jets():
    with pytest.raises(DomainError):
        extension_jet(P3, BubbleTrace(P3), [1.0], [0.0])


def test_profile_csv_round_trip():
    prof = build_profile(P3, BubbleTrace(P3), np.array([0.0, 0.5, 1.0]), np.array([0.0, 0.1, 1.0]))
    back = RadialProfile.from_csv(P3, prof.to_csv())
    np.testing.assert_array_equal(back.values, prof.values)
    np.testing.assert_allclose(prof.trace, BubbleTrace(P3)(prof.r_grid))


def test_profile_validation():
    with pytest.raises(DomainError):
        RadialProfile(P3, np.array([0.0, 1.0]), np.array([0.1, 1.0]), np.ones((2, 2)))
    with pytest.raises(DomainError):
        RadialProfile(P3, np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.ones((2, 2)))
