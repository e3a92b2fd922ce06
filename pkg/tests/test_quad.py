import math

import numpy as np
import pytest

from fracyam.bubble import BubbleTrace, W_closed_form
from fracyam.constants import ParamPoint, constants
from fracyam.errors import DomainError
from fracyam.quad import Boundary, HalfBall, HalfSpace, QuadratureSpec, integrate_radial, mc_oracle

one = lambda r, x: np.ones_like(r)


def test_half_ball_volume():
    res = integrate_radial(one, QuadratureSpec(HalfBall(1.0), 0.0, 2))
    assert res.value == pytest.approx(2 * math.pi / 3, rel=1e-12)


def test_half_ball_first_moment():
    res = integrate_radial(one, QuadratureSpec(HalfBall(1.0), 1.0, 2))
    assert res.value == pytest.approx(math.pi / 4, rel=1e-12)


def test_singular_weight():
    # int_{B+} x_N^m over the unit half-ball in R^3 with m = -1/2
    from scipy.special import beta
    m = -0.5
    exact = 2 * math.pi / (3 + m) * beta((m + 1) / 2, 1.0) / 2
    res = integrate_radial(one, QuadratureSpec(HalfBall(1.0), m, 2))
    assert res.value == pytest.approx(exact, rel=1e-10)


def test_bubble_mass_on_boundary():
    p = ParamPoint(3, 0.5)
    res = integrate_radial(lambda r, x: BubbleTrace(p)(r) ** p.crit_exp, QuadratureSpec(Boundary(), 0.0, 3))
    assert res.value == pytest.approx(constants(p).Y_sphere ** 3, rel=1e-8)


def test_mc_oracle_volume_within_three_errors():
    # the sampling density is exact for f = 1, so only roundoff remains
    res = mc_oracle(one, QuadratureSpec(HalfBall(1.0), 0.0, 2), 1_000_000, seed=1)
    assert abs(res.value - 2 * math.pi / 3) <= 3 * res.err_estimate + 1e-12


def test_mc_cross_oracle_and_determinism():
    p = ParamPoint(7, 1.5)
    f = lambda r, x: W_closed_form(1.0, r, x) ** 2
    spec = QuadratureSpec(HalfBall(4.0), p.m1, 7)
    det = integrate_radial(f, spec)
    a = mc_oracle(f, spec, 200_000, seed=7)
    b = mc_oracle(f, spec, 200_000, seed=7)
    assert a.value == b.value
    assert abs(a.value - det.value) <= 3 * a.err_estimate


def test_spec_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(HalfBall(1.0), -1.0, 3)
    with pytest.raises(DomainError):
        QuadratureSpec(HalfSpace(), 0.0, 3, divergence_declared=True)
    with pytest.raises(DomainError):
        QuadratureSpec(HalfBall(-1.0), 0.0, 3)


def test_nonfinite_integrand_rejected():
    with pytest.raises(DomainError):
        integrate_radial(lambda r, x: np.full_like(r, np.nan), QuadratureSpec(HalfBall(1.0), 0.0, 2))
