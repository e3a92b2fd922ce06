import math

import pytest
from scipy import special

from fracyam.constants import ParamPoint, Regime, constants, gamma_fn, poisson_normalization_check, sphere_area
from fracyam.errors import DomainError


@pytest.mark.parametrize("x", [0.5, 1.3, 2.5, 7.25, 17.0, 30.5, -0.5, -1.7, -3.2])
def test_gamma_matches_scipy(x):
    assert gamma_fn(x) == pytest.approx(special.gamma(x), rel=1e-13)


def test_gamma_classical_values():
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert gamma_fn(5) == 24.0
    assert gamma_fn(-0.5) == pytest.approx(-2 * math.sqrt(math.pi), rel=1e-14)


@pytest.mark.parametrize("x", [0, -1, -4])
def test_gamma_poles(x):
    with pytest.raises(DomainError):
        gamma_fn(x)


def test_sphere_area():
    assert sphere_area(1) == pytest.approx(2 * math.pi)
    assert sphere_area(2) == pytest.approx(4 * math.pi)


def test_half_order_point():
    c = constants(ParamPoint(3, 0.5))
    assert c.d_gamma == pytest.approx(-1.0, rel=1e-14)
    assert c.kappa_gamma == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("n,g", [(3, 0.5), (4, 0.75), (7, 1.5), (8, 1.2), (5, 0.01), (9, 1.999), (12, 1.002)])
def test_kappa_positive_and_sharp_identity(n, g):
    c = constants(ParamPoint(n, g))
    assert c.kappa_gamma > 0
    assert c.Y_sphere * c.S_n_gamma == pytest.approx(c.kappa_gamma, rel=1e-15)


def test_regime_and_exponents():
    p = ParamPoint(7, 1.5)
    assert p.regime is Regime.TYPE_II
    assert p.weight_exp == p.m1 == 0.0
    assert ParamPoint(3, 0.5).weight_exp == 0.0
    assert p.crit_exp == pytest.approx(3.5)


@pytest.mark.parametrize("n,g", [(3, 1.0), (3, 1.0005), (2, 1.2), (4, 0.0), (4, 2.0), (1, 0.3), (3.5, 0.5)])
def test_inadmissible_points(n, g):
    with pytest.raises(DomainError):
        ParamPoint(n, g)


def test_margin_is_configurable():
    ParamPoint(3, 1.0005, margin=1e-4)


@pytest.mark.parametrize("n,g,x", [(3, 0.5, 1.0), (7, 1.5, 0.1), (4, 0.75, 10.0)])
def test_poisson_normalization(n, g, x):
    assert poisson_normalization_check(ParamPoint(n, g), x) == pytest.approx(1.0, abs=1e-8)


def test_poisson_needs_positive_height():
    with pytest.raises(DomainError):
        poisson_normalization_check(ParamPoint(3, 0.5), 0.0)
