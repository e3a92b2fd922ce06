import math

import numpy as np
import pytest

from fracyam import interaction as it
from fracyam.constants import ParamPoint
from fracyam.errors import DomainError

P3 = ParamPoint(3, 0.5)


def test_eps_ij_closed_form_properties():
    same = it.BubblePair.on_axis(P3, 0.0, 0.1, 0.1, 0.5)
    assert it.eps_ij(same) == pytest.approx(2 ** ((2 * P3.gamma - P3.n) / 2))
    rng = np.random.default_rng(0)
    for _ in range(5):
        e1, e2 = rng.uniform(0.01, 0.2, 2)
        d = rng.uniform(0.0, 1.0)
        pr = it.BubblePair.on_axis(P3, d, e1, e2, 0.5)
        assert it.eps_ij(pr) == pytest.approx(it.eps_ij(pr.swapped()))
        farther = it.BubblePair.on_axis(P3, d + 0.1, e1, e2, 0.5)
        assert it.eps_ij(farther) < it.eps_ij(pr)


def test_pair_validation():
    with pytest.raises(DomainError):
        it.BubblePair.on_axis(P3, 0.1, 0.3, 0.1, 0.5)
    with pytest.raises(DomainError):
        it.BubblePair(P3, (0, 0), (1, 0, 0), 0.1, 0.1, 0.5)


def test_centers_must_share_a_plane():
    with pytest.raises(DomainError):
        it.plane_coordinates([(0, 0, 0, 0), (1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0)])
    xy = it.plane_coordinates([(0, 0, 0), (3, 0, 0), (0, 4, 0)])
    assert np.linalg.norm(xy[1] - xy[2]) == pytest.approx(5.0)


def test_multi_center_partition_integrates_exactly():
    # int_{R^3} (1 + |x|^2)^(-3) dx = pi^2 / 4, integrated with two partition centers
    plane = np.array([[0.0, 0.0], [0.3, 0.0]])
    f = lambda D: (1 + D[0] ** 2) ** -3.0
    val = it.multi_center_integral(3, plane, [1.0, 0.2], f)
    assert val == pytest.approx(math.pi ** 2 / 4, rel=1e-8)


def test_pairing_symmetry_and_ratio():
    pair = it.BubblePair.on_axis(P3, 0.25, 0.5 / 32, 0.5 / 32, 0.5)
    a = it.epsilon_ij(pair)
    assert a == pytest.approx(it.epsilon_ij(pair.swapped()), rel=1e-10)
    assert 70 < a / it.eps_ij(pair) < 85


def test_higher_exponent_preconditions():
    with pytest.raises(DomainError):
        it.higher_exponent_check(P3, 2.0, 0.5)
    with pytest.raises(DomainError):
        it.higher_exponent_check(P3, 0.5, 2.5)


def test_higher_exponent_slope():
    rep = it.higher_exponent_check(P3, 2.5, 0.5)
    assert rep.computed >= 0.45


def test_p_star_formula():
    assert it.p_star_from(1.0, 2.0) == math.floor(1 + 0.5) + 1
    with pytest.raises(DomainError):
        it.p_star_from(-1.0, 2.0)


def test_config_validation():
    with pytest.raises(DomainError):
        it.BubbleConfig(P3, [(0, 0, 0)], [0.1], [0.0], 0.5)
    cfg = it.BubbleConfig.on_circle(P3, 3, 0.1, 0.01, 0.5)
    assert cfg.plane.shape == (3, 2)
